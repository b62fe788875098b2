// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/pager.hpp"

#include <algorithm>
#include <stdexcept>

namespace letterlm {

std::size_t MemoryBudget::offload_count() const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [](const OffloadEvent& e) {
            return e.kind == OffloadEvent::Kind::kOffload;
        }));
}

std::size_t MemoryBudget::restore_count() const {
    return events.size() - offload_count();
}

void ResidencyManager::register_group(const std::string& name, std::size_t bytes) {
    if (groups_.count(name) != 0) {
        throw std::invalid_argument("pager: group '" + name + "' already registered");
    }
    groups_[name] = Group{bytes, false, 0};
}

bool ResidencyManager::has_group(const std::string& name) const {
    return groups_.count(name) != 0;
}

std::size_t ResidencyManager::group_bytes(const std::string& name) const {
    return groups_.at(name).bytes;
}

std::size_t ResidencyManager::largest_group_bytes() const {
    std::size_t largest = 0;
    for (const auto& [name, g] : groups_) largest = std::max(largest, g.bytes);
    return largest;
}

std::size_t ResidencyManager::total_bytes() const {
    std::size_t total = 0;
    for (const auto& [name, g] : groups_) total += g.bytes;
    return total;
}

void ResidencyManager::evict_lru(MemoryBudget& budget, long step) {
    const Group* victim = nullptr;
    const std::string* victim_name = nullptr;
    for (const auto& [name, g] : groups_) {
        if (!g.resident) continue;
        if (victim == nullptr || g.last_use < victim->last_use) {
            victim = &g;
            victim_name = &name;
        }
    }
    if (victim == nullptr) {
        throw std::logic_error("pager: nothing left to evict");
    }
    groups_[*victim_name].resident = false;
    budget.usage -= victim->bytes;
    budget.events.push_back(
        {step, OffloadEvent::Kind::kOffload, *victim_name, victim->bytes});
}

void ResidencyManager::require(const std::string& name, MemoryBudget& budget, long step) {
    auto it = groups_.find(name);
    if (it == groups_.end()) {
        throw std::invalid_argument("pager: unknown group '" + name + "'");
    }
    Group& g = it->second;
    if (g.bytes > budget.capacity) {
        throw std::invalid_argument("pager: group '" + name + "' needs " +
                                    std::to_string(g.bytes) + " bytes, capacity is " +
                                    std::to_string(budget.capacity));
    }
    g.last_use = ++clock_;
    if (g.resident) return;

    while (budget.usage + g.bytes > budget.capacity) {
        evict_lru(budget, step);
    }
    g.resident = true;
    budget.usage += g.bytes;
    budget.peak = std::max(budget.peak, budget.usage);
    budget.events.push_back({step, OffloadEvent::Kind::kRestore, name, g.bytes});
}

bool ResidencyManager::resident(const std::string& name) const {
    return groups_.at(name).resident;
}

std::vector<std::string> ResidencyManager::resident_groups() const {
    std::vector<std::string> out;
    for (const auto& [name, g] : groups_) {
        if (g.resident) out.push_back(name);
    }
    return out;
}

}  // namespace letterlm
