// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace letterlm {

struct OffloadEvent {
    long step = 0;
    enum class Kind { kOffload, kRestore } kind = Kind::kRestore;
    std::string group;
    std::size_t bytes = 0;
};

// Fast-pool budget with an ordered movement log. Usage never exceeds
// capacity after a public operation.
struct MemoryBudget {
    std::size_t capacity = std::numeric_limits<std::size_t>::max();
    std::size_t usage = 0;
    std::size_t peak = 0;
    std::vector<OffloadEvent> events;

    std::size_t offload_count() const;
    std::size_t restore_count() const;
};

// LRU residency simulator for per-group optimizer state. Groups start in
// the slow pool; require() evicts least-recently-used residents until the
// needed group fits, then moves it in. Movements are pure bookkeeping:
// the state values themselves are owned elsewhere and never copied
// through a lossy representation, so they are bit-identical across moves.
class ResidencyManager {
public:
    void register_group(const std::string& name, std::size_t bytes);
    bool has_group(const std::string& name) const;
    std::size_t group_bytes(const std::string& name) const;
    std::size_t largest_group_bytes() const;
    std::size_t total_bytes() const;

    // Ensures `name` is resident in the fast pool, evicting as needed.
    // Rejects groups larger than the capacity, reporting both sizes.
    void require(const std::string& name, MemoryBudget& budget, long step);

    bool resident(const std::string& name) const;
    std::vector<std::string> resident_groups() const;

private:
    struct Group {
        std::size_t bytes = 0;
        bool resident = false;
        std::uint64_t last_use = 0;
    };
    void evict_lru(MemoryBudget& budget, long step);

    std::map<std::string, Group> groups_;
    std::uint64_t clock_ = 0;
};

}  // namespace letterlm
