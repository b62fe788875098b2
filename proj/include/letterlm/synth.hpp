// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "letterlm/letters.hpp"

namespace letterlm {

// Deterministic templated physician letters for desk-scale experiments.
// Roughly half the letters carry a "Planned treatment" head and a body
// that lists scheduled procedure dates after the document date; the
// other half carry "Recommended treatment" and a body stating that the
// patient needs time to consider. Every letter parses cleanly.
std::vector<std::string> generate_synthetic_corpus(std::uint64_t seed, int n);

// The template scans used to detect which body variant a text follows.
bool has_consider_phrase(const std::string& text);
int count_scheduled_dates(const std::string& text);  // dd.mm.yyyy occurrences

}  // namespace letterlm
