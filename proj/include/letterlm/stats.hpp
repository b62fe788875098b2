// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>

namespace letterlm {

struct TestResult {
    double t_statistic = 0.0;
    long degrees_of_freedom = 0;
    std::optional<double> p_value;  // absent when the differences are degenerate
    double mean_difference = 0.0;
    bool degenerate = false;
};

// Two-sided paired t-test over element-wise differences a[i] - b[i].
// Requires equal lengths >= 2. All-identical differences are flagged
// degenerate: the mean difference is reported without a p-value.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// CDF of Student's t distribution via the regularized incomplete beta
// function (continued fraction), accurate to ~1e-12.
double student_t_cdf(double t, double df);

}  // namespace letterlm
