#pragma once

#include <vector>

#include "examini/core/error.hpp"

namespace examini::bench {

EXAMINI_DEFINE_ERROR(NonPositiveTime);

/// t_ref / t_new. Throws NonPositiveTime.
double compute_speedup(double t_ref, double t_new);
/// t_base / t_n.
double weak_efficiency(double t_base, double t_n);
/// (t_base * n_base) / (t_n * n); InvalidArgument when n < n_base.
double strong_efficiency(double t_base, int n_base, double t_n, int n);

/// Rounds half away from zero to `digits` decimals (tables use 2).
double round_to(double x, int digits = 2);

/// Median; the mean of the two middle values for even counts.
/// InvalidArgument on an empty sample.
double median(std::vector<double> v);

}  // namespace examini::bench
