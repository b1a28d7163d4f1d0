#include "examini/bench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace examini::bench {

namespace {

void require_positive(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw NonPositiveTime(std::string(what) + " = " + std::to_string(t));
}

}  // namespace

double compute_speedup(double t_ref, double t_new) {
  require_positive(t_ref, "t_ref");
  require_positive(t_new, "t_new");
  return t_ref / t_new;
}

double weak_efficiency(double t_base, double t_n) {
  require_positive(t_base, "t_base");
  require_positive(t_n, "t_n");
  return t_base / t_n;
}

double strong_efficiency(double t_base, int n_base, double t_n, int n) {
  require_positive(t_base, "t_base");
  require_positive(t_n, "t_n");
  if (n_base < 1 || n < n_base)
    throw InvalidArgument("need 1 <= n_base <= n, got n_base=" + std::to_string(n_base) +
                          " n=" + std::to_string(n));
  return (t_base * n_base) / (t_n * n);
}

double round_to(double x, int digits) {
  const double s = std::pow(10.0, digits);
  return std::round(x * s) / s;
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace examini::bench
