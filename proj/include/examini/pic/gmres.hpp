#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "examini/core/error.hpp"

namespace examini::pic {

template <typename Scalar>
struct GmresOptions {
  Scalar tolerance = Scalar(1e-8);  // on ||b - A x|| / ||b||
  int restart = 20;
  int max_iters = 1000;
};

template <typename Scalar>
struct GmresResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  /// Relative residual: initial value, then one entry per Arnoldi step.
  std::vector<Scalar> residual_history;
  /// Index into residual_history where each restart cycle begins.
  std::vector<std::size_t> cycle_starts;
  /// ||b - A x|| / ||b|| recomputed from the returned x.
  Scalar true_residual = Scalar(0);
  int iterations = 0;
  /// Arnoldi produced a zero vector: x is exact within the Krylov space.
  bool breakdown = false;

  Scalar residual() const { return residual_history.back(); }
};

class GmresNoConvergence : public Error {
 public:
  GmresNoConvergence(double residual, int iterations, const std::string& context = {})
      : Error("GmresNoConvergence",
              "relative residual " + std::to_string(residual) + " after " +
                  std::to_string(iterations) + " iterations" +
                  (context.empty() ? "" : ", " + context)),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Restarted GMRES(m): Arnoldi with modified Gram-Schmidt and Givens
/// rotations on the Hessenberg least-squares problem. `apply(v)` returns
/// A v. Throws GmresNoConvergence when max_iters is exhausted.
template <typename Scalar, typename Apply>
GmresResult<Scalar> gmres(Apply&& apply,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                          const GmresOptions<Scalar>& opt) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using std::abs;
  using std::sqrt;

  GmresResult<Scalar> res;
  res.x = x0;
  const Scalar bnorm = b.norm();
  if (bnorm == Scalar(0)) {
    res.x.setZero(b.size());
    res.residual_history.push_back(Scalar(0));
    res.cycle_starts.push_back(0);
    return res;
  }
  const int m = std::max(1, opt.restart);
  Vec r = b - apply(res.x);
  Scalar beta = r.norm();
  res.cycle_starts.push_back(0);
  res.residual_history.push_back(beta / bnorm);

  while (beta / bnorm > opt.tolerance) {
    if (res.iterations >= opt.max_iters)
      throw GmresNoConvergence(double(beta / bnorm), res.iterations);
    Mat V(b.size(), m + 1);
    Mat H = Mat::Zero(m + 1, m);
    Vec cs = Vec::Zero(m), sn = Vec::Zero(m), g = Vec::Zero(m + 1);
    V.col(0) = r / beta;
    g[0] = beta;
    int k = 0;
    bool done = false;
    for (; k < m && res.iterations < opt.max_iters; ++k) {
      Vec w = apply(V.col(k));
      for (int i = 0; i <= k; ++i) {
        H(i, k) = V.col(i).dot(w);
        w -= H(i, k) * V.col(i);
      }
      H(k + 1, k) = w.norm();
      const bool lucky = !(H(k + 1, k) > Scalar(1e-14) * H.col(k).head(k + 1).norm());
      if (!lucky) V.col(k + 1) = w / H(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const Scalar t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const Scalar den = sqrt(H(k, k) * H(k, k) + H(k + 1, k) * H(k + 1, k));
      cs[k] = H(k, k) / den;
      sn[k] = H(k + 1, k) / den;
      H(k, k) = den;
      H(k + 1, k) = Scalar(0);
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++res.iterations;
      res.residual_history.push_back(abs(g[k + 1]) / bnorm);
      if (lucky) {
        res.breakdown = true;
        done = true;
        ++k;
        break;
      }
      if (abs(g[k + 1]) / bnorm <= opt.tolerance) {
        ++k;
        done = true;
        break;
      }
    }
    // Back-substitution on the k x k triangle.
    Vec y = H.topLeftCorner(k, k).template triangularView<Eigen::Upper>().solve(g.head(k));
    res.x += V.leftCols(k) * y;
    r = b - apply(res.x);
    beta = r.norm();
    if (res.breakdown) break;
    if (!done || beta / bnorm > opt.tolerance) {
      // Next cycle starts from the true residual.
      res.cycle_starts.push_back(res.residual_history.size());
      res.residual_history.push_back(beta / bnorm);
    }
  }
  res.true_residual = beta / bnorm;
  return res;
}

}  // namespace examini::pic
