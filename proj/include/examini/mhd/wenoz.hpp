#pragma once

#include <cmath>
#include <utility>

namespace examini::mhd {

/// Fifth-order WENO-Z (Borges et al. 2008) parameters. eps=1e-40, p=2.
struct WenoZParams {
  double eps = 1e-40;
  int power = 2;
};

namespace detail {

/// Value at the right interface of the central cell of v[0..4]
/// (cells i-2 .. i+2), from cell averages.
template <typename Scalar>
Scalar wenoz_right(Scalar vm2, Scalar vm1, Scalar v0, Scalar vp1, Scalar vp2,
                   const WenoZParams& prm) {
  const Scalar q0 = (Scalar(2) * vm2 - Scalar(7) * vm1 + Scalar(11) * v0) / Scalar(6);
  const Scalar q1 = (-vm1 + Scalar(5) * v0 + Scalar(2) * vp1) / Scalar(6);
  const Scalar q2 = (Scalar(2) * v0 + Scalar(5) * vp1 - vp2) / Scalar(6);

  const Scalar a0 = vm2 - Scalar(2) * vm1 + v0;
  const Scalar b0 = vm2 - Scalar(4) * vm1 + Scalar(3) * v0;
  const Scalar a1 = vm1 - Scalar(2) * v0 + vp1;
  const Scalar b1 = vm1 - vp1;
  const Scalar a2 = v0 - Scalar(2) * vp1 + vp2;
  const Scalar b2 = Scalar(3) * v0 - Scalar(4) * vp1 + vp2;
  const Scalar c1312 = Scalar(13) / Scalar(12);
  const Scalar beta0 = c1312 * a0 * a0 + Scalar(0.25) * b0 * b0;
  const Scalar beta1 = c1312 * a1 * a1 + Scalar(0.25) * b1 * b1;
  const Scalar beta2 = c1312 * a2 * a2 + Scalar(0.25) * b2 * b2;
  using std::abs;
  const Scalar tau5 = abs(beta0 - beta2);
  const Scalar eps = Scalar(prm.eps);
  auto weight = [&](Scalar d, Scalar beta) {
    Scalar r = tau5 / (beta + eps);
    Scalar rp = r;
    for (int k = 1; k < prm.power; ++k) rp *= r;
    return d * (Scalar(1) + rp);
  };
  const Scalar w0 = weight(Scalar(0.1), beta0);
  const Scalar w1 = weight(Scalar(0.6), beta1);
  const Scalar w2 = weight(Scalar(0.3), beta2);
  return (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2);
}

}  // namespace detail

/// Interface values of the central cell of a 5-cell stencil of cell
/// averages: returns (value at the left face, value at the right face).
template <typename Scalar>
std::pair<Scalar, Scalar> wenoz_reconstruct(const Scalar (&v)[5],
                                            const WenoZParams& prm = {}) {
  const Scalar right = detail::wenoz_right(v[0], v[1], v[2], v[3], v[4], prm);
  const Scalar left = detail::wenoz_right(v[4], v[3], v[2], v[1], v[0], prm);
  return {left, right};
}

}  // namespace examini::mhd
