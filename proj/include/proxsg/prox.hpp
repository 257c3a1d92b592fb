#ifndef PROXSG_PROX_HPP_
#define PROXSG_PROX_HPP_

#include <utility>

#include "proxsg/linear_map.hpp"

namespace proxsg {

/// gamma (||x||_1 - alpha ||x||).
struct L1L2Regularizer {
  double gamma = 0.1;
  double alpha = 1.0;

  void validate() const;
  double value(const Vec& x) const;
};

enum class LossTag { kLeastSquares, kLorentzian };

const char* to_string(LossTag tag);

/// Data-fidelity term phi(z) with target b.
struct LossKind {
  LossTag tag = LossTag::kLeastSquares;
  Vec b;

  /// Lipschitz modulus of grad phi: 1 for least squares, 2 for Lorentzian.
  double ell() const { return tag == LossTag::kLeastSquares ? 1.0 : 2.0; }
  double value(const Vec& z) const;
  Vec grad(const Vec& z) const;
};

/// Componentwise sign(w_i) max(0, |w_i| - t): the prox of t ||.||_1.
Vec soft_threshold(const Vec& w, double t);

/// 0 at the origin (exact test), x / ||x|| otherwise.
Vec norm_subgradient(const Vec& x);

/// grad of (1/2)||z - b||^2.
Vec least_squares_grad(const Vec& z, const Vec& b);
double least_squares_value(const Vec& z, const Vec& b);

/// sum log(1 + (z_i - b_i)^2) and its gradient 2 r_i / (1 + r_i^2).
std::pair<double, Vec> lorentzian_value_grad(const Vec& z, const Vec& b);

}  // namespace proxsg

#endif  // PROXSG_PROX_HPP_
