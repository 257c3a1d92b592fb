#include "proxsg/prox.hpp"

#include <cmath>

#include "proxsg/error.hpp"

namespace proxsg {

namespace {

void require_same_size(const Vec& z, const Vec& b, const char* who) {
  if (z.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, std::string(who) + ": dimension mismatch");
}

}  // namespace

void L1L2Regularizer::validate() const {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "L1L2Regularizer: gamma must be positive");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "L1L2Regularizer: alpha must be nonnegative");
}

double L1L2Regularizer::value(const Vec& x) const {
  return gamma * (x.lpNorm<1>() - alpha * x.norm());
}

const char* to_string(LossTag tag) {
  return tag == LossTag::kLeastSquares ? "least_squares" : "lorentzian";
}

double LossKind::value(const Vec& z) const {
  return tag == LossTag::kLeastSquares ? least_squares_value(z, b) : lorentzian_value_grad(z, b).first;
}

Vec LossKind::grad(const Vec& z) const {
  return tag == LossTag::kLeastSquares ? least_squares_grad(z, b) : lorentzian_value_grad(z, b).second;
}

Vec soft_threshold(const Vec& w, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "soft_threshold: threshold must be nonnegative");
  Vec out(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    const double mag = std::abs(w[i]) - t;
    out[i] = mag > 0.0 ? std::copysign(mag, w[i]) : 0.0;
  }
  return out;
}

Vec norm_subgradient(const Vec& x) {
  const double n = x.norm();
  if (n == 0.0) return Vec::Zero(x.size());
  return x / n;
}

Vec least_squares_grad(const Vec& z, const Vec& b) {
  require_same_size(z, b, "least_squares_grad");
  return z - b;
}

double least_squares_value(const Vec& z, const Vec& b) {
  require_same_size(z, b, "least_squares_value");
  return 0.5 * (z - b).squaredNorm();
}

std::pair<double, Vec> lorentzian_value_grad(const Vec& z, const Vec& b) {
  require_same_size(z, b, "lorentzian_value_grad");
  double value = 0.0;
  Vec grad(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double r = z[i] - b[i];
    value += std::log1p(r * r);
    grad[i] = 2.0 * r / (1.0 + r * r);
  }
  return {value, grad};
}

}  // namespace proxsg
