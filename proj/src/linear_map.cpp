#include "proxsg/linear_map.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "proxsg/error.hpp"

namespace proxsg {

LinearMap LinearMap::identity(Index dim) {
  if (dim <= 0) throw Error(ErrorCode::kInvalidArgument, "identity map needs a positive dimension");
  LinearMap map;
  map.kind_ = Kind::kIdentity;
  map.rows_ = map.cols_ = dim;
  return map;
}

LinearMap LinearMap::dense(Mat matrix) {
  if (matrix.rows() <= 0 || matrix.cols() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "dense map needs positive dimensions");
  }
  LinearMap map;
  map.kind_ = Kind::kDense;
  map.rows_ = matrix.rows();
  map.cols_ = matrix.cols();
  map.matrix_ = std::make_shared<const Mat>(std::move(matrix));
  return map;
}

LinearMap LinearMap::diagonal(Vec diag) {
  if (diag.size() <= 0) throw Error(ErrorCode::kInvalidArgument, "diagonal map needs a positive dimension");
  LinearMap map;
  map.kind_ = Kind::kDiagonal;
  map.rows_ = map.cols_ = diag.size();
  map.diag_ = std::make_shared<const Vec>(std::move(diag));
  return map;
}

LinearMap LinearMap::custom(Index rows, Index cols, Apply apply, Apply adjoint) {
  if (rows <= 0 || cols <= 0 || !apply || !adjoint) {
    throw Error(ErrorCode::kInvalidArgument, "custom map needs positive dimensions and both callbacks");
  }
  LinearMap map;
  map.kind_ = Kind::kCustom;
  map.rows_ = rows;
  map.cols_ = cols;
  map.apply_ = std::move(apply);
  map.adjoint_ = std::move(adjoint);
  return map;
}

Vec LinearMap::apply(const Vec& x) const {
  if (x.size() != cols_) throw Error(ErrorCode::kDimensionMismatch, "LinearMap::apply: input dimension mismatch");
  switch (kind_) {
    case Kind::kIdentity:
      return x;
    case Kind::kDense:
      return (*matrix_) * x;
    case Kind::kDiagonal:
      return diag_->cwiseProduct(x);
    case Kind::kCustom:
      return apply_(x);
  }
  return x;
}

Vec LinearMap::adjoint(const Vec& y) const {
  if (y.size() != rows_) throw Error(ErrorCode::kDimensionMismatch, "LinearMap::adjoint: input dimension mismatch");
  switch (kind_) {
    case Kind::kIdentity:
      return y;
    case Kind::kDense:
      return matrix_->transpose() * y;
    case Kind::kDiagonal:
      return diag_->cwiseProduct(y);
    case Kind::kCustom:
      return adjoint_(y);
  }
  return y;
}

SpectralEstimate estimate_spectral_norm(const LinearMap& map, double tol, int max_iter, std::uint64_t seed) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "spectral_norm: tol must be positive");
  if (max_iter <= 0) throw Error(ErrorCode::kInvalidArgument, "spectral_norm: max_iter must be positive");
  if (map.is_identity()) return {1.0, 0};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec v(map.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();

  // Rayleigh quotient of A^T A; lambda = sigma^2. The quotient increases
  // monotonically, so the remaining error is extrapolated from the ratio of
  // successive increments before accepting.
  double lambda_prev = 0.0;
  double delta_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vec w = map.adjoint(map.apply(v));
    const double lambda = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return {0.0, it};  // A v = 0 on a random start: A = 0 with probability one
    v = w / wn;
    const double delta = std::abs(lambda - lambda_prev);
    double tail = delta;
    if (it > 2 && delta_prev > 0.0) {
      const double ratio = std::min(delta / delta_prev, 0.999999);
      tail = std::max(delta, delta * ratio / (1.0 - ratio));
    }
    delta_prev = delta;
    if (it > 2 && tail <= tol * lambda) {
      // One more product so the returned value is the Rayleigh quotient of the latest vector.
      const double sigma = std::sqrt(std::max(lambda, v.dot(map.adjoint(map.apply(v)))));
      return {sigma, it};
    }
    lambda_prev = lambda;
  }
  std::ostringstream msg;
  msg << "spectral_norm: power iteration did not converge in " << max_iter << " iterations";
  Error err(ErrorCode::kNotConverged, msg.str());
  err.last_estimate = std::sqrt(std::max(lambda_prev, 0.0));
  throw err;
}

double spectral_norm(const LinearMap& map, double tol, int max_iter, std::uint64_t seed) {
  if (map.is_identity()) return 1.0;
  return estimate_spectral_norm(map, tol, max_iter, seed).sigma * (1.0 + tol);
}

}  // namespace proxsg
