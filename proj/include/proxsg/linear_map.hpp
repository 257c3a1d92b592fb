#ifndef PROXSG_LINEAR_MAP_HPP_
#define PROXSG_LINEAR_MAP_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>

namespace proxsg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/**
 * @brief Immutable linear operator A: R^d -> R^m together with its adjoint.
 *
 * Copies share the underlying storage, so a map can be handed to any number
 * of concurrent solver runs.
 */
class LinearMap {
 public:
  using Apply = std::function<Vec(const Vec&)>;

  enum class Kind { kIdentity, kDense, kDiagonal, kCustom };

  static LinearMap identity(Index dim);
  static LinearMap dense(Mat matrix);
  static LinearMap diagonal(Vec diag);
  /// Composed or matrix-free operator; `adjoint` must be the true adjoint of `apply`.
  static LinearMap custom(Index rows, Index cols, Apply apply, Apply adjoint);

  Vec apply(const Vec& x) const;
  Vec adjoint(const Vec& y) const;

  /// Output dimension m.
  Index rows() const { return rows_; }
  /// Input dimension d.
  Index cols() const { return cols_; }
  Kind kind() const { return kind_; }
  bool is_identity() const { return kind_ == Kind::kIdentity; }

  /// Backing matrix for dense maps, nullptr otherwise.
  const Mat* matrix() const { return matrix_.get(); }

 private:
  LinearMap() = default;

  Kind kind_ = Kind::kIdentity;
  Index rows_ = 0;
  Index cols_ = 0;
  std::shared_ptr<const Mat> matrix_;
  std::shared_ptr<const Vec> diag_;
  Apply apply_;
  Apply adjoint_;
};

/// Result of a raw power-iteration run.
struct SpectralEstimate {
  double sigma = 0.0;  ///< estimate of the largest singular value
  int iterations = 0;
};

/// Power iteration on A^T A. Throws Error{kNotConverged} with `last_estimate` set.
SpectralEstimate estimate_spectral_norm(const LinearMap& map, double tol, int max_iter,
                                        std::uint64_t seed = 0x5eedULL);

/**
 * @brief Certified upper bound on ||A||: the power-iteration estimate inflated by (1+tol).
 *
 * The identity map returns exactly 1.
 */
double spectral_norm(const LinearMap& map, double tol = 1e-10, int max_iter = 20000,
                     std::uint64_t seed = 0x5eedULL);

}  // namespace proxsg

#endif  // PROXSG_LINEAR_MAP_HPP_
