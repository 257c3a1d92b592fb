#ifndef PROXSG_POLYHEDRAL_HPP_
#define PROXSG_POLYHEDRAL_HPP_

#include <vector>

#include "proxsg/linear_map.hpp"

namespace proxsg {

/// S = { x : E x = e, G x <= g, lo <= x <= hi }. Infinite bounds are allowed.
struct PolyhedralSet {
  Mat eq_mat;
  Vec eq_rhs;
  Mat ineq_mat;
  Vec ineq_rhs;
  Vec lo;
  Vec hi;

  /// Unconstrained box of dimension n with no rows.
  static PolyhedralSet free_space(Index n);

  Index dim() const { return lo.size(); }
  void validate() const;

  struct Residuals {
    double eq = 0.0;    ///< max |E x - e|
    double ineq = 0.0;  ///< max (G x - g)_+
    double box = 0.0;   ///< max distance outside [lo, hi]
    double max() const;
  };
  Residuals residuals(const Vec& x) const;
  bool contains(const Vec& x, double tol) const { return residuals(x).max() <= tol; }
};

/// KKT residuals of min ||x - w||^2 / 2 over S, on unit-normalized rows.
struct KktResiduals {
  double primal = 0.0;
  double stationarity = 0.0;  ///< relative to 1 + ||x - w||_inf
  double complementarity = 0.0;
  double dual_sign = 0.0;
  double max() const;
};

struct ProjectionResult {
  Vec x;
  KktResiduals kkt;
  int iterations = 0;
  int active_constraints = 0;
};

/**
 * @brief Euclidean projection onto a fixed polyhedron.
 *
 * Dual active-set method (Goldfarb-Idnani) for the identity Hessian. Rows are
 * normalized to unit length; the orthogonal factorization of the equality
 * rows is computed once at construction and reused by every call.
 * `project` is const and allocates its own workspace, so a projector can be
 * shared across threads.
 */
class PolytopeProjector {
 public:
  explicit PolytopeProjector(PolyhedralSet set);

  /// Throws Error{kInfeasible} ("empty polyhedron") or Error{kNotConverged}.
  ProjectionResult project(const Vec& w, double tol = 1e-8) const;

  const PolyhedralSet& set() const { return set_; }
  Index dim() const { return set_.dim(); }

 private:
  PolyhedralSet set_;
  Mat normals_;  ///< one unit column per constraint, equalities first
  Vec offsets_;  ///< constraint is normals_.col(i) . x >= offsets_[i] (== for equalities)
  Index n_eq_ = 0;
  Mat J0_;       ///< orthogonal factor after the equality phase
  Mat R0_;       ///< upper-triangular factor, n_eq_ x n_eq_
  bool eq_infeasible_ = false;
};

ProjectionResult project(const PolyhedralSet& set, const Vec& w, double tol = 1e-8);

/// Some x in S with all residuals <= tol; throws Error{kInfeasible} when S is empty.
Vec feasible_point(const PolyhedralSet& set, double tol = 1e-8);

}  // namespace proxsg

#endif  // PROXSG_POLYHEDRAL_HPP_
