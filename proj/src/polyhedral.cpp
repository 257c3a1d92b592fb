#include "proxsg/polyhedral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "proxsg/error.hpp"

namespace proxsg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// ||z||^2 below this means the new normal lies in the span of the active ones.
constexpr double kSpanTol = 1e-14;
constexpr double kRankTol = 1e-12;

/// Mutable state of one dual active-set solve.
struct Workspace {
  Mat J;
  Mat R;
  Vec u;                    ///< multipliers; u[iq] belongs to the candidate constraint
  std::vector<Index> act;   ///< constraint index per active slot; act[iq] is the candidate
  Index iq = 0;
  double r_norm = 1.0;
};

/// Rotates d = J^T n into [R(:,iq); 0] and appends it as active column iq.
bool add_constraint(Workspace& ws, Vec& d) {
  const Index n = ws.J.rows();
  for (Index j = n - 1; j >= ws.iq + 1; --j) {
    double cc = d[j - 1];
    double ss = d[j];
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d[j] = 0.0;
    cc /= h;
    ss /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d[j - 1] = -h;
    } else {
      d[j - 1] = h;
    }
    const double xny = ss / (1.0 + cc);
    const Vec t1 = ws.J.col(j - 1);
    const Vec t2 = ws.J.col(j);
    ws.J.col(j - 1) = cc * t1 + ss * t2;
    ws.J.col(j) = xny * (t1 + ws.J.col(j - 1)) - t2;
  }
  const Index col = ws.iq;
  if (std::abs(d[col]) <= kRankTol * ws.r_norm) return false;
  ws.R.col(col).head(col + 1) = d.head(col + 1);
  ws.r_norm = std::max(ws.r_norm, std::abs(d[col]));
  ++ws.iq;
  return true;
}

/// Removes active slot `slot` and restores the triangular factor.
void delete_constraint(Workspace& ws, Index slot) {
  const Index n = ws.J.rows();
  for (Index i = slot; i < ws.iq - 1; ++i) {
    ws.act[i] = ws.act[i + 1];
    ws.u[i] = ws.u[i + 1];
    ws.R.col(i) = ws.R.col(i + 1);
  }
  // The candidate slot moves down with the rest.
  ws.act[ws.iq - 1] = ws.act[ws.iq];
  ws.u[ws.iq - 1] = ws.u[ws.iq];
  ws.act[ws.iq] = -1;
  ws.u[ws.iq] = 0.0;
  ws.R.col(ws.iq - 1).setZero();
  --ws.iq;
  if (ws.iq == 0) return;

  for (Index j = slot; j < ws.iq; ++j) {
    double cc = ws.R(j, j);
    double ss = ws.R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    ws.R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      ws.R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      ws.R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (Index k = j + 1; k < ws.iq; ++k) {
      const double t1 = ws.R(j, k);
      const double t2 = ws.R(j + 1, k);
      ws.R(j, k) = t1 * cc + t2 * ss;
      ws.R(j + 1, k) = xny * (t1 + ws.R(j, k)) - t2;
    }
    const Vec t1 = ws.J.col(j);
    const Vec t2 = ws.J.col(j + 1);
    ws.J.col(j) = cc * t1 + ss * t2;
    ws.J.col(j + 1) = xny * (ws.J.col(j) + t1) - t2;
  }
  (void)n;
}

Error empty_polyhedron(const std::string& detail) {
  return Error(ErrorCode::kInfeasible, "empty polyhedron: " + detail);
}

}  // namespace

PolyhedralSet PolyhedralSet::free_space(Index n) {
  PolyhedralSet s;
  s.eq_mat = Mat(0, n);
  s.eq_rhs = Vec(0);
  s.ineq_mat = Mat(0, n);
  s.ineq_rhs = Vec(0);
  s.lo = Vec::Constant(n, -kInf);
  s.hi = Vec::Constant(n, kInf);
  return s;
}

void PolyhedralSet::validate() const {
  const Index n = dim();
  if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "PolyhedralSet: dimension must be positive");
  if (hi.size() != n || eq_mat.cols() != n || ineq_mat.cols() != n || eq_mat.rows() != eq_rhs.size() ||
      ineq_mat.rows() != ineq_rhs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "PolyhedralSet: inconsistent row or column dimensions");
  }
  for (Index i = 0; i < n; ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i]) {
      throw Error(ErrorCode::kInvalidArgument, "PolyhedralSet: lo <= hi violated");
    }
  }
}

double PolyhedralSet::Residuals::max() const { return std::max({eq, ineq, box}); }

PolyhedralSet::Residuals PolyhedralSet::residuals(const Vec& x) const {
  if (x.size() != dim()) throw Error(ErrorCode::kDimensionMismatch, "PolyhedralSet::residuals: wrong dimension");
  Residuals r;
  if (eq_mat.rows() > 0) r.eq = (eq_mat * x - eq_rhs).cwiseAbs().maxCoeff();
  if (ineq_mat.rows() > 0) r.ineq = std::max(0.0, (ineq_mat * x - ineq_rhs).maxCoeff());
  for (Index i = 0; i < x.size(); ++i) {
    r.box = std::max({r.box, lo[i] - x[i], x[i] - hi[i]});
  }
  return r;
}

double KktResiduals::max() const { return std::max({primal, stationarity, complementarity, dual_sign}); }

PolytopeProjector::PolytopeProjector(PolyhedralSet set) : set_(std::move(set)) {
  set_.validate();
  const Index n = set_.dim();

  std::vector<Vec> cols;
  std::vector<double> offs;
  auto push_row = [&](const Vec& row, double rhs, bool equality) {
    const double nrm = row.norm();
    if (nrm == 0.0) {
      const bool ok = equality ? rhs == 0.0 : rhs <= 0.0;
      if (!ok) eq_infeasible_ = true;
      return;
    }
    cols.push_back(row / nrm);
    offs.push_back(rhs / nrm);
  };

  for (Index i = 0; i < set_.eq_mat.rows(); ++i) push_row(set_.eq_mat.row(i).transpose(), set_.eq_rhs[i], true);
  n_eq_ = static_cast<Index>(cols.size());
  // G x <= g  <=>  -G x >= -g
  for (Index i = 0; i < set_.ineq_mat.rows(); ++i) {
    push_row(-set_.ineq_mat.row(i).transpose(), -set_.ineq_rhs[i], false);
  }
  for (Index k = 0; k < n; ++k) {
    if (std::isfinite(set_.lo[k])) {
      Vec e = Vec::Zero(n);
      e[k] = 1.0;
      cols.push_back(e);
      offs.push_back(set_.lo[k]);
    }
    if (std::isfinite(set_.hi[k])) {
      Vec e = Vec::Zero(n);
      e[k] = -1.0;
      cols.push_back(e);
      offs.push_back(-set_.hi[k]);
    }
  }

  normals_.resize(n, static_cast<Index>(cols.size()));
  offsets_.resize(static_cast<Index>(offs.size()));
  for (size_t i = 0; i < cols.size(); ++i) {
    normals_.col(static_cast<Index>(i)) = cols[i];
    offsets_[static_cast<Index>(i)] = offs[i];
  }

  if (n_eq_ > n) throw Error(ErrorCode::kInvalidArgument, "PolyhedralSet: more equalities than variables");

  // Equality phase: J, R depend only on the normals.
  Workspace ws;
  ws.J = Mat::Identity(n, n);
  ws.R = Mat::Zero(n, n);
  ws.u = Vec::Zero(n + 1);
  ws.act.assign(static_cast<size_t>(n + 1), -1);
  for (Index i = 0; i < n_eq_; ++i) {
    Vec d = ws.J.transpose() * normals_.col(i);
    if (!add_constraint(ws, d)) {
      throw Error(ErrorCode::kInvalidArgument, "PolyhedralSet: equality rows are linearly dependent");
    }
  }
  J0_ = std::move(ws.J);
  R0_ = ws.R.topLeftCorner(n_eq_, n_eq_);
}

ProjectionResult PolytopeProjector::project(const Vec& w, double tol) const {
  const Index n = set_.dim();
  if (w.size() != n) throw Error(ErrorCode::kDimensionMismatch, "project: wrong dimension");
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "project: tol must be positive");
  if (!w.allFinite()) throw Error(ErrorCode::kNumericalFailure, "project: non-finite input");
  if (eq_infeasible_) throw empty_polyhedron("a zero row has an unsatisfiable right-hand side");

  const Index m = normals_.cols();
  Workspace ws;
  ws.J = J0_;
  ws.R = Mat::Zero(n, n);
  ws.R.topLeftCorner(n_eq_, n_eq_) = R0_;
  ws.u = Vec::Zero(n + 1);
  ws.act.assign(static_cast<size_t>(n + 1), -1);
  ws.iq = n_eq_;
  for (Index i = 0; i < n_eq_; ++i) ws.act[static_cast<size_t>(i)] = i;
  if (n_eq_ > 0) ws.r_norm = std::max(1.0, R0_.diagonal().cwiseAbs().maxCoeff());

  // Affine projection onto the equalities: x = w + J1 y,  R^T y = e - N^T w,  u = R^{-1} y.
  Vec x = w;
  if (n_eq_ > 0) {
    const Vec resid = offsets_.head(n_eq_) - normals_.leftCols(n_eq_).transpose() * w;
    const auto r_tri = R0_.triangularView<Eigen::Upper>();
    const Vec y = r_tri.transpose().solve(resid);
    x += J0_.leftCols(n_eq_) * y;
    ws.u.head(n_eq_) = r_tri.solve(y);
  }

  std::vector<char> is_active(static_cast<size_t>(m), 0);
  std::vector<char> excluded(static_cast<size_t>(m), 0);
  for (Index i = 0; i < n_eq_; ++i) is_active[static_cast<size_t>(i)] = 1;

  const int max_iter = static_cast<int>(10 * (n + m) + 100);
  int iter = 0;
  for (;;) {
    if (++iter > max_iter) {
      Error err(ErrorCode::kNotConverged, "project: active-set iteration cap reached");
      err.iteration = iter;
      throw err;
    }
    // Most violated inactive inequality.
    Index p = -1;
    double s_p = 0.0;
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    for (Index i = n_eq_; i < m; ++i) {
      if (is_active[static_cast<size_t>(i)] || excluded[static_cast<size_t>(i)]) continue;
      const double s = normals_.col(i).dot(x) - offsets_[i];
      if (s < -1e-14 * scale && s < s_p) {
        s_p = s;
        p = i;
      }
    }
    if (p < 0) break;

    const auto np = normals_.col(p);
    ws.act[static_cast<size_t>(ws.iq)] = p;
    ws.u[ws.iq] = 0.0;

    bool added = false;
    while (!added) {
      Vec d = ws.J.transpose() * np;
      const Index iq = ws.iq;
      const Vec z = ws.J.rightCols(n - iq) * d.tail(n - iq);
      Vec r = Vec::Zero(iq);
      if (iq > 0) r = ws.R.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(d.head(iq));

      // Partial step: largest dual move keeping active inequality multipliers >= 0.
      double t1 = kInf;
      Index drop = -1;
      for (Index k = n_eq_; k < iq; ++k) {
        if (r[k] > 0.0) {
          const double ratio = ws.u[k] / r[k];
          if (ratio < t1) {
            t1 = ratio;
            drop = k;
          }
        }
      }
      const double zz = z.squaredNorm();
      const double t2 = zz > kSpanTol ? -s_p / z.dot(np) : kInf;
      const double t = std::min(t1, t2);
      if (t == kInf) throw empty_polyhedron("no primal or dual step restores a violated constraint");

      if (t2 == kInf) {
        // Dual step only.
        ws.u.head(iq) -= t * r;
        ws.u[iq] += t;
        is_active[static_cast<size_t>(ws.act[static_cast<size_t>(drop)])] = 0;
        delete_constraint(ws, drop);
        continue;
      }

      x += t * z;
      ws.u.head(iq) -= t * r;
      ws.u[iq] += t;

      if (t2 <= t1) {
        if (!add_constraint(ws, d)) {
          // Numerically dependent on the active set; leave it out of this solve.
          excluded[static_cast<size_t>(p)] = 1;
          ws.u[iq] = 0.0;
          ws.act[static_cast<size_t>(iq)] = -1;
        } else {
          is_active[static_cast<size_t>(p)] = 1;
        }
        added = true;
      } else {
        is_active[static_cast<size_t>(ws.act[static_cast<size_t>(drop)])] = 0;
        delete_constraint(ws, drop);
        s_p = np.dot(x) - offsets_[p];
      }
    }
  }

  ProjectionResult out;
  out.iterations = iter;
  out.active_constraints = static_cast<int>(ws.iq);

  KktResiduals& kkt = out.kkt;
  Vec station = x - w;
  for (Index k = 0; k < ws.iq; ++k) {
    const Index c = ws.act[static_cast<size_t>(k)];
    const double s = normals_.col(c).dot(x) - offsets_[c];
    station -= ws.u[k] * normals_.col(c);
    kkt.complementarity = std::max(kkt.complementarity, std::abs(ws.u[k] * s));
    if (k >= n_eq_) kkt.dual_sign = std::max(kkt.dual_sign, -ws.u[k]);
  }
  for (Index i = 0; i < m; ++i) {
    const double s = normals_.col(i).dot(x) - offsets_[i];
    kkt.primal = std::max(kkt.primal, i < n_eq_ ? std::abs(s) : std::max(0.0, -s));
  }
  kkt.stationarity = station.cwiseAbs().maxCoeff() / (1.0 + (x - w).cwiseAbs().maxCoeff());

  if (kkt.max() > tol) {
    std::ostringstream msg;
    msg << "project: KKT residuals above tolerance (primal " << kkt.primal << ", stationarity "
        << kkt.stationarity << ", complementarity " << kkt.complementarity << ", dual sign " << kkt.dual_sign
        << ")";
    throw Error(ErrorCode::kNotConverged, msg.str());
  }
  out.x = std::move(x);
  return out;
}

ProjectionResult project(const PolyhedralSet& set, const Vec& w, double tol) {
  return PolytopeProjector(set).project(w, tol);
}

Vec feasible_point(const PolyhedralSet& set, double tol) {
  set.validate();
  // Start from the box midpoint where both bounds are finite, else the nearest bound or 0.
  Vec w(set.dim());
  for (Index i = 0; i < set.dim(); ++i) {
    const double lo = set.lo[i];
    const double hi = set.hi[i];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      w[i] = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      w[i] = std::max(lo, 0.0);
    } else if (std::isfinite(hi)) {
      w[i] = std::min(hi, 0.0);
    } else {
      w[i] = 0.0;
    }
  }
  Vec x = project(set, w, tol).x;
  const auto res = set.residuals(x);
  if (res.max() > tol) {
    std::ostringstream msg;
    msg << "feasible_point: possibly infeasible (residual " << res.max() << ")";
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
  return x;
}

}  // namespace proxsg
