#ifndef PROXSG_CS_HPP_
#define PROXSG_CS_HPP_

#include <cstdint>
#include <string>

#include "proxsg/baselines.hpp"
#include "proxsg/problem.hpp"
#include "proxsg/prox.hpp"

namespace proxsg {

enum class MatrixKind { kGaussian, kDct };

/// How the measurement vector b is produced from x_g.
enum class BRule {
  kNoiseless,   ///< b = A x_g
  kStationary,  ///< b = A x_g - r, chosen so that x_g is a critical point of the regularized problem
};

const char* to_string(MatrixKind kind);
const char* to_string(BRule rule);
MatrixKind parse_matrix_kind(const std::string& s);
BRule parse_b_rule(const std::string& s);
LossTag parse_loss_tag(const std::string& s);

/// One row of the benchmark case table.
struct CSCase {
  int id = 0;
  Index m = 0;
  Index d = 0;
  Index s = 0;
  MatrixKind kind = MatrixKind::kGaussian;
};

/// Cases 1-4 are Gaussian, 5-8 the same shapes with partial DCT. Throws for ids outside 1..8.
CSCase table_case(int id);

/// i.i.d. N(0,1) entries from mt19937_64; regenerated until A A^T is numerically nonsingular.
Mat gen_gaussian(Index m, Index d, std::uint64_t seed);

/// m distinct rows of the orthonormal d x d DCT-II matrix, sampled uniformly and kept in increasing order.
Mat gen_dct(Index m, Index d, std::uint64_t seed);

/// s-sparse vector: uniform support without replacement, N(0,1) values (exactly s nonzeros).
Vec gen_ground_truth(Index d, Index s, std::uint64_t seed);

struct CSInstanceOptions {
  MatrixKind kind = MatrixKind::kGaussian;
  Index m = 180;
  Index d = 640;
  Index s = 20;
  double gamma = 0.1;
  double alpha = 1.0;
  LossTag loss = LossTag::kLeastSquares;
  BRule b_rule = BRule::kStationary;
  std::uint64_t seed = 0;
  /// Divide Gaussian matrices by their spectral norm.
  bool normalize_gaussian = true;
  /// Sparse impulsive spikes added to b after the b rule.
  bool impulsive_noise = false;
  double noise_fraction = 0.05;
  double noise_scale = 1.0;
  /// Largest admissible |A_j^T w| off the support for the stationary rule.
  double certificate_margin = 0.99;
  int max_redraws = 200;

  void validate() const;
};

/// Defaults for a case-table row: gamma 0.1 (least squares) or 0.001 (Lorentzian).
CSInstanceOptions case_options(int case_id, LossTag loss, std::uint64_t seed);

struct CSInstance {
  LinearMap A = LinearMap::identity(1);
  Vec b;
  Vec x_g;
  L1L2Regularizer reg;
  LossKind loss;
  std::uint64_t seed = 0;
  MatrixKind kind = MatrixKind::kGaussian;
  BRule b_rule = BRule::kStationary;
  double norm_A = 1.0;  ///< certified upper bound on ||A||
  int ground_truth_draws = 1;

  Index m() const { return A.rows(); }
  Index d() const { return A.cols(); }
  Index sparsity() const;
};

CSInstance make_cs_instance(const CSInstanceOptions& opts);

/// Wraps an externally supplied (A, b, x_g); computes the certified norm.
CSInstance make_cs_instance(Mat A, Vec b, Vec x_g, double gamma, LossTag loss);

/// f = gamma ||.||_1, h = loss, g = gamma alpha ||.||, C = R^d, beta = 0.
ProblemSpec build_cs_problem(const CSInstance& inst);

/// ||x - x_g|| / ||x_g||. Throws when x_g = 0.
double ground_truth_error(const Vec& x, const Vec& x_g);

/// lambda_max(A^T A) bound from the certified norm.
double lambda_max(const CSInstance& inst);

/// GPPA: 0.8 / (ell lambda_max); pDCAe: 1 / (ell lambda_max).
BaselineParams gppa_params(const CSInstance& inst, int max_iter);
BaselineParams pdcae_params(const CSInstance& inst, int max_iter);

/// A.csv (m rows, d columns), b.csv, x_g.csv (one value per line), meta.csv (key,value).
void write_cs_bundle(const CSInstance& inst, const std::string& dir);
CSInstance read_cs_bundle(const std::string& dir);

}  // namespace proxsg

#endif  // PROXSG_CS_HPP_
