#include "proxsg/cs.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "csv.hpp"
#include "proxsg/error.hpp"

namespace proxsg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent seed for a named sub-stream of one instance seed.
std::uint64_t substream(std::uint64_t seed, std::uint32_t stream, std::uint32_t attempt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, attempt};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void require_shape(Index m, Index d, const char* who) {
  if (m <= 0 || d <= 0) throw Error(ErrorCode::kInvalidArgument, std::string(who) + ": dimensions must be positive");
  if (m > d) throw Error(ErrorCode::kInvalidArgument, std::string(who) + ": requires m <= d");
}

bool full_row_rank(const Mat& A) {
  const Mat gram = A * A.transpose();
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) return false;
  const Vec diag = Mat(llt.matrixL()).diagonal();
  return diag.minCoeff() > 1e-10 * diag.maxCoeff();
}

std::vector<Index> sample_without_replacement(Index n, Index k, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(pick(rng))]);
  }
  idx.resize(static_cast<size_t>(k));
  return idx;
}

// Correction r with grad phi(-r) = y componentwise, i.e. the residual A x_g - b that
// balances the regularizer's optimality condition.
Vec stationary_residual(const Vec& y, LossTag loss) {
  if (loss == LossTag::kLeastSquares) return y;
  Vec r(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    if (std::abs(yi) >= 1.0) {
      throw Error(ErrorCode::kNumericalFailure, "stationary b: Lorentzian gradient cannot reach the certificate");
    }
    r[i] = yi == 0.0 ? 0.0 : (1.0 - std::sqrt(1.0 - yi * yi)) / yi;
  }
  return r;
}

// Dual certificate w with A_S^T w = sign(x_S) - alpha x_S / ||x_g||. Returns false when
// the certificate is too large off the support.
bool certificate(const Mat& A, const Vec& x_g, double alpha, double margin, Vec& w) {
  std::vector<Index> support;
  for (Index i = 0; i < x_g.size(); ++i) {
    if (x_g[i] != 0.0) support.push_back(i);
  }
  const Index s = static_cast<Index>(support.size());
  Mat AS(A.rows(), s);
  Vec q(s);
  const double nx = x_g.norm();
  for (Index k = 0; k < s; ++k) {
    const Index j = support[static_cast<size_t>(k)];
    AS.col(k) = A.col(j);
    q[k] = (x_g[j] > 0.0 ? 1.0 : -1.0) - alpha * x_g[j] / nx;
  }
  Eigen::LLT<Mat> llt(AS.transpose() * AS);
  if (llt.info() != Eigen::Success) return false;
  w = AS * llt.solve(q);
  Vec off = (A.transpose() * w).cwiseAbs();
  for (Index j : support) off[j] = 0.0;
  return off.maxCoeff() < margin;
}

std::map<std::string, std::string> read_meta(const std::string& path) {
  std::map<std::string, std::string> meta;
  for (const auto& row : csv::read(path)) {
    if (row.size() != 2) throw Error(ErrorCode::kParse, path + ": expected key,value rows");
    meta[row[0]] = row[1];
  }
  return meta;
}

Vec read_column(const std::string& path) {
  const auto rows = csv::read(path);
  Vec v(static_cast<Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) throw Error(ErrorCode::kParse, path + ": expected one value per line");
    v[static_cast<Index>(i)] = csv::to_double(rows[i][0], path);
  }
  return v;
}

}  // namespace

const char* to_string(MatrixKind kind) { return kind == MatrixKind::kGaussian ? "gaussian" : "dct"; }

const char* to_string(BRule rule) { return rule == BRule::kNoiseless ? "noiseless" : "stationary"; }

MatrixKind parse_matrix_kind(const std::string& s) {
  if (s == "gaussian") return MatrixKind::kGaussian;
  if (s == "dct") return MatrixKind::kDct;
  throw Error(ErrorCode::kParse, "unknown matrix kind '" + s + "'");
}

BRule parse_b_rule(const std::string& s) {
  if (s == "noiseless") return BRule::kNoiseless;
  if (s == "stationary") return BRule::kStationary;
  throw Error(ErrorCode::kParse, "unknown b rule '" + s + "'");
}

LossTag parse_loss_tag(const std::string& s) {
  if (s == "least_squares" || s == "ls") return LossTag::kLeastSquares;
  if (s == "lorentzian") return LossTag::kLorentzian;
  throw Error(ErrorCode::kParse, "unknown loss '" + s + "'");
}

CSCase table_case(int id) {
  static constexpr Index shapes[4][3] = {{180, 640, 20}, {360, 1280, 40}, {720, 2560, 80}, {2880, 10240, 320}};
  if (id < 1 || id > 8) throw Error(ErrorCode::kInvalidArgument, "case id must be in 1..8");
  const int row = (id - 1) % 4;
  return {id, shapes[row][0], shapes[row][1], shapes[row][2], id <= 4 ? MatrixKind::kGaussian : MatrixKind::kDct};
}

Mat gen_gaussian(Index m, Index d, std::uint64_t seed) {
  require_shape(m, d, "gen_gaussian");
  for (std::uint32_t attempt = 0; attempt < 16; ++attempt) {
    std::mt19937_64 rng(attempt == 0 ? seed : substream(seed, 0xA11, attempt));
    std::normal_distribution<double> normal;
    Mat A(m, d);
    // Row-major fill so the stream order does not depend on storage order.
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < d; ++j) A(i, j) = normal(rng);
    }
    if (full_row_rank(A)) return A;
  }
  throw Error(ErrorCode::kNumericalFailure, "gen_gaussian: could not draw a full-row-rank matrix");
}

Mat gen_dct(Index m, Index d, std::uint64_t seed) {
  require_shape(m, d, "gen_dct");
  std::mt19937_64 rng(seed);
  std::vector<Index> rows = sample_without_replacement(d, m, rng);
  std::sort(rows.begin(), rows.end());
  Mat A(m, d);
  const double s0 = std::sqrt(1.0 / static_cast<double>(d));
  const double s1 = std::sqrt(2.0 / static_cast<double>(d));
  for (Index i = 0; i < m; ++i) {
    const Index k = rows[static_cast<size_t>(i)];
    const double scale = k == 0 ? s0 : s1;
    for (Index j = 0; j < d; ++j) {
      // Reduce the argument modulo the period exactly in integers before the cosine.
      const long long num = (static_cast<long long>(2 * j + 1) * k) % (4 * d);
      A(i, j) = scale * std::cos(kPi * static_cast<double>(num) / (2.0 * static_cast<double>(d)));
    }
  }
  return A;
}

Vec gen_ground_truth(Index d, Index s, std::uint64_t seed) {
  if (d <= 0) throw Error(ErrorCode::kInvalidArgument, "gen_ground_truth: d must be positive");
  if (s < 1 || s > d) throw Error(ErrorCode::kInvalidArgument, "gen_ground_truth: s must be in [1, d]");
  std::mt19937_64 rng(seed);
  const std::vector<Index> support = sample_without_replacement(d, s, rng);
  std::normal_distribution<double> normal;
  Vec x = Vec::Zero(d);
  for (Index j : support) {
    double v = 0.0;
    while (v == 0.0) v = normal(rng);
    x[j] = v;
  }
  return x;
}

void CSInstanceOptions::validate() const {
  require_shape(m, d, "CSInstanceOptions");
  if (s < 1 || s > d) throw Error(ErrorCode::kInvalidArgument, "CSInstanceOptions: s must be in [1, d]");
  if (s > m && b_rule == BRule::kStationary) {
    throw Error(ErrorCode::kInvalidArgument, "CSInstanceOptions: stationary b needs s <= m");
  }
  L1L2Regularizer{gamma, alpha}.validate();
  if (!(certificate_margin > 0.0 && certificate_margin <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "CSInstanceOptions: certificate_margin must be in (0, 1]");
  }
  if (max_redraws < 1) throw Error(ErrorCode::kInvalidArgument, "CSInstanceOptions: max_redraws must be positive");
  if (impulsive_noise && !(noise_fraction >= 0.0 && noise_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "CSInstanceOptions: noise_fraction must be in [0, 1]");
  }
}

CSInstanceOptions case_options(int case_id, LossTag loss, std::uint64_t seed) {
  const CSCase c = table_case(case_id);
  CSInstanceOptions o;
  o.kind = c.kind;
  o.m = c.m;
  o.d = c.d;
  o.s = c.s;
  o.loss = loss;
  o.gamma = loss == LossTag::kLeastSquares ? 0.1 : 0.001;
  o.b_rule = loss == LossTag::kLeastSquares ? BRule::kStationary : BRule::kNoiseless;
  o.seed = seed;
  return o;
}

Index CSInstance::sparsity() const { return static_cast<Index>((x_g.array() != 0.0).count()); }

CSInstance make_cs_instance(const CSInstanceOptions& opts) {
  opts.validate();
  const std::uint64_t matrix_seed = substream(opts.seed, 1);
  Mat A = opts.kind == MatrixKind::kGaussian ? gen_gaussian(opts.m, opts.d, matrix_seed)
                                             : gen_dct(opts.m, opts.d, matrix_seed);
  if (opts.kind == MatrixKind::kGaussian && opts.normalize_gaussian) {
    A /= estimate_spectral_norm(LinearMap::dense(A), 1e-12, 100000).sigma;
  }

  CSInstance inst;
  inst.seed = opts.seed;
  inst.kind = opts.kind;
  inst.b_rule = opts.b_rule;
  inst.reg = {opts.gamma, opts.alpha};
  inst.loss.tag = opts.loss;

  int draw = 0;
  for (;; ++draw) {
    if (draw >= opts.max_redraws) {
      throw Error(ErrorCode::kNumericalFailure, "stationary b: no admissible ground truth within max_redraws");
    }
    inst.x_g = gen_ground_truth(opts.d, opts.s, substream(opts.seed, 2, static_cast<std::uint32_t>(draw)));
    inst.b = A * inst.x_g;
    if (opts.b_rule == BRule::kNoiseless) break;
    Vec w;
    if (!certificate(A, inst.x_g, opts.alpha, opts.certificate_margin, w)) continue;
    inst.b -= stationary_residual(-opts.gamma * w, opts.loss);
    break;
  }
  inst.ground_truth_draws = draw + 1;

  if (opts.impulsive_noise) {
    std::mt19937_64 rng(substream(opts.seed, 3));
    std::bernoulli_distribution hit(opts.noise_fraction);
    std::bernoulli_distribution sign(0.5);
    for (Index i = 0; i < inst.b.size(); ++i) {
      if (hit(rng)) inst.b[i] += sign(rng) ? opts.noise_scale : -opts.noise_scale;
    }
  }

  inst.A = LinearMap::dense(std::move(A));
  inst.norm_A = spectral_norm(inst.A);
  inst.loss.b = inst.b;
  return inst;
}

CSInstance make_cs_instance(Mat A, Vec b, Vec x_g, double gamma, LossTag loss) {
  if (A.rows() != b.size() || A.cols() != x_g.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "make_cs_instance: A, b and x_g sizes disagree");
  }
  CSInstance inst;
  inst.reg = {gamma, 1.0};
  inst.reg.validate();
  inst.b = std::move(b);
  inst.x_g = std::move(x_g);
  inst.loss = {loss, inst.b};
  inst.A = LinearMap::dense(std::move(A));
  inst.norm_A = spectral_norm(inst.A);
  return inst;
}

ProblemSpec build_cs_problem(const CSInstance& inst) {
  inst.reg.validate();
  if (inst.loss.b.size() != inst.A.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "build_cs_problem: b does not match A");
  }
  const double gamma = inst.reg.gamma;
  const double ga = gamma * inst.reg.alpha;
  const LossKind loss = inst.loss;

  ProblemSpec spec;
  spec.map_A = inst.A;
  spec.prox_fC = [gamma](const Vec& w, double tau) { return soft_threshold(w, gamma * tau); };
  spec.grad_h = [loss](const Vec& z) { return loss.grad(z); };
  spec.subgrad_g = [ga](const Vec& x) -> Vec { return ga * norm_subgradient(x); };
  spec.value_f = [gamma](const Vec& x) { return gamma * x.lpNorm<1>(); };
  spec.value_h = [loss](const Vec& z) { return loss.value(z); };
  spec.value_g = [ga](const Vec& x) { return ga * x.norm(); };
  spec.lipschitz_ell = loss.ell();
  spec.weak_convexity_beta = 0.0;
  spec.norm_A = inst.norm_A;
  return spec;
}

double ground_truth_error(const Vec& x, const Vec& x_g) {
  if (x.size() != x_g.size()) throw Error(ErrorCode::kDimensionMismatch, "ground_truth_error: size mismatch");
  const double n = x_g.norm();
  if (n == 0.0) throw Error(ErrorCode::kInvalidArgument, "ground_truth_error: zero ground truth");
  return (x - x_g).norm() / n;
}

double lambda_max(const CSInstance& inst) { return inst.norm_A * inst.norm_A; }

BaselineParams gppa_params(const CSInstance& inst, int max_iter) {
  BaselineParams p;
  p.step_tau = 0.8 / (inst.loss.ell() * lambda_max(inst));
  p.max_iter = max_iter;
  p.extrapolation = false;
  return p;
}

BaselineParams pdcae_params(const CSInstance& inst, int max_iter) {
  BaselineParams p;
  p.step_tau = 1.0 / (inst.loss.ell() * lambda_max(inst));
  p.max_iter = max_iter;
  return p;
}

void write_cs_bundle(const CSInstance& inst, const std::string& dir) {
  const Mat* A = inst.A.matrix();
  if (A == nullptr) throw Error(ErrorCode::kInvalidArgument, "write_cs_bundle: only dense maps can be written");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  const std::filesystem::path root(dir);

  std::string text;
  text.reserve(static_cast<size_t>(A->size()) * 24);
  for (Index i = 0; i < A->rows(); ++i) {
    for (Index j = 0; j < A->cols(); ++j) {
      if (j) text += ',';
      text += csv::format((*A)(i, j));
    }
    text += '\n';
  }
  csv::write_file((root / "A.csv").string(), text);

  auto column = [](const Vec& v) {
    std::string t;
    for (Index i = 0; i < v.size(); ++i) t += csv::format(v[i]) + '\n';
    return t;
  };
  csv::write_file((root / "b.csv").string(), column(inst.b));
  csv::write_file((root / "x_g.csv").string(), column(inst.x_g));

  std::ostringstream meta;
  meta << "m," << inst.m() << '\n'
       << "d," << inst.d() << '\n'
       << "s," << inst.sparsity() << '\n'
       << "matrix," << to_string(inst.kind) << '\n'
       << "loss," << to_string(inst.loss.tag) << '\n'
       << "gamma," << csv::format(inst.reg.gamma) << '\n'
       << "alpha," << csv::format(inst.reg.alpha) << '\n'
       << "b_rule," << to_string(inst.b_rule) << '\n'
       << "seed," << inst.seed << '\n';
  csv::write_file((root / "meta.csv").string(), meta.str());
}

CSInstance read_cs_bundle(const std::string& dir) {
  const std::filesystem::path root(dir);
  const auto meta = read_meta((root / "meta.csv").string());
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorCode::kParse, "meta.csv: missing key '" + key + "'");
    return it->second;
  };
  const Index m = csv::to_int(get("m"), "meta.csv m");
  const Index d = csv::to_int(get("d"), "meta.csv d");

  const std::string a_path = (root / "A.csv").string();
  const auto rows = csv::read(a_path);
  if (static_cast<Index>(rows.size()) != m) throw Error(ErrorCode::kParse, "A.csv: expected m rows");
  Mat A(m, d);
  for (Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<size_t>(i)];
    if (static_cast<Index>(row.size()) != d) throw Error(ErrorCode::kParse, "A.csv: expected d columns");
    for (Index j = 0; j < d; ++j) A(i, j) = csv::to_double(row[static_cast<size_t>(j)], a_path);
  }
  Vec b = read_column((root / "b.csv").string());
  Vec x_g = read_column((root / "x_g.csv").string());

  CSInstance inst = make_cs_instance(std::move(A), std::move(b), std::move(x_g),
                                     csv::to_double(get("gamma"), "meta.csv gamma"), parse_loss_tag(get("loss")));
  inst.reg.alpha = csv::to_double(get("alpha"), "meta.csv alpha");
  inst.kind = parse_matrix_kind(get("matrix"));
  inst.b_rule = parse_b_rule(get("b_rule"));
  inst.seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
  if (inst.sparsity() != csv::to_int(get("s"), "meta.csv s")) {
    throw Error(ErrorCode::kParse, "meta.csv: s disagrees with x_g");
  }
  return inst;
}

}  // namespace proxsg
