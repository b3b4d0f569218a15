#pragma once

// Log-log performance models: ln(target) = sum_j coef_j * ln(feature_j) + intercept,
// fit by full-batch gradient descent on standardized features, with an exact
// least-squares solve as the reference.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelab/bench.hpp"
#include "bridgelab/game.hpp"

namespace bridgelab {

enum class Feature { d, t, b };
enum class TargetKind { rollouts, expansions };  // r, e

inline const std::vector<Feature>& all_features() {
  static const std::vector<Feature> f = {Feature::d, Feature::t, Feature::b};
  return f;
}

inline char feature_letter(Feature f) { return f == Feature::d ? 'd' : (f == Feature::t ? 't' : 'b'); }
inline char target_letter(TargetKind k) { return k == TargetKind::rollouts ? 'r' : 'e'; }

inline Feature parse_feature(std::string_view s) {
  if (s == "d") return Feature::d;
  if (s == "t") return Feature::t;
  if (s == "b") return Feature::b;
  throw std::invalid_argument("unknown feature '" + std::string(s) + "' (expected d, t or b)");
}

inline std::vector<Feature> parse_features(std::string_view list) {
  std::vector<Feature> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    auto f = parse_feature(list.substr(0, comma));
    if (std::find(out.begin(), out.end(), f) != out.end()) throw std::invalid_argument("duplicate feature");
    out.push_back(f);
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("no features given");
  return out;
}

inline TargetKind parse_target(std::string_view s) {
  if (s == "r") return TargetKind::rollouts;
  if (s == "e") return TargetKind::expansions;
  throw std::invalid_argument("unknown target '" + std::string(s) + "' (expected r or e)");
}

inline double feature_value(const ComplexityProfile& p, Feature f) {
  return f == Feature::d ? p.d : (f == Feature::t ? p.t : p.b);
}

class RegressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficient : public RegressionError {
 public:
  using RegressionError::RegressionError;
};

class Divergence : public RegressionError {
 public:
  using RegressionError::RegressionError;
};

struct DataRow {
  ComplexityProfile features;
  double target = 0.0;  // counts per second
  GameId game;
};

struct Dataset {
  std::vector<DataRow> rows;
  TargetKind target_kind = TargetKind::rollouts;
};

struct RegressionModel {
  TargetKind target_kind = TargetKind::rollouts;
  std::vector<Feature> features_used;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double mse_train = 0.0;
  std::optional<double> mse_test;
  bool degenerate = false;  // pruning removed every feature; the strongest was kept

  double coefficient(Feature f) const {
    for (std::size_t i = 0; i < features_used.size(); ++i) {
      if (features_used[i] == f) return coefficients[i];
    }
    return 0.0;
  }
  bool uses(Feature f) const { return std::find(features_used.begin(), features_used.end(), f) != features_used.end(); }
};

struct GdConfig {
  double learning_rate = 0.01;
  std::uint64_t max_iterations = 200'000;
  double tolerance = 1e-12;  // on the per-step loss decrease
  bool standardize = true;
};

namespace detail {

struct Design {
  Eigen::MatrixXd x;  // n x p, log features
  Eigen::VectorXd y;  // n, log target
};

inline Design design(const Dataset& ds, const std::vector<Feature>& features) {
  if (features.empty()) throw std::invalid_argument("at least one feature is required");
  if (ds.rows.size() < 2) throw RegressionError("need at least two rows to fit");
  Design d{Eigen::MatrixXd(static_cast<Eigen::Index>(ds.rows.size()), static_cast<Eigen::Index>(features.size())),
           Eigen::VectorXd(static_cast<Eigen::Index>(ds.rows.size()))};
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& row = ds.rows[i];
    if (!(row.target > 0.0)) throw RegressionError("target must be positive (row " + std::to_string(i) + ")");
    d.y(static_cast<Eigen::Index>(i)) = std::log(row.target);
    for (std::size_t j = 0; j < features.size(); ++j) {
      const double v = feature_value(row.features, features[j]);
      if (!(v > 0.0)) {
        throw RegressionError(std::string("feature ") + feature_letter(features[j]) + " must be positive (row " +
                              std::to_string(i) + ")");
      }
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::log(v);
    }
  }
  return d;
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a << x, Eigen::VectorXd::Ones(x.rows());
  return a;
}

inline void require_full_rank(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd a = with_intercept(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < a.cols()) {
    throw RankDeficient("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(a.cols()) + ")");
  }
}

inline double mse_of(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double b) {
  const Eigen::VectorXd r = (x * w).array() + b - y.array();
  return r.squaredNorm() / static_cast<double>(y.size());
}

}  // namespace detail

inline double predict_log(const RegressionModel& m, const ComplexityProfile& p) {
  double v = m.intercept;
  for (std::size_t j = 0; j < m.features_used.size(); ++j) {
    const double f = feature_value(p, m.features_used[j]);
    if (!(f > 0.0)) throw RegressionError(std::string("feature ") + feature_letter(m.features_used[j]) + " must be positive");
    v += m.coefficients[j] * std::log(f);
  }
  return v;
}

struct Prediction {
  double ln_target = 0.0;
  double target = 0.0;
};

inline Prediction predict(const RegressionModel& m, const ComplexityProfile& p) {
  const double ln = predict_log(m, p);
  return {ln, std::exp(ln)};
}

// Mean squared error in log space.
inline double mse(const RegressionModel& m, const Dataset& ds) {
  if (ds.rows.empty()) throw RegressionError("mse of an empty dataset");
  double ss = 0.0;
  for (const auto& row : ds.rows) {
    const double r = predict_log(m, row.features) - std::log(row.target);
    ss += r * r;
  }
  return ss / static_cast<double>(ds.rows.size());
}

// Exact least-squares minimizer.
inline RegressionModel fit_ols(const Dataset& ds, const std::vector<Feature>& features) {
  const auto d = detail::design(ds, features);
  detail::require_full_rank(d.x);
  const Eigen::MatrixXd a = detail::with_intercept(d.x);
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(d.y);
  RegressionModel m;
  m.target_kind = ds.target_kind;
  m.features_used = features;
  for (std::size_t j = 0; j < features.size(); ++j) m.coefficients.push_back(sol(static_cast<Eigen::Index>(j)));
  m.intercept = sol(static_cast<Eigen::Index>(features.size()));
  m.mse_train = mse(m, ds);
  return m;
}

// Fit result in standardized coordinates, kept for pruning decisions.
struct GdFit {
  RegressionModel model;
  std::vector<double> standardized;  // coefficient per unit standard deviation of ln(feature)
  std::uint64_t iterations = 0;
};

inline GdFit fit_gd_detailed(const Dataset& ds, const std::vector<Feature>& features, const GdConfig& cfg = {}) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.tolerance > 0.0)) {
    throw std::invalid_argument("learning rate and tolerance must be positive");
  }
  const auto d = detail::design(ds, features);
  detail::require_full_rank(d.x);
  const auto n = d.x.rows();
  const auto p = d.x.cols();

  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p);
  Eigen::RowVectorXd scale = Eigen::RowVectorXd::Ones(p);
  if (cfg.standardize) {
    mean = d.x.colwise().mean();
    for (Eigen::Index j = 0; j < p; ++j) {
      scale(j) = std::sqrt((d.x.col(j).array() - mean(j)).square().sum() / static_cast<double>(n));
    }
  }
  const Eigen::MatrixXd z = (d.x.rowwise() - mean).array().rowwise() / scale.array();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double b = d.y.mean();
  double loss = detail::mse_of(z, d.y, w, b);
  int rising = 0;
  std::uint64_t it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const Eigen::VectorXd r = (z * w).array() + b - d.y.array();
    const Eigen::VectorXd grad_w = (2.0 / static_cast<double>(n)) * (z.transpose() * r);
    const double grad_b = 2.0 * r.mean();
    w -= cfg.learning_rate * grad_w;
    b -= cfg.learning_rate * grad_b;
    const double next = detail::mse_of(z, d.y, w, b);
    if (!std::isfinite(next)) throw Divergence("gradient descent diverged (non-finite loss)");
    if (next > loss) {
      if (++rising >= 100) throw Divergence("gradient descent diverged (loss rose for 100 consecutive steps)");
    } else {
      rising = 0;
    }
    const double delta = loss - next;
    loss = next;
    if (delta >= 0.0 && delta < cfg.tolerance) {
      ++it;
      break;
    }
  }

  GdFit fit;
  fit.iterations = it;
  auto& m = fit.model;
  m.target_kind = ds.target_kind;
  m.features_used = features;
  m.intercept = b;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double coef = w(j) / scale(j);
    m.coefficients.push_back(coef);
    m.intercept -= coef * mean(j);
    fit.standardized.push_back(coef * std::sqrt((d.x.col(j).array() - d.x.col(j).mean()).square().sum() /
                                                static_cast<double>(n)));
  }
  m.mse_train = mse(m, ds);
  return fit;
}

inline RegressionModel fit_gd(const Dataset& ds, const std::vector<Feature>& features, const GdConfig& cfg = {}) {
  return fit_gd_detailed(ds, features, cfg).model;
}

// Fits on `features`, drops every feature whose standardized coefficient is
// below `threshold` in magnitude and refits, until nothing more is dropped.
// If everything would go, the strongest feature is kept and the model is
// flagged degenerate.
inline RegressionModel prune_refit(const Dataset& ds, const GdConfig& cfg = {}, double threshold = 0.05,
                                   std::vector<Feature> features = all_features()) {
  for (;;) {
    auto fit = fit_gd_detailed(ds, features, cfg);
    std::vector<Feature> keep;
    for (std::size_t j = 0; j < features.size(); ++j) {
      if (std::abs(fit.standardized[j]) >= threshold) keep.push_back(features[j]);
    }
    if (keep.size() == features.size()) return fit.model;
    if (keep.empty()) {
      std::size_t strongest = 0;
      for (std::size_t j = 1; j < features.size(); ++j) {
        if (std::abs(fit.standardized[j]) > std::abs(fit.standardized[strongest])) strongest = j;
      }
      auto m = fit_gd(ds, {features[strongest]}, cfg);
      m.degenerate = true;
      return m;
    }
    features = std::move(keep);
  }
}

// Builds a dataset from bench records of one algorithm and backend. Records
// without a complexity profile are skipped.
inline Dataset dataset_from_records(const std::vector<BenchRecord>& records, TargetKind kind, BackendKind backend) {
  Dataset ds;
  ds.target_kind = kind;
  const auto algorithm = kind == TargetKind::rollouts ? Algorithm::uct : Algorithm::minimax;
  for (const auto& r : records) {
    if (r.algorithm != algorithm || r.backend != backend || !r.profile) continue;
    ds.rows.push_back({*r.profile, r.normalized_mean, r.game});
  }
  return ds;
}

// Splits rows whose game name appears in `held_out` into the second dataset.
inline std::pair<Dataset, Dataset> split_by_game(const Dataset& ds, const std::vector<GameId>& held_out) {
  Dataset train{{}, ds.target_kind};
  Dataset test{{}, ds.target_kind};
  for (const auto& row : ds.rows) {
    const bool out = std::find(held_out.begin(), held_out.end(), row.game) != held_out.end();
    (out ? test : train).rows.push_back(row);
  }
  return {train, test};
}

// ---------------------------------------------------------------------------
// Model files: '#' comment lines then key=value records.
//
//   target=r
//   features=d,t
//   coef.d=-0.946
//   coef.t=-0.492
//   intercept=6.291
//   mse_train=0.0357
//   mse_test=0.028        (optional)
//   degenerate=0          (optional)

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_model(const RegressionModel& m, std::ostream& out, const std::string& invocation = "") {
  if (!invocation.empty()) out << "# " << invocation << '\n';
  out << "target=" << target_letter(m.target_kind) << '\n';
  out << "features=";
  for (std::size_t j = 0; j < m.features_used.size(); ++j) out << (j ? "," : "") << feature_letter(m.features_used[j]);
  out << '\n';
  for (std::size_t j = 0; j < m.features_used.size(); ++j) {
    out << "coef." << feature_letter(m.features_used[j]) << '=' << format_double(m.coefficients[j]) << '\n';
  }
  out << "intercept=" << format_double(m.intercept) << '\n';
  out << "mse_train=" << format_double(m.mse_train) << '\n';
  if (m.mse_test) out << "mse_test=" << format_double(*m.mse_test) << '\n';
  out << "degenerate=" << (m.degenerate ? 1 : 0) << '\n';
}

inline RegressionModel read_model(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw RegressionError("model line " + std::to_string(lineno) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw RegressionError("model file has no '" + k + "'");
    return it->second;
  };
  auto number = [&](const std::string& k) {
    const auto& v = need(k);
    try {
      std::size_t used = 0;
      double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw RegressionError("model key '" + k + "' is not a number: " + v);
    }
  };
  RegressionModel m;
  m.target_kind = parse_target(need("target"));
  m.features_used = parse_features(need("features"));
  for (auto f : m.features_used) m.coefficients.push_back(number(std::string("coef.") + feature_letter(f)));
  m.intercept = number("intercept");
  if (kv.count("mse_train")) m.mse_train = number("mse_train");
  if (kv.count("mse_test")) m.mse_test = number("mse_test");
  m.degenerate = kv.count("degenerate") && kv["degenerate"] == "1";
  return m;
}

inline void save_model(const RegressionModel& m, const std::string& path, const std::string& invocation = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_model(m, out, invocation);
}

inline RegressionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_model(in);
}

}  // namespace bridgelab
