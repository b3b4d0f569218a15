#pragma once

// CSV records for throughput benchmarks and the plain-text result tables
// (score tables and model tables, each with a CSV twin).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelab/bench.hpp"
#include "bridgelab/regress.hpp"

namespace bridgelab {

class CsvError : public std::runtime_error {
 public:
  CsvError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

inline const std::vector<std::string>& bench_csv_columns() {
  static const std::vector<std::string> cols = {"game",   "algorithm",       "backend", "budget_s", "trials",
                                                "normalized_mean", "stddev", "ci99_half_width", "d", "t", "b",
                                                "raw_counts"};
  return cols;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line, int lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw CsvError(lineno, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

inline double parse_double_field(const std::string& s, int lineno, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CsvError(lineno, "column " + column + ": not a number: '" + s + "'");
  }
}

inline std::uint64_t parse_u64_field(const std::string& s, int lineno, const std::string& column) {
  try {
    std::size_t used = 0;
    if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CsvError(lineno, "column " + column + ": not a non-negative integer: '" + s + "'");
  }
}

}  // namespace detail

inline void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out,
                            const std::string& invocation = "") {
  if (!invocation.empty()) out << "# " << invocation << '\n';
  const auto& cols = bench_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << detail::csv_field(r.game.to_string()) << ',' << to_string(r.algorithm) << ',' << to_string(r.backend) << ','
        << format_double(r.budget_s) << ',' << r.trials << ',' << format_double(r.normalized_mean) << ','
        << format_double(r.stddev) << ',' << format_double(r.ci99_half_width) << ',';
    if (r.profile) {
      out << format_double(r.profile->d) << ',' << format_double(r.profile->t) << ',' << format_double(r.profile->b);
    } else {
      out << ",,";
    }
    out << ',';
    for (std::size_t i = 0; i < r.raw_counts.size(); ++i) out << (i ? ";" : "") << r.raw_counts[i];
    out << '\n';
  }
}

inline std::vector<BenchRecord> read_bench_csv(std::istream& in) {
  std::vector<BenchRecord> out;
  std::string line;
  int lineno = 0;
  bool header = false;
  const auto& cols = bench_csv_columns();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto f = detail::split_csv_line(line, lineno);
    if (!header) {
      if (f != cols) throw CsvError(lineno, "unexpected header");
      header = true;
      continue;
    }
    if (f.size() != cols.size()) {
      throw CsvError(lineno, "expected " + std::to_string(cols.size()) + " fields, got " + std::to_string(f.size()));
    }
    BenchRecord r;
    try {
      r.game = GameId::parse(f[0]);
      r.algorithm = parse_algorithm(f[1]);
      r.backend = parse_backend(f[2]);
    } catch (const std::exception& e) {
      throw CsvError(lineno, e.what());
    }
    r.budget_s = detail::parse_double_field(f[3], lineno, cols[3]);
    r.trials = detail::parse_u64_field(f[4], lineno, cols[4]);
    r.normalized_mean = detail::parse_double_field(f[5], lineno, cols[5]);
    r.stddev = detail::parse_double_field(f[6], lineno, cols[6]);
    r.ci99_half_width = detail::parse_double_field(f[7], lineno, cols[7]);
    const bool any_profile = !f[8].empty() || !f[9].empty() || !f[10].empty();
    if (any_profile) {
      ComplexityProfile p;
      p.d = detail::parse_double_field(f[8], lineno, cols[8]);
      p.t = detail::parse_double_field(f[9], lineno, cols[9]);
      p.b = detail::parse_double_field(f[10], lineno, cols[10]);
      r.profile = p;
    }
    std::string_view counts = f[11];
    while (!counts.empty()) {
      const auto semi = counts.find(';');
      r.raw_counts.push_back(detail::parse_u64_field(std::string(counts.substr(0, semi)), lineno, cols[11]));
      counts = semi == std::string_view::npos ? std::string_view{} : counts.substr(semi + 1);
    }
    if (r.raw_counts.size() != r.trials) throw CsvError(lineno, "trials does not match the number of raw counts");
    out.push_back(std::move(r));
  }
  if (!header) throw CsvError(lineno, "missing header");
  return out;
}

inline void write_bench_csv(const std::vector<BenchRecord>& records, const std::string& path,
                            const std::string& invocation = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_bench_csv(records, out, invocation);
}

inline std::vector<BenchRecord> read_bench_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_bench_csv(in);
}

// ---------------------------------------------------------------------------
// Tables

inline std::string fixed3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// ln(r) = -0.946*ln(d) - 0.492*ln(t) + 6.291
inline std::string format_equation(const RegressionModel& m) {
  std::string s = std::string("ln(") + target_letter(m.target_kind) + ") = ";
  for (std::size_t j = 0; j < m.features_used.size(); ++j) {
    const double c = m.coefficients[j];
    const std::string term = fixed3(std::abs(c)) + "*ln(" + feature_letter(m.features_used[j]) + ")";
    if (j == 0) {
      s += (c < 0 ? "-" : "") + term;
    } else {
      s += (c < 0 ? " - " : " + ") + term;
    }
  }
  s += (m.intercept < 0 ? " - " : " + ") + fixed3(std::abs(m.intercept));
  return s;
}

struct ModelRow {
  std::string algorithm;       // e.g. MCTS, Minimax
  std::string implementation;  // backend
  RegressionModel model;
};

struct ScoreRow {
  std::string player1;
  std::string player2;
  ScoreResult result;
};

inline std::string highest_scorer(const ScoreRow& row) {
  if (row.result.score_avg > 0.5) return row.player1;
  if (row.result.score_avg < 0.5) return row.player2;
  return "tie";
}

namespace detail {

inline void write_aligned(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line += " | ";
      line += r[i];
      if (i + 1 < r.size()) line.append(width[i] - r[i].size(), ' ');
    }
    out << line << '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 3 : 0);
      out << std::string(total, '-') << '\n';
    }
  }
}

inline void write_csv_rows(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i]);
    out << '\n';
  }
}

inline std::string csv_twin(const std::string& path) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot) + ".csv";
  return path + ".csv";
}

inline void write_table_pair(const std::vector<std::vector<std::string>>& rows, const std::string& path,
                             const std::string& invocation) {
  std::ofstream txt(path);
  if (!txt) throw std::runtime_error("cannot write " + path);
  if (!invocation.empty()) txt << "# " << invocation << '\n';
  write_aligned(txt, rows);
  const auto twin = csv_twin(path);
  if (twin == path) return;
  std::ofstream csv(twin);
  if (!csv) throw std::runtime_error("cannot write " + twin);
  if (!invocation.empty()) csv << "# " << invocation << '\n';
  write_csv_rows(csv, rows);
}

}  // namespace detail

inline std::vector<std::vector<std::string>> model_table_rows(const std::vector<ModelRow>& models) {
  std::vector<std::vector<std::string>> rows = {{"Algorithm", "Implementation", "Equation", "MSE", "MSE test"}};
  for (const auto& m : models) {
    char mse_buf[40];
    std::snprintf(mse_buf, sizeof mse_buf, "%.4g", m.model.mse_train);
    std::string test = "-";
    if (m.model.mse_test) {
      char b[40];
      std::snprintf(b, sizeof b, "%.4g", *m.model.mse_test);
      test = b;
    }
    rows.push_back({m.algorithm, m.implementation, format_equation(m.model), mse_buf, test});
  }
  return rows;
}

inline std::vector<std::vector<std::string>> score_table_rows(const std::vector<ScoreRow>& results) {
  std::vector<std::vector<std::string>> rows = {{"Player 1", "Player 2", "Highest scoring player", "Score average"}};
  for (const auto& r : results) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", r.result.score_avg);
    rows.push_back({r.player1, r.player2, highest_scorer(r), buf});
  }
  return rows;
}

// Writes `path` as an aligned text table and a CSV twin next to it.
inline void write_model_table(const std::vector<ModelRow>& models, const std::string& path,
                              const std::string& invocation = "") {
  detail::write_table_pair(model_table_rows(models), path, invocation);
}

inline void write_score_table(const std::vector<ScoreRow>& results, const std::string& path,
                              const std::string& invocation = "") {
  detail::write_table_pair(score_table_rows(results), path, invocation);
}

}  // namespace bridgelab
