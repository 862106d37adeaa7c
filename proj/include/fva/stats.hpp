#pragma once

// Reliability and hypothesis tests for Likert-style rating data.

#include "fva/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace fva::stats {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rectangular subjects-by-conditions (or items) table, row-major.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  RatingMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
               std::vector<std::string> row_labels = {}, std::vector<std::string> col_labels = {})
      : rows_(rows), cols_(cols), v_(std::move(values)), row_labels_(std::move(row_labels)),
        col_labels_(std::move(col_labels)) {
    if (v_.size() != rows_ * cols_) throw StatsError("matrix is not rectangular");
    for (double x : v_) {
      if (!std::isfinite(x)) throw StatsError("matrix contains a non-finite value");
    }
    if (row_labels_.empty()) {
      for (std::size_t r = 0; r < rows_; ++r) row_labels_.push_back(std::to_string(r + 1));
    }
    if (col_labels_.empty()) {
      for (std::size_t c = 0; c < cols_; ++c) col_labels_.push_back(std::to_string(c + 1));
    }
    if (row_labels_.size() != rows_ || col_labels_.size() != cols_) throw StatsError("label count mismatch");
  }

  static RatingMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t c = rows.empty() ? 0 : rows.front().size();
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.size() != c) throw StatsError("matrix is not rectangular");
      v.insert(v.end(), r.begin(), r.end());
    }
    return RatingMatrix(rows.size(), c, std::move(v));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

  std::vector<double> row(std::size_t r) const {
    return {v_.begin() + static_cast<std::ptrdiff_t>(r * cols_), v_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
  }
  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> v_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
};

struct TestResult {
  double statistic{0.0};
  double p_value{1.0};
  double df{0.0};
  std::size_t n{0};
  std::size_t k{0};
};

// ---- special functions ------------------------------------------------------

namespace detail {

inline constexpr double kEps = 1e-15;
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxIter = 10000;

inline double gamma_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Upper regularized incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw StatsError("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_series(a, x);
  return detail::gamma_cf(a, x);
}

/// Regularized incomplete beta I_x(a, b).
inline double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0) throw StatsError("beta_inc: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// P(X >= x) for X ~ chi-square(df).
inline double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw StatsError("chi-square df must be positive");
  if (x <= 0.0) return 1.0;
  return std::clamp(gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

/// P(|T| >= |t|) for T ~ Student t(df).
inline double t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw StatsError("t df must be positive");
  if (!std::isfinite(t)) return 0.0;
  return std::clamp(beta_inc(0.5 * df, 0.5, df / (df + t * t)), 0.0, 1.0);
}

// ---- descriptive --------------------------------------------------------------

inline double mean(const std::vector<double>& x) {
  if (x.empty()) throw StatsError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample variance (n - 1 denominator).
inline double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw StatsError("variance needs at least 2 values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

/// Mid-ranks (1-based) of the values; ties share their average rank.
inline std::vector<double> midranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

// ---- tests --------------------------------------------------------------------

/// Internal consistency of the item columns.
inline double cronbach_alpha(const RatingMatrix& m) {
  if (m.cols() < 2) throw StatsError("cronbach_alpha needs at least 2 items");
  if (m.rows() < 2) throw StatsError("cronbach_alpha needs at least 2 subjects");
  double item_var = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) item_var += variance(m.col(c));
  std::vector<double> totals(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    totals[r] = std::accumulate(row.begin(), row.end(), 0.0);
  }
  const double total_var = variance(totals);
  if (total_var == 0.0) throw StatsError("cronbach_alpha: total score variance is zero");
  const double k = static_cast<double>(m.cols());
  return k / (k - 1.0) * (1.0 - item_var / total_var);
}

/// Friedman rank test across conditions (columns) within blocks (rows), with
/// the correction for tied ranks.
inline TestResult friedman(const RatingMatrix& m) {
  if (m.rows() < 2) throw StatsError("friedman needs at least 2 blocks");
  if (m.cols() < 2) throw StatsError("friedman needs at least 2 conditions");
  const auto n = static_cast<double>(m.rows());
  const auto k = static_cast<double>(m.cols());
  std::vector<double> rank_sum(m.cols(), 0.0);
  double ties = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    const auto ranks = midranks(row);
    for (std::size_t c = 0; c < m.cols(); ++c) rank_sum[c] += ranks[c];
    std::map<double, double> counts;
    for (double v : row) counts[v] += 1.0;
    for (const auto& [v, t] : counts) ties += t * t * t - t;
  }
  double ss = 0.0;
  for (double R : rank_sum) ss += R * R;
  const double raw = 12.0 / (n * k * (k + 1.0)) * ss - 3.0 * n * (k + 1.0);
  const double correction = 1.0 - ties / (n * (k * k * k - k));
  TestResult res;
  res.n = m.rows();
  res.k = m.cols();
  res.df = k - 1.0;
  if (correction <= 0.0) {
    res.statistic = 0.0;  // every block fully tied
    res.p_value = 1.0;
    return res;
  }
  res.statistic = std::max(0.0, raw / correction);
  res.p_value = chi2_sf(res.statistic, res.df);
  return res;
}

/// Welch's unequal-variance t-test, two-sided.
inline TestResult t_test_independent(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw StatsError("t-test needs at least 2 values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = variance(a) / na;
  const double vb = variance(b) / nb;
  const double se2 = va + vb;
  if (se2 == 0.0) throw StatsError("t-test: both samples have zero variance");
  TestResult res;
  res.n = a.size() + b.size();
  res.k = 2;
  res.statistic = (mean(a) - mean(b)) / std::sqrt(se2);
  res.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  res.p_value = t_two_sided(res.statistic, res.df);
  return res;
}

// ---- ingestion ----------------------------------------------------------------

/// Matrix CSV: header `<label>,<cond1>,<cond2>,...`, then one row per subject
/// starting with its label. Empty cells are rejected with their positions.
inline RatingMatrix parse_matrix_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.size() < 2) throw StatsError("matrix CSV needs a header and at least one row");
  const auto& header = rows.front();
  if (header.size() < 2) throw StatsError("matrix CSV needs at least one value column");
  std::vector<std::string> cols(header.begin() + 1, header.end());
  std::vector<std::string> labels;
  std::vector<double> values;
  std::vector<std::string> missing;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw StatsError("matrix CSV row " + std::to_string(r + 1) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(row.size()));
    }
    labels.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c].empty()) {
        missing.push_back(row[0] + "/" + header[c]);
        values.push_back(0.0);
        continue;
      }
      try {
        std::size_t used = 0;
        values.push_back(std::stod(row[c], &used));
        if (used != row[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw StatsError("matrix CSV row " + std::to_string(r + 1) + ": '" + row[c] + "' is not a number");
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw StatsError("matrix CSV has missing cells: " + list);
  }
  const std::size_t n = labels.size();
  const std::size_t k = cols.size();
  return RatingMatrix(n, k, std::move(values), std::move(labels), std::move(cols));
}

/// Column samples from a CSV with a header row; blank cells are skipped so
/// columns may differ in length (independent samples).
inline std::vector<std::pair<std::string, std::vector<double>>> parse_columns_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw StatsError("CSV is empty");
  std::vector<std::pair<std::string, std::vector<double>>> cols;
  for (const auto& h : rows.front()) cols.push_back({h, {}});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() > cols.size()) throw StatsError("CSV row " + std::to_string(r + 1) + " has too many fields");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const auto& cell = rows[r][c];
      if (cell.empty()) continue;
      try {
        std::size_t used = 0;
        cols[c].second.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw StatsError("CSV row " + std::to_string(r + 1) + ": '" + cell + "' is not a number");
      }
    }
  }
  return cols;
}

/// One rating captured during an interactive session.
struct SessionRecord {
  std::string session;
  std::string participant;
  std::string condition;  // agent variant
  std::string measure;    // "confidence" per task, or a questionnaire measure
  std::string item;       // task id or questionnaire item
  double score{0.0};

  bool operator==(const SessionRecord&) const = default;
};

inline const std::vector<std::string>& session_csv_header() {
  static const std::vector<std::string> h{"session", "participant", "condition", "measure", "item", "score"};
  return h;
}

inline std::string session_records_to_csv(const std::vector<SessionRecord>& recs) {
  std::string out;
  const auto& h = session_csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) out += (i ? "," : "") + h[i];
  out += '\n';
  for (const auto& r : recs) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", r.score);
    out += csv_escape(r.session) + ',' + csv_escape(r.participant) + ',' + csv_escape(r.condition) + ',' +
           csv_escape(r.measure) + ',' + csv_escape(r.item) + ',' + buf + '\n';
  }
  return out;
}

inline std::vector<SessionRecord> parse_session_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != session_csv_header()) {
    throw StatsError("session CSV header must be session,participant,condition,measure,item,score");
  }
  std::vector<SessionRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 6) throw StatsError("session CSV row " + std::to_string(r + 1) + ": expected 6 fields");
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(row[5], &used);
      if (used != row[5].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw StatsError("session CSV row " + std::to_string(r + 1) + ": score '" + row[5] + "' is not a number");
    }
    out.push_back({row[0], row[1], row[2], row[3], row[4], score});
  }
  return out;
}

/// Participants by conditions for one measure; each cell is the mean score
/// over the measure's items. Every participant must have rated every item
/// under every condition, otherwise the missing cells are listed in the error.
inline RatingMatrix session_to_matrix(const std::vector<SessionRecord>& records, const std::string& measure,
                                      std::vector<std::string> required_items = {}) {
  std::set<std::string> participants;
  std::set<std::string> conditions;
  std::set<std::string> seen_items;
  std::map<std::tuple<std::string, std::string, std::string>, double> cells;
  for (const auto& r : records) {
    if (r.measure != measure) continue;
    if (!std::isfinite(r.score)) throw StatsError("non-finite score for " + r.participant + "/" + r.item);
    participants.insert(r.participant);
    conditions.insert(r.condition);
    seen_items.insert(r.item);
    if (!cells.emplace(std::make_tuple(r.participant, r.condition, r.item), r.score).second) {
      throw StatsError("duplicate rating " + r.participant + "/" + r.condition + "/" + r.item);
    }
  }
  if (participants.empty()) throw StatsError("no records for measure '" + measure + "'");
  if (required_items.empty()) required_items.assign(seen_items.begin(), seen_items.end());
  std::vector<double> values;
  std::vector<std::string> missing;
  for (const auto& p : participants) {
    for (const auto& c : conditions) {
      double sum = 0.0;
      for (const auto& item : required_items) {
        auto it = cells.find({p, c, item});
        if (it == cells.end()) missing.push_back(p + "/" + c + "/" + item);
        else sum += it->second;
      }
      values.push_back(sum / static_cast<double>(required_items.size()));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw StatsError("incomplete session data for '" + measure + "'; missing: " + list);
  }
  return RatingMatrix(participants.size(), conditions.size(), std::move(values),
                      {participants.begin(), participants.end()}, {conditions.begin(), conditions.end()});
}

}  // namespace fva::stats
