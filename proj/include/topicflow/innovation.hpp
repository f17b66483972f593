#pragma once

// Document innovation measures over topic mixtures: novelty as the mean
// KL divergence (bits) from a document to every document in the preceding
// window of months, transience as the mirror over the following window,
// resonance as their difference, plus the z-score and regression helpers
// used to compare cohorts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "topicflow/common.hpp"
#include "topicflow/csv.hpp"
#include "topicflow/mathutil.hpp"

namespace topicflow::innovation {

inline constexpr int kDefaultWindowMonths = 12;
inline constexpr double kDefaultSmoothingEps = 1e-10;

// KL divergence in bits. Zero p terms contribute nothing; a zero q against
// a positive p is rejected because inputs are expected to be smoothed.
inline double kld_bits(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ValidationError("kld: dimension mismatch");
  if (p.empty()) throw ValidationError("kld: empty distributions");
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] <= 0.0) throw ValidationError("kld: zero q against positive p");
    acc += p[k] * std::log2(p[k] / q[k]);
  }
  return acc;
}

// Additive smoothing then renormalization; keeps every coordinate positive.
inline std::vector<double> smooth_distribution(const std::vector<double>& theta,
                                               double eps = kDefaultSmoothingEps) {
  if (theta.empty()) throw ValidationError("smooth_distribution: empty input");
  std::vector<double> out(theta.size());
  double total = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    out[k] = theta[k] + eps;
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

struct InnovationScore {
  double novelty = std::numeric_limits<double>::quiet_NaN();
  double transience = std::numeric_limits<double>::quiet_NaN();
  double resonance = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

// Smoothed topic mixtures grouped by month. Within a month documents keep
// their input order, and window sums walk months from nearest to farthest,
// so reversing the time axis swaps novelty with transience bit for bit.
class ThetaTable {
 public:
  ThetaTable(std::vector<std::vector<double>> thetas, std::vector<int> months,
             double smoothing_eps = kDefaultSmoothingEps)
      : doc_months_(std::move(months)) {
    if (thetas.size() != doc_months_.size())
      throw ValidationError("theta table: thetas and months differ in length");
    if (thetas.empty()) throw ValidationError("theta table: no documents");
    const std::size_t k_dim = thetas[0].size();
    thetas_.reserve(thetas.size());
    for (std::size_t d = 0; d < thetas.size(); ++d) {
      if (thetas[d].size() != k_dim)
        throw ValidationError("theta table: inconsistent theta dimension");
      thetas_.push_back(smooth_distribution(thetas[d], smoothing_eps));
      by_month_[doc_months_[d]].push_back(d);
    }
    min_month_ = by_month_.begin()->first;
    max_month_ = by_month_.rbegin()->first;
  }

  std::size_t n_docs() const { return thetas_.size(); }
  int min_month() const { return min_month_; }
  int max_month() const { return max_month_; }
  int month_of(std::size_t doc) const { return doc_months_[doc]; }
  const std::vector<double>& theta(std::size_t doc) const { return thetas_[doc]; }

  const std::vector<std::size_t>* docs_in_month(int month) const {
    auto it = by_month_.find(month);
    return it == by_month_.end() ? nullptr : &it->second;
  }

 private:
  std::vector<std::vector<double>> thetas_;
  std::vector<int> doc_months_;
  std::map<int, std::vector<std::size_t>> by_month_;
  int min_month_ = 0;
  int max_month_ = 0;
};

namespace detail {

// Mean divergence from doc to the documents of the `window` months on one
// side; direction = -1 walks back in time, +1 forward. Fails (NaN) when the
// window leaves the observed month range or holds no documents.
inline double one_sided_mean(const ThetaTable& table, std::size_t doc, int window,
                             int direction) {
  const int m = table.month_of(doc);
  const int farthest = m + direction * window;
  if (farthest < table.min_month() || farthest > table.max_month())
    return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  std::size_t n = 0;
  for (int d = 1; d <= window; ++d) {
    const auto* others = table.docs_in_month(m + direction * d);
    if (!others) continue;
    for (std::size_t other : *others) {
      acc += kld_bits(table.theta(doc), table.theta(other));
      ++n;
    }
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return acc / static_cast<double>(n);
}

}  // namespace detail

inline InnovationScore score_one(const ThetaTable& table, std::size_t doc,
                                 int window_months = kDefaultWindowMonths) {
  if (window_months < 1) throw ValidationError("score: window must be >= 1 month");
  InnovationScore s;
  s.novelty = detail::one_sided_mean(table, doc, window_months, -1);
  s.transience = detail::one_sided_mean(table, doc, window_months, +1);
  if (std::isnan(s.novelty) || std::isnan(s.transience)) return s;
  s.resonance = s.novelty - s.transience;
  s.valid = true;
  return s;
}

inline std::vector<InnovationScore> score_all(const ThetaTable& table,
                                              int window_months = kDefaultWindowMonths,
                                              unsigned n_threads = 1) {
  if (window_months < 1) throw ValidationError("score: window must be >= 1 month");
  std::vector<InnovationScore> out(table.n_docs());
  parallel_chunks(table.n_docs(), n_threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t d = begin; d < end; ++d) out[d] = score_one(table, d, window_months);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Cohort statistics

// Standardization with the sample standard deviation (n - 1 denominator).
inline std::vector<double> zscore(const std::vector<double>& values) {
  if (values.size() < 2) throw ValidationError("zscore: need at least 2 values");
  const double mu = math::mean(values);
  const double var = math::sample_variance(values);
  if (var <= 0.0) throw ValidationError("zscore: zero variance");
  const double sd = std::sqrt(var);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mu) / sd;
  return out;
}

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;

  double predict(double x) const { return intercept + slope * x; }
};

// Simple least squares y = intercept + slope * x via the normal equations.
inline RegressionFit fit_ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("ols: length mismatch");
  if (x.size() < 2) throw ValidationError("ols: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double sum_x = 0.0, sum_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum_x += x[i];
    sum_y += y[i];
  }
  const double mean_x = sum_x / n;
  const double mean_y = sum_y / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ValidationError("ols: x has zero variance");
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.n = x.size();
  fit.r_squared = syy == 0.0 ? 1.0 : (fit.slope * sxy) / syy;
  return fit;
}

// Residual of standardized resonance against the standardized-novelty
// regression line: delta_z_i = zr_i - (intercept + slope * zn_i). Its mean
// over the fitted sample is 0 by construction.
inline std::vector<double> delta_z(const std::vector<double>& z_novelty,
                                   const std::vector<double>& z_resonance,
                                   const RegressionFit& fit) {
  if (z_novelty.size() != z_resonance.size()) throw ValidationError("delta_z: length mismatch");
  std::vector<double> out(z_novelty.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = z_resonance[i] - fit.predict(z_novelty[i]);
  return out;
}

inline void write_scores_csv(std::ostream& out, const std::vector<std::string>& doc_ids,
                             const std::vector<int>& months,
                             const std::vector<std::string>& month_labels,
                             const std::vector<InnovationScore>& scores) {
  if (doc_ids.size() != scores.size() || months.size() != scores.size() ||
      month_labels.size() != scores.size())
    throw ValidationError("scores csv: column length mismatch");
  csv::write_row(out, {"doc_id", "month", "month_index", "novelty", "transience", "resonance",
                       "valid"});
  for (std::size_t d = 0; d < scores.size(); ++d) {
    const auto& s = scores[d];
    csv::write_row(out, {doc_ids[d], month_labels[d], std::to_string(months[d]),
                         s.valid ? math::format_double(s.novelty) : std::string(),
                         s.valid ? math::format_double(s.transience) : std::string(),
                         s.valid ? math::format_double(s.resonance) : std::string(),
                         s.valid ? "true" : "false"});
  }
}

}  // namespace topicflow::innovation
