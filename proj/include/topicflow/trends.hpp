#pragma once

// Monthly topic share series, aggregation of topics into named groups, and
// Pearson correlation between group trajectories.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "topicflow/common.hpp"
#include "topicflow/csv.hpp"
#include "topicflow/mathutil.hpp"

namespace topicflow::trends {

inline std::string month_label(int month_index, int epoch_year, int epoch_month) {
  const int total = epoch_year * 12 + (epoch_month - 1) + month_index;
  const int year = total >= 0 ? total / 12 : -((-total + 11) / 12);
  const int month = total - year * 12 + 1;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

struct TopicSeries {
  std::vector<int> months;              // ascending, only months with documents
  std::vector<std::size_t> doc_counts;  // parallel to months
  Matrix values;                        // n_months x K, each row sums to 1

  int k() const { return static_cast<int>(values.cols); }
};

// Mean topic distribution per calendar month. Every theta is a probability
// vector, so each monthly mean sums to 1; months without documents are
// omitted rather than emitted as gaps.
inline TopicSeries topic_series(const std::vector<std::vector<double>>& thetas,
                                const std::vector<int>& doc_months) {
  if (thetas.size() != doc_months.size())
    throw ValidationError("topic_series: thetas and months differ in length");
  if (thetas.empty()) throw ValidationError("topic_series: no documents");
  const std::size_t k_dim = thetas[0].size();
  std::map<int, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t d = 0; d < thetas.size(); ++d) {
    if (thetas[d].size() != k_dim)
      throw ValidationError("topic_series: inconsistent theta dimension");
    auto& [sums, count] = acc.try_emplace(doc_months[d], std::vector<double>(k_dim, 0.0), 0)
                              .first->second;
    for (std::size_t k = 0; k < k_dim; ++k) sums[k] += thetas[d][k];
    ++count;
  }
  TopicSeries out;
  out.values = Matrix(acc.size(), k_dim);
  std::size_t r = 0;
  for (const auto& [month, entry] : acc) {
    out.months.push_back(month);
    out.doc_counts.push_back(entry.second);
    double* row = out.values.row(r++);
    for (std::size_t k = 0; k < k_dim; ++k)
      row[k] = entry.first[k] / static_cast<double>(entry.second);
  }
  return out;
}

// Ordered so exports and correlation tables are stable.
using GroupMap = std::map<std::string, std::vector<int>>;

struct GroupSeries {
  std::vector<int> months;
  std::vector<std::string> names;
  Matrix values;  // n_months x n_groups; entry = sum of member topic shares
};

inline GroupSeries group_series(const TopicSeries& series, const GroupMap& groups) {
  if (groups.empty()) throw ValidationError("group_series: no groups");
  for (const auto& [name, ids] : groups) {
    if (ids.empty()) throw ValidationError("group '" + name + "' has no topics");
    for (int id : ids)
      if (id < 0 || id >= series.k())
        throw ValidationError("group '" + name + "' references topic " + std::to_string(id) +
                              " outside 0.." + std::to_string(series.k() - 1));
  }
  GroupSeries out;
  out.months = series.months;
  out.names.reserve(groups.size());
  for (const auto& [name, ids] : groups) out.names.push_back(name);
  out.values = Matrix(series.months.size(), groups.size());
  for (std::size_t m = 0; m < series.months.size(); ++m) {
    const double* src = series.values.row(m);
    double* dst = out.values.row(m);
    std::size_t g = 0;
    for (const auto& [name, ids] : groups) {
      double total = 0.0;
      for (int id : ids) total += src[static_cast<std::size_t>(id)];
      dst[g++] = total;
    }
  }
  return out;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("pearson: length mismatch");
  if (a.size() < 2) throw ValidationError("pearson: need at least 2 points");
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) throw ValidationError("pearson: constant series");
  return cov / std::sqrt(var_a * var_b);
}

// Centered moving average; near the edges the window shrinks to what fits.
inline std::vector<double> moving_average(const std::vector<double>& series, int window) {
  if (window < 1 || window % 2 == 0)
    throw ValidationError("moving_average: window must be odd and >= 1");
  const int half = window / 2;
  const int n = static_cast<int>(series.size());
  std::vector<double> out(series.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += series[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

struct CorrelationRow {
  std::string group_a;
  std::string group_b;
  double r = 0.0;
};

inline std::vector<CorrelationRow> group_correlations(const GroupSeries& gs) {
  std::vector<CorrelationRow> rows;
  for (std::size_t i = 0; i < gs.names.size(); ++i) {
    for (std::size_t j = i + 1; j < gs.names.size(); ++j) {
      std::vector<double> a(gs.months.size()), b(gs.months.size());
      for (std::size_t m = 0; m < gs.months.size(); ++m) {
        a[m] = gs.values(m, i);
        b[m] = gs.values(m, j);
      }
      rows.push_back({gs.names[i], gs.names[j], pearson(a, b)});
    }
  }
  return rows;
}

// CSV of rows "group,topic" (header required), topics zero-based.
inline GroupMap load_groups(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields.size() < 2 || fields[0] != "group" || fields[1] != "topic")
    throw ValidationError("groups file: expected header 'group,topic'");
  GroupMap groups;
  std::size_t line = 1;
  while (reader.next(fields)) {
    ++line;
    if (fields.size() < 2)
      throw ValidationError("groups file: line " + std::to_string(line) + " has too few fields");
    try {
      groups[fields[0]].push_back(std::stoi(fields[1]));
    } catch (const std::exception&) {
      throw ValidationError("groups file: line " + std::to_string(line) +
                            " has a non-integer topic id");
    }
  }
  if (groups.empty()) throw ValidationError("groups file: no rows");
  return groups;
}

inline void write_topic_series_csv(std::ostream& out, const TopicSeries& ts, int epoch_year,
                                   int epoch_month) {
  std::vector<std::string> header{"month", "month_index", "n_docs"};
  for (int k = 0; k < ts.k(); ++k) header.push_back("topic_" + std::to_string(k));
  csv::write_row(out, header);
  for (std::size_t m = 0; m < ts.months.size(); ++m) {
    std::vector<std::string> row{month_label(ts.months[m], epoch_year, epoch_month),
                                 std::to_string(ts.months[m]), std::to_string(ts.doc_counts[m])};
    for (int k = 0; k < ts.k(); ++k)
      row.push_back(math::format_double(ts.values(m, static_cast<std::size_t>(k))));
    csv::write_row(out, row);
  }
}

inline void write_group_series_csv(std::ostream& out, const GroupSeries& gs, int epoch_year,
                                   int epoch_month) {
  std::vector<std::string> header{"month", "month_index"};
  for (const auto& name : gs.names) header.push_back(name);
  csv::write_row(out, header);
  for (std::size_t m = 0; m < gs.months.size(); ++m) {
    std::vector<std::string> row{month_label(gs.months[m], epoch_year, epoch_month),
                                 std::to_string(gs.months[m])};
    for (std::size_t g = 0; g < gs.names.size(); ++g)
      row.push_back(math::format_double(gs.values(m, g)));
    csv::write_row(out, row);
  }
}

inline void write_correlations_csv(std::ostream& out, const std::vector<CorrelationRow>& rows) {
  csv::write_row(out, {"group_a", "group_b", "pearson_r"});
  for (const auto& row : rows)
    csv::write_row(out, {row.group_a, row.group_b, math::format_double(row.r)});
}

}  // namespace topicflow::trends
