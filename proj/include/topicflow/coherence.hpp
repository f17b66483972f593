#pragma once

// Topic coherence from sliding-window co-occurrence counts: NPMI pair
// scores averaged over the top words of each topic, and a grid search over
// preprocessing and model hyperparameters that ranks cells by the corpus
// mean coherence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "topicflow/common.hpp"
#include "topicflow/csv.hpp"
#include "topicflow/lda.hpp"
#include "topicflow/textprep.hpp"

namespace topicflow::coherence {

inline constexpr double kDefaultEpsilon = 1e-12;
inline constexpr int kDefaultWindowSize = 10;
inline constexpr int kDefaultTopN = 10;

// Integer window counts; merge order cannot change them.
struct CooccurrenceStats {
  std::int64_t n_windows = 0;
  std::unordered_map<std::int32_t, std::int64_t> term_windows;
  std::unordered_map<std::uint64_t, std::int64_t> pair_windows;

  static std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  std::int64_t term_count(std::int32_t id) const {
    auto it = term_windows.find(id);
    return it == term_windows.end() ? 0 : it->second;
  }
  std::int64_t pair_count(std::int32_t a, std::int32_t b) const {
    auto it = pair_windows.find(pair_key(a, b));
    return it == pair_windows.end() ? 0 : it->second;
  }
};

// Sliding windows of `window_size` at stride 1 over each id sequence. A
// non-empty document shorter than the window contributes exactly one
// window; an empty one contributes none. A term or pair is counted once
// per window it appears in. When `candidates` is non-null only candidate
// terms are tallied (n_windows still counts every window).
inline CooccurrenceStats count_windows(const std::vector<std::vector<std::int32_t>>& sequences,
                                       int window_size,
                                       const std::unordered_set<std::int32_t>* candidates =
                                           nullptr) {
  if (window_size < 1) throw ValidationError("count_windows: window size must be >= 1");
  CooccurrenceStats stats;
  std::vector<std::int32_t> distinct;
  for (const auto& seq : sequences) {
    if (seq.empty()) continue;
    const std::size_t len = seq.size();
    const std::size_t w = static_cast<std::size_t>(window_size);
    const std::size_t n_win = len <= w ? 1 : len - w + 1;
    for (std::size_t start = 0; start < n_win; ++start) {
      const std::size_t stop = std::min(len, start + w);
      ++stats.n_windows;
      distinct.clear();
      for (std::size_t i = start; i < stop; ++i) {
        if (candidates && !candidates->count(seq[i])) continue;
        distinct.push_back(seq[i]);
      }
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (std::size_t i = 0; i < distinct.size(); ++i) {
        ++stats.term_windows[distinct[i]];
        for (std::size_t j = i + 1; j < distinct.size(); ++j)
          ++stats.pair_windows[CooccurrenceStats::pair_key(distinct[i], distinct[j])];
      }
    }
  }
  return stats;
}

// PMI in natural log with additive smoothing on the joint probability only:
// ln((P(wi,wj) + eps) / (P(wi) P(wj))).
inline double pmi(const CooccurrenceStats& stats, std::int32_t wi, std::int32_t wj,
                  double eps = kDefaultEpsilon) {
  if (stats.n_windows <= 0) throw ValidationError("pmi: no windows counted");
  const double n = static_cast<double>(stats.n_windows);
  const double p_i = static_cast<double>(stats.term_count(wi)) / n;
  const double p_j = static_cast<double>(stats.term_count(wj)) / n;
  if (p_i <= 0.0 || p_j <= 0.0)
    throw ValidationError("pmi: term " + std::to_string(p_i <= 0.0 ? wi : wj) +
                          " never occurs in any window");
  const double p_ij = static_cast<double>(stats.pair_count(wi, wj)) / n;
  return std::log((p_ij + eps) / (p_i * p_j));
}

// NPMI = PMI / (-ln(P(wi,wj) + eps)). Lies in [-1, 1] up to O(eps) slack.
inline double npmi(const CooccurrenceStats& stats, std::int32_t wi, std::int32_t wj,
                   double eps = kDefaultEpsilon) {
  const double n = static_cast<double>(stats.n_windows);
  const double p_ij = static_cast<double>(stats.pair_count(wi, wj)) / n;
  return pmi(stats, wi, wj, eps) / (-std::log(p_ij + eps));
}

// Mean pairwise NPMI over the distinct top words of one topic:
// 2 / (n (n-1)) * sum over unordered pairs.
inline double topic_coherence(const CooccurrenceStats& stats,
                              const std::vector<std::int32_t>& top_ids,
                              double eps = kDefaultEpsilon) {
  if (top_ids.size() < 2) throw ValidationError("topic_coherence: need at least 2 top words");
  {
    std::unordered_set<std::int32_t> seen(top_ids.begin(), top_ids.end());
    if (seen.size() != top_ids.size())
      throw ValidationError("topic_coherence: duplicate top word");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < top_ids.size(); ++i)
    for (std::size_t j = i + 1; j < top_ids.size(); ++j)
      acc += npmi(stats, top_ids[i], top_ids[j], eps);
  const double n = static_cast<double>(top_ids.size());
  return 2.0 / (n * (n - 1.0)) * acc;
}

struct ModelCoherence {
  std::vector<double> per_topic;
  double mean = 0.0;
};

// Corpus coherence of a trained model: per-topic NPMI coherence over the
// top `topn` words, averaged across topics. Windows are counted once,
// restricted to the union of top words.
inline ModelCoherence model_coherence(const lda::TopicModel& model,
                                      const std::vector<std::vector<std::int32_t>>& sequences,
                                      int window_size = kDefaultWindowSize,
                                      int topn = kDefaultTopN, double eps = kDefaultEpsilon) {
  if (topn < 2) throw ValidationError("model_coherence: topn must be >= 2");
  std::vector<std::vector<std::int32_t>> tops(static_cast<std::size_t>(model.k()));
  std::unordered_set<std::int32_t> candidates;
  for (int k = 0; k < model.k(); ++k) {
    tops[static_cast<std::size_t>(k)] = lda::top_words(model, k, static_cast<std::size_t>(topn));
    candidates.insert(tops[static_cast<std::size_t>(k)].begin(),
                      tops[static_cast<std::size_t>(k)].end());
  }
  const CooccurrenceStats stats = count_windows(sequences, window_size, &candidates);
  ModelCoherence out;
  out.per_topic.reserve(tops.size());
  double acc = 0.0;
  for (const auto& ids : tops) {
    const double c = topic_coherence(stats, ids, eps);
    out.per_topic.push_back(c);
    acc += c;
  }
  out.mean = acc / static_cast<double>(tops.size());
  return out;
}

// ---------------------------------------------------------------------------
// Grid search

struct GridAxes {
  std::vector<double> df_max_values{0.5, 1.0};
  std::vector<double> tfidf_min_values{0.0075, 0.015};
  std::vector<int> k_values{60};
  std::vector<std::string> alpha_modes{"symmetric", "asymmetric"};
  std::vector<std::string> eta_modes{"symmetric", "auto"};

  std::size_t n_cells() const {
    return df_max_values.size() * tfidf_min_values.size() * k_values.size() *
           alpha_modes.size() * eta_modes.size();
  }
};

struct GridCell {
  double df_max = 1.0;
  double tfidf_min = 0.0;
  int k = 0;
  std::string alpha_mode;
  std::string eta_mode;
};

struct GridRow {
  std::size_t cell_index = 0;  // row-major over df_max, tfidf_min, k, alpha, eta
  GridCell cell;
  std::string status = "ok";  // "ok" or the failure message
  double coherence = std::numeric_limits<double>::quiet_NaN();
  std::size_t vocab_size = 0;

  bool ok() const { return status == "ok"; }
};

struct GridResult {
  std::vector<GridRow> rows;  // successful rows first, coherence descending
  std::optional<std::size_t> best_index;  // index into rows

  const GridRow& best() const {
    if (!best_index) throw Error("grid search: every cell failed");
    return rows[*best_index];
  }
};

// Trains one model per cell and scores it; failures are recorded, never
// fatal for the grid. Cell seeds are run_seed + cell_index so each cell is
// reproducible in isolation. Rows sort by coherence descending with ties
// broken by smaller K then cell order; failed rows sink to the bottom.
inline GridResult grid_search(const std::vector<std::vector<std::string>>& token_docs,
                              const GridAxes& axes, const lda::LdaConfig& base_config,
                              std::uint64_t run_seed, int window_size = kDefaultWindowSize,
                              int topn = kDefaultTopN, double eps = kDefaultEpsilon,
                              unsigned n_threads = 1) {
  if (axes.n_cells() == 0) throw ValidationError("grid search: empty axes");
  GridResult result;
  std::size_t cell_index = 0;
  for (double df_max : axes.df_max_values) {
    for (double tfidf_min : axes.tfidf_min_values) {
      // Preprocessing is shared by every model cell under it.
      std::optional<textprep::Vocabulary> vocab;
      std::string prep_error;
      std::vector<lda::BagOfWords> bows;
      std::vector<std::vector<std::int32_t>> sequences;
      try {
        vocab = textprep::build_vocabulary(token_docs, df_max, tfidf_min);
        bows.reserve(token_docs.size());
        sequences.reserve(token_docs.size());
        for (const auto& toks : token_docs) {
          bows.push_back(textprep::to_bow(toks, *vocab));
          sequences.push_back(textprep::to_id_sequence(toks, *vocab));
        }
      } catch (const std::exception& ex) {
        prep_error = ex.what();
      }
      for (int k : axes.k_values) {
        for (const auto& alpha_mode : axes.alpha_modes) {
          for (const auto& eta_mode : axes.eta_modes) {
            GridRow row;
            row.cell_index = cell_index;
            row.cell = GridCell{df_max, tfidf_min, k, alpha_mode, eta_mode};
            if (!prep_error.empty()) {
              row.status = prep_error;
            } else {
              row.vocab_size = vocab->size();
              try {
                lda::LdaConfig cfg = base_config;
                cfg.k = k;
                cfg.alpha_mode = alpha_mode;
                cfg.eta_mode = eta_mode;
                cfg.seed = run_seed + cell_index;
                auto fit = lda::fit_online(bows, cfg, vocab->size(), vocab->fingerprint(),
                                           n_threads);
                row.coherence =
                    model_coherence(fit.model, sequences, window_size, topn, eps).mean;
              } catch (const std::exception& ex) {
                row.status = ex.what();
              }
            }
            result.rows.push_back(std::move(row));
            ++cell_index;
          }
        }
      }
    }
  }

  std::stable_sort(result.rows.begin(), result.rows.end(), [](const GridRow& a, const GridRow& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (!a.ok()) return a.cell_index < b.cell_index;
    if (a.coherence != b.coherence) return a.coherence > b.coherence;
    if (a.cell.k != b.cell.k) return a.cell.k < b.cell.k;
    return a.cell_index < b.cell_index;
  });
  if (!result.rows.empty() && result.rows.front().ok()) result.best_index = 0;
  return result;
}

inline void write_grid_csv(std::ostream& out, const GridResult& grid) {
  csv::write_row(out, {"rank", "cell_index", "df_max", "tfidf_min", "k", "alpha_mode", "eta_mode",
                       "vocab_size", "coherence", "status"});
  std::size_t rank = 1;
  for (const auto& row : grid.rows) {
    csv::write_row(out, {std::to_string(rank++), std::to_string(row.cell_index),
                         math::format_double(row.cell.df_max),
                         math::format_double(row.cell.tfidf_min), std::to_string(row.cell.k),
                         row.cell.alpha_mode, row.cell.eta_mode, std::to_string(row.vocab_size),
                         row.ok() ? math::format_double(row.coherence) : std::string(),
                         row.status});
  }
}

}  // namespace topicflow::coherence
