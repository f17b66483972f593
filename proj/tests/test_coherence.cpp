#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "topicflow/coherence.hpp"
#include "topicflow/lda.hpp"

using namespace topicflow;
using coherence::CooccurrenceStats;

namespace {

struct OracleCounts {
  std::int64_t n_windows = 0;
  std::map<std::int32_t, std::int64_t> terms;
  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> pairs;
};

// Plain enumeration of every window position, kept deliberately naive.
OracleCounts enumerate_windows(const std::vector<std::vector<std::int32_t>>& sequences,
                               std::size_t w) {
  OracleCounts out;
  for (const auto& seq : sequences) {
    if (seq.empty()) continue;
    std::vector<std::size_t> starts;
    if (seq.size() <= w) {
      starts.push_back(0);
    } else {
      for (std::size_t s = 0; s + w <= seq.size(); ++s) starts.push_back(s);
    }
    for (std::size_t s : starts) {
      ++out.n_windows;
      std::set<std::int32_t> distinct(seq.begin() + static_cast<std::ptrdiff_t>(s),
                                      seq.begin() + static_cast<std::ptrdiff_t>(
                                                        std::min(seq.size(), s + w)));
      for (auto i = distinct.begin(); i != distinct.end(); ++i) {
        ++out.terms[*i];
        for (auto j = std::next(i); j != distinct.end(); ++j)
          ++out.pairs[{std::min(*i, *j), std::max(*i, *j)}];
      }
    }
  }
  return out;
}

void compare_to_oracle(const CooccurrenceStats& stats, const OracleCounts& oracle) {
  REQUIRE(stats.n_windows == oracle.n_windows);
  std::map<std::int32_t, std::int64_t> got_terms(stats.term_windows.begin(),
                                                 stats.term_windows.end());
  CHECK(got_terms == oracle.terms);
  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> got_pairs;
  for (const auto& [key, count] : stats.pair_windows)
    got_pairs[{static_cast<std::int32_t>(key >> 32),
               static_cast<std::int32_t>(key & 0xffffffffu)}] = count;
  CHECK(got_pairs == oracle.pairs);
}

std::vector<std::vector<std::int32_t>> random_sequences(std::mt19937_64& rng, std::size_t n_docs,
                                                        std::size_t max_len, std::int32_t vocab) {
  std::vector<std::vector<std::int32_t>> seqs(n_docs);
  for (auto& seq : seqs) {
    const std::size_t len = rng() % (max_len + 1);
    seq.resize(len);
    for (auto& t : seq) t = static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(vocab));
  }
  return seqs;
}

// Three coherent word blocks so document frequencies stay clear of the 0.5
// pruning edge used by the default grid axes.
std::vector<std::vector<std::string>> blocked_token_docs(std::size_t n_docs, std::uint64_t seed) {
  const std::vector<std::vector<std::string>> blocks{
      {"ant", "bee", "cat", "dog"},
      {"elk", "fox", "gnu", "hen"},
      {"ibis", "jay", "kite", "lark"}};
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::string>> docs(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    const auto& block = blocks[d % blocks.size()];
    for (int i = 0; i < 6; ++i) docs[d].push_back(block[rng() % block.size()]);
  }
  return docs;
}

}  // namespace

TEST_CASE("window counting matches exhaustive enumeration") {
  std::mt19937_64 rng(404);
  for (int window : {1, 3, 10}) {
    for (int trial = 0; trial < 6; ++trial) {
      const auto seqs = random_sequences(rng, 25, 13, 8);
      const auto stats = coherence::count_windows(seqs, window);
      compare_to_oracle(stats, enumerate_windows(seqs, static_cast<std::size_t>(window)));
    }
  }
  // Degenerate shapes: empty corpus, empty docs, single tokens.
  CHECK(coherence::count_windows({}, 10).n_windows == 0);
  const std::vector<std::vector<std::int32_t>> tiny{{}, {4}, {}};
  const auto stats = coherence::count_windows(tiny, 10);
  CHECK(stats.n_windows == 1);
  CHECK(stats.term_count(4) == 1);
  CHECK_THROWS_AS(coherence::count_windows(tiny, 0), ValidationError);
}

TEST_CASE("candidate restriction only filters the tallies") {
  std::mt19937_64 rng(77);
  const auto seqs = random_sequences(rng, 30, 12, 9);
  const std::unordered_set<std::int32_t> cand{1, 4, 7};
  const auto all = coherence::count_windows(seqs, 5);
  const auto restricted = coherence::count_windows(seqs, 5, &cand);

  CHECK(restricted.n_windows == all.n_windows);
  for (std::int32_t t = 0; t < 9; ++t) {
    if (cand.count(t))
      CHECK(restricted.term_count(t) == all.term_count(t));
    else
      CHECK(restricted.term_count(t) == 0);
  }
  for (std::int32_t a = 0; a < 9; ++a)
    for (std::int32_t b = a + 1; b < 9; ++b) {
      if (cand.count(a) && cand.count(b))
        CHECK(restricted.pair_count(a, b) == all.pair_count(a, b));
      else
        CHECK(restricted.pair_count(a, b) == 0);
    }
}

TEST_CASE("pmi follows the smoothed log-ratio formula") {
  // Eight single-window documents with known set compositions.
  const std::vector<std::vector<std::int32_t>> seqs{
      {0, 1, 2, 3}, {0, 1}, {2, 3}, {0, 2}, {1, 3}, {0}, {3}, {1, 2}};
  const auto stats = coherence::count_windows(seqs, 10);
  REQUIRE(stats.n_windows == 8);
  const double eps = coherence::kDefaultEpsilon;

  const double expected = std::log((2.0 / 8.0 + eps) / ((4.0 / 8.0) * (4.0 / 8.0)));
  CHECK(coherence::pmi(stats, 0, 1) == Catch::Approx(expected).epsilon(1e-12));
  CHECK(coherence::pmi(stats, 1, 0) == coherence::pmi(stats, 0, 1));

  CHECK_THROWS_AS(coherence::pmi(stats, 0, 6), ValidationError);
  CHECK_THROWS_AS(coherence::pmi(CooccurrenceStats{}, 0, 1), ValidationError);
}

TEST_CASE("npmi sits at zero for independent terms and one for perfect pairs") {
  // a and b occur in half the windows each and together in a quarter.
  const std::vector<std::vector<std::int32_t>> indep{{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  const auto stats = coherence::count_windows(indep, 10);
  CHECK(std::fabs(coherence::npmi(stats, 0, 1)) < 1e-9);
  CHECK(std::fabs(coherence::npmi(stats, 2, 3)) < 1e-9);

  // a and b always appear together.
  const std::vector<std::vector<std::int32_t>> perfect{{0, 1}, {0, 1}, {2}, {3}};
  const auto pstats = coherence::count_windows(perfect, 10);
  CHECK(coherence::npmi(pstats, 0, 1) == Catch::Approx(1.0).margin(1e-9));

  // a and b never meet; the score heads toward the lower bound.
  const std::vector<std::vector<std::int32_t>> never{{0, 2}, {0, 3}, {1, 2}, {1, 3}};
  const auto nstats = coherence::count_windows(never, 10);
  const double low = coherence::npmi(nstats, 0, 1);
  CHECK(low >= -1.0 - 1e-9);
  CHECK(low <= -0.9);
}

TEST_CASE("npmi stays within the unit interval on random corpora") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 5; ++trial) {
    const auto seqs = random_sequences(rng, 40, 14, 7);
    const auto stats = coherence::count_windows(seqs, 10);
    for (std::int32_t a = 0; a < 7; ++a)
      for (std::int32_t b = a + 1; b < 7; ++b) {
        if (stats.term_count(a) == 0 || stats.term_count(b) == 0) continue;
        const double v = coherence::npmi(stats, a, b);
        CHECK(v >= -1.0 - 1e-9);
        CHECK(v <= 1.0 + 1e-9);
      }
  }
}

TEST_CASE("topic coherence averages pairwise npmi with the 2/(n(n-1)) weight") {
  const std::vector<std::vector<std::int32_t>> seqs{
      {0, 1, 2, 3}, {0, 1}, {2, 3}, {0, 2}, {1, 3}, {0}, {3}, {1, 2}};
  const auto stats = coherence::count_windows(seqs, 10);
  const std::vector<std::int32_t> words{0, 1, 2, 3};

  double hand = 0.0;
  const double eps = coherence::kDefaultEpsilon;
  const double n = 8.0;
  auto hand_npmi = [&](std::int32_t a, std::int32_t b) {
    const double pi = static_cast<double>(stats.term_count(a)) / n;
    const double pj = static_cast<double>(stats.term_count(b)) / n;
    const double pij = static_cast<double>(stats.pair_count(a, b)) / n;
    return std::log((pij + eps) / (pi * pj)) / (-std::log(pij + eps));
  };
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = i + 1; j < words.size(); ++j) hand += hand_npmi(words[i], words[j]);
  hand *= 2.0 / (4.0 * 3.0);

  CHECK(coherence::topic_coherence(stats, words) == Catch::Approx(hand).epsilon(1e-12));
  CHECK_THROWS_AS(coherence::topic_coherence(stats, {0}), ValidationError);
  CHECK_THROWS_AS(coherence::topic_coherence(stats, {0, 1, 0}), ValidationError);
}

TEST_CASE("model coherence averages per-topic scores over candidate windows") {
  const auto token_docs = blocked_token_docs(60, 5);
  const auto vocab = textprep::build_vocabulary(token_docs, 1.0, 0.0);
  std::vector<lda::BagOfWords> bows;
  std::vector<std::vector<std::int32_t>> seqs;
  for (const auto& toks : token_docs) {
    bows.push_back(textprep::to_bow(toks, vocab));
    seqs.push_back(textprep::to_id_sequence(toks, vocab));
  }
  lda::LdaConfig cfg;
  cfg.k = 3;
  cfg.minibatch_size = 30;
  cfg.passes = 2;
  cfg.seed = 9;
  const auto fit = lda::fit_online(bows, cfg, static_cast<std::size_t>(vocab.size()),
                                   vocab.fingerprint(), 1);

  const auto mc = coherence::model_coherence(fit.model, seqs, 10, 4);
  REQUIRE(mc.per_topic.size() == 3);
  double acc = 0.0;
  for (double c : mc.per_topic) acc += c;
  CHECK(mc.mean == Catch::Approx(acc / 3.0).epsilon(1e-12));

  // The same scores fall out of unrestricted counting; the candidate set
  // only trims memory, never the result.
  const auto full_stats = coherence::count_windows(seqs, 10);
  for (int k = 0; k < 3; ++k) {
    const auto tops = lda::top_words(fit.model, k, 4);
    CHECK(mc.per_topic[static_cast<std::size_t>(k)] ==
          Catch::Approx(coherence::topic_coherence(full_stats, tops)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(coherence::model_coherence(fit.model, seqs, 10, 1), ValidationError);
}

TEST_CASE("default grid axes enumerate sixteen cells") {
  coherence::GridAxes axes;
  CHECK(axes.n_cells() == 16);
  axes.k_values = {2};  // keep the training cost down, still 16 cells
  const auto token_docs = blocked_token_docs(60, 11);
  lda::LdaConfig base;
  base.minibatch_size = 30;
  base.passes = 1;
  const auto grid = coherence::grid_search(token_docs, axes, base, 1000, 10, 4);

  REQUIRE(grid.rows.size() == 16);
  std::set<std::size_t> cells;
  for (const auto& row : grid.rows) cells.insert(row.cell_index);
  CHECK(cells.size() == 16);
  CHECK(*cells.begin() == 0);
  CHECK(*cells.rbegin() == 15);

  // Every cell of this benign grid trains; rows sort by coherence.
  for (const auto& row : grid.rows) CHECK(row.ok());
  for (std::size_t i = 1; i < grid.rows.size(); ++i)
    CHECK(grid.rows[i - 1].coherence >= grid.rows[i].coherence);
  CHECK(&grid.best() == &grid.rows.front());
}

TEST_CASE("grid search records failing cells instead of aborting") {
  coherence::GridAxes axes;
  axes.df_max_values = {1e-9, 1.0};  // the first prunes everything
  axes.tfidf_min_values = {0.0};
  axes.k_values = {2};
  axes.alpha_modes = {"symmetric"};
  axes.eta_modes = {"symmetric"};
  const auto token_docs = blocked_token_docs(40, 3);
  lda::LdaConfig base;
  base.minibatch_size = 20;
  base.passes = 1;
  const auto grid = coherence::grid_search(token_docs, axes, base, 7, 10, 4);

  REQUIRE(grid.rows.size() == 2);
  CHECK(grid.rows[0].ok());
  CHECK_FALSE(grid.rows[1].ok());
  CHECK(grid.rows[1].status.find("pruned") != std::string::npos);
  CHECK(std::isnan(grid.rows[1].coherence));
  CHECK(grid.best().cell.df_max == 1.0);

  axes.df_max_values = {1e-9};
  const auto hopeless = coherence::grid_search(token_docs, axes, base, 7, 10, 4);
  REQUIRE(hopeless.rows.size() == 1);
  CHECK_FALSE(hopeless.best_index.has_value());
  CHECK_THROWS_AS(hopeless.best(), Error);
}

TEST_CASE("grid csv lists rank cell and status columns") {
  coherence::GridAxes axes;
  axes.df_max_values = {1.0};
  axes.tfidf_min_values = {0.0};
  axes.k_values = {2};
  axes.alpha_modes = {"symmetric"};
  axes.eta_modes = {"symmetric", "auto"};
  const auto token_docs = blocked_token_docs(40, 21);
  lda::LdaConfig base;
  base.minibatch_size = 20;
  base.passes = 1;
  const auto grid = coherence::grid_search(token_docs, axes, base, 3, 10, 4);

  std::ostringstream out;
  coherence::write_grid_csv(out, grid);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "rank,cell_index,df_max,tfidf_min,k,alpha_mode,eta_mode,vocab_size,coherence,status");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    CHECK(line.find(",ok") != std::string::npos);
  }
  CHECK(rows == 2);
}
