// Library walkthrough: builds a small synthetic corpus in memory and runs
// every analysis layer on it, printing what each one produces. The same
// flow, file-backed and resumable, is what `topicflow run` executes; this
// program shows the underlying calls.

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "topicflow/coherence.hpp"
#include "topicflow/entities.hpp"
#include "topicflow/innovation.hpp"
#include "topicflow/lda.hpp"
#include "topicflow/trends.hpp"

using namespace topicflow;

namespace {

std::string term_name(std::int32_t id) {
  return "term" + std::string(id < 10 ? "0" : "") + std::to_string(id);
}

void banner(const std::string& title) {
  std::cout << "\n== " << title << " ==\n";
}

}  // namespace

int main() {
  std::cout << std::fixed << std::setprecision(3);

  // ------------------------------------------------------------------
  banner("1. synthetic corpus");
  // Three planted topics over 30 terms: topic k owns terms [10k, 10k+10).
  constexpr int kTopics = 3;
  constexpr int kTerms = 30;
  constexpr int kDocs = 240;
  constexpr int kMonths = 30;

  Matrix true_beta(kTopics, kTerms);
  for (std::size_t k = 0; k < kTopics; ++k)
    for (std::size_t w = 10 * k; w < 10 * (k + 1); ++w) true_beta(k, w) = 0.1;

  const auto sampled =
      lda::sample_corpus(true_beta, kDocs, 30.0, std::vector<double>(kTopics, 0.2), 42);
  std::cout << kDocs << " documents, " << kTerms << "-term vocabulary, " << kTopics
            << " planted topics, ~30 tokens per document\n";

  // Spread documents over a 30-month span; trends and innovation need time.
  std::vector<int> months(kDocs);
  for (int d = 0; d < kDocs; ++d) months[static_cast<std::size_t>(d)] = d % kMonths;

  // ------------------------------------------------------------------
  banner("2. online variational training");
  lda::LdaConfig cfg;
  cfg.k = kTopics;
  cfg.minibatch_size = 64;
  cfg.passes = 3;
  cfg.seed = 7;
  const auto fit = lda::fit_online(sampled.docs, cfg, kTerms, "walkthrough");
  std::cout << "per-word bound after each pass:";
  for (double b : fit.pass_bounds) std::cout << " " << b;
  std::cout << "\n";

  // ------------------------------------------------------------------
  banner("3. topics and their coherence");
  // Coherence counts sliding-window co-occurrence over token sequences.
  std::vector<std::vector<std::int32_t>> sequences;
  sequences.reserve(sampled.docs.size());
  for (const auto& bow : sampled.docs) {
    std::vector<std::int32_t> seq;
    for (const auto& [id, count] : bow.pairs)
      for (std::int32_t i = 0; i < count; ++i) seq.push_back(id);
    sequences.push_back(std::move(seq));
  }
  const auto scored = coherence::model_coherence(fit.model, sequences, 10, 5);
  for (int k = 0; k < kTopics; ++k) {
    std::cout << "topic " << k << " (coherence " << scored.per_topic[static_cast<std::size_t>(k)]
              << "):";
    for (std::int32_t id : lda::top_words(fit.model, k, 5)) std::cout << " " << term_name(id);
    std::cout << "\n";
  }
  std::cout << "mean coherence: " << scored.mean << "\n";

  // ------------------------------------------------------------------
  banner("4. document mixtures and monthly trends");
  const auto doc_topics = lda::infer_thetas(sampled.docs, fit.model);
  std::vector<std::vector<double>> thetas;
  thetas.reserve(doc_topics.size());
  for (const auto& dt : doc_topics) thetas.push_back(dt.theta);

  const auto series = trends::topic_series(thetas, months);
  std::cout << "monthly mean topic shares (first 3 of " << series.months.size()
            << " months):\n";
  for (std::size_t m = 0; m < 3 && m < series.months.size(); ++m) {
    std::cout << "  month " << std::setw(2) << series.months[m] << " ("
              << series.doc_counts[m] << " docs):";
    for (std::size_t k = 0; k < series.values.cols; ++k)
      std::cout << " " << series.values(m, k);
    std::cout << "\n";
  }

  trends::GroupMap groups;
  groups["first"] = {0};
  groups["rest"] = {1, 2};
  const auto grouped = trends::group_series(series, groups);
  for (const auto& row : trends::group_correlations(grouped))
    std::cout << "correlation(" << row.group_a << ", " << row.group_b
              << ") = " << row.r << "\n";

  // ------------------------------------------------------------------
  banner("5. novelty, transience, resonance");
  const innovation::ThetaTable table(thetas, months);
  const int window = 6;  // compare against 6 months on each side
  const auto scores = innovation::score_all(table, window);
  std::size_t n_valid = 0;
  std::size_t most_novel = 0;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    if (!scores[d].valid) continue;
    ++n_valid;
    if (!scores[most_novel].valid || scores[d].novelty > scores[most_novel].novelty)
      most_novel = d;
  }
  std::cout << n_valid << " of " << scores.size() << " documents have a full " << window
            << "-month window on both sides\n";
  std::cout << "most novel: doc " << most_novel << " (month " << months[most_novel]
            << ") novelty " << scores[most_novel].novelty << ", transience "
            << scores[most_novel].transience << ", resonance "
            << scores[most_novel].resonance << " bits\n";

  // ------------------------------------------------------------------
  banner("6. author aggregation with variant merging");
  // Attribute documents round-robin to a tiny author list that includes two
  // spellings of the same person.
  const std::vector<std::string> pool{"Ada Lovelace", "Lovelace, Ada", "Kurt Gödel",
                                      "Grace Hopper", "Alan Turing"};
  std::vector<std::vector<std::string>> doc_authors(scores.size());
  std::mt19937_64 rng(11);
  for (auto& authors : doc_authors) authors.push_back(pool[rng() % pool.size()]);

  entities::AggregateOptions opt;
  opt.dedupe = true;
  const auto entity_table = entities::aggregate_entities(doc_authors, scores, opt);
  std::cout << std::left;
  for (const auto& profile : entity_table.profiles) {
    std::cout << "  " << std::setw(14) << profile.name << " docs " << std::setw(3)
              << profile.n_docs;
    if (profile.variants.size() > 1)
      std::cout << " (" << profile.variants.size() << " spellings merged)";
    if (profile.has_z) std::cout << " dz " << profile.dz;
    std::cout << "\n";
  }
  if (entity_table.fit)
    std::cout << "resonance-on-novelty slope across authors: " << entity_table.fit->slope
              << "\n";

  std::cout << "\ndone.\n";
  return 0;
}
