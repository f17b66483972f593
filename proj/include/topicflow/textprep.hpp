#pragma once

// Tokenization, vocabulary construction with document-frequency and tf-idf
// pruning, and bag-of-words conversion.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "topicflow/common.hpp"

namespace topicflow::textprep {

struct TokenizerOptions {
  std::unordered_set<std::string> stopwords;
  std::size_t min_token_length = 2;
};

// Lowercased maximal runs of ASCII letters; digits and punctuation act as
// separators. Stopwords and tokens shorter than the minimum are dropped.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& opt) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= opt.min_token_length && !opt.stopwords.count(cur)) tokens.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

// One word per line; surrounding whitespace is trimmed, blank lines and
// lines starting with '#' are skipped.
inline std::unordered_set<std::string> load_stopwords(std::istream& in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
    while (!line.empty() && is_space(line.back())) line.pop_back();
    std::size_t lead = 0;
    while (lead < line.size() && is_space(line[lead])) ++lead;
    line.erase(0, lead);
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.insert(line);
  }
  return words;
}

struct Vocabulary {
  std::vector<std::string> terms;        // index order: lexicographic
  std::vector<std::int64_t> doc_freq;    // documents containing the term
  std::vector<double> tfidf_score;       // pruning score at build time
  std::int64_t n_docs = 0;
  std::unordered_map<std::string, std::int32_t> index;

  std::int32_t size() const { return static_cast<std::int32_t>(terms.size()); }

  std::int32_t id_of(const std::string& term) const {
    auto it = index.find(term);
    return it == index.end() ? -1 : it->second;
  }

  std::string fingerprint() const {
    std::uint64_t h = fnv1a(std::to_string(n_docs));
    for (const auto& t : terms) {
      h = fnv1a(t, h);
      h = fnv1a("\n", h);
    }
    return to_hex(h);
  }
};

// Pruning score: mean over the documents containing t of
// (count(t,d) / |d|) * ln(n_docs / doc_freq(t)).
// A term survives iff doc_freq/n_docs <= df_max and score >= tfidf_min.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                                   double df_max, double tfidf_min) {
  if (!(df_max > 0.0 && df_max <= 1.0)) throw ValidationError("df_max must be in (0, 1]");
  if (tfidf_min < 0.0) throw ValidationError("tfidf_min must be >= 0");
  if (docs.empty()) throw ValidationError("vocabulary: no documents");

  struct TermStats {
    std::int64_t df = 0;
    double tf_ratio_sum = 0.0;  // sum over containing docs of count/|d|
  };
  std::unordered_map<std::string, TermStats> stats;
  std::unordered_map<std::string, std::int32_t> doc_counts;
  for (const auto& tokens : docs) {
    if (tokens.empty()) continue;
    doc_counts.clear();
    for (const auto& t : tokens) ++doc_counts[t];
    const double inv_len = 1.0 / static_cast<double>(tokens.size());
    for (const auto& [term, count] : doc_counts) {
      auto& s = stats[term];
      s.df += 1;
      s.tf_ratio_sum += count * inv_len;
    }
  }

  const auto n_docs = static_cast<std::int64_t>(docs.size());
  Vocabulary vocab;
  vocab.n_docs = n_docs;

  std::vector<std::string> retained;
  for (const auto& [term, s] : stats) {
    const double df_ratio = static_cast<double>(s.df) / static_cast<double>(n_docs);
    const double score =
        (s.tf_ratio_sum / static_cast<double>(s.df)) *
        std::log(static_cast<double>(n_docs) / static_cast<double>(s.df));
    if (df_ratio <= df_max && score >= tfidf_min) retained.push_back(term);
  }
  if (retained.empty()) throw Error("vocabulary: all terms pruned");
  std::sort(retained.begin(), retained.end());

  vocab.terms = std::move(retained);
  vocab.doc_freq.reserve(vocab.terms.size());
  vocab.tfidf_score.reserve(vocab.terms.size());
  for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
    const auto& s = stats[vocab.terms[i]];
    vocab.doc_freq.push_back(s.df);
    vocab.tfidf_score.push_back(
        (s.tf_ratio_sum / static_cast<double>(s.df)) *
        std::log(static_cast<double>(n_docs) / static_cast<double>(s.df)));
    vocab.index[vocab.terms[i]] = static_cast<std::int32_t>(i);
  }
  return vocab;
}

struct BagOfWords {
  // (term id, count), sorted by term id; counts strictly positive
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;

  std::int64_t total_count() const {
    std::int64_t n = 0;
    for (const auto& [id, c] : pairs) n += c;
    return n;
  }
  bool empty() const { return pairs.empty(); }
};

// Out-of-vocabulary tokens are silently dropped.
inline BagOfWords to_bow(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::map<std::int32_t, std::int32_t> counts;
  for (const auto& t : tokens) {
    const std::int32_t id = vocab.id_of(t);
    if (id >= 0) ++counts[id];
  }
  BagOfWords bow;
  bow.pairs.assign(counts.begin(), counts.end());
  return bow;
}

// Term-id stream for the coherence window counter (OOV dropped).
inline std::vector<std::int32_t> to_id_sequence(const std::vector<std::string>& tokens,
                                                const Vocabulary& vocab) {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const std::int32_t id = vocab.id_of(t);
    if (id >= 0) ids.push_back(id);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Export: one term per line in index order, plus a JSON sidecar.

inline void save_vocabulary_terms(std::ostream& out, const Vocabulary& v) {
  for (const auto& t : v.terms) out << t << '\n';
}

inline nlohmann::json vocabulary_sidecar(const Vocabulary& v) {
  return nlohmann::json{{"n_docs", v.n_docs},
                        {"n_terms", v.size()},
                        {"doc_freq", v.doc_freq},
                        {"tfidf_score", v.tfidf_score},
                        {"fingerprint", v.fingerprint()}};
}

inline Vocabulary load_vocabulary(std::istream& terms_in, const nlohmann::json& sidecar) {
  Vocabulary v;
  std::string line;
  while (std::getline(terms_in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    v.index[line] = static_cast<std::int32_t>(v.terms.size());
    v.terms.push_back(line);
  }
  v.n_docs = sidecar.at("n_docs").get<std::int64_t>();
  v.doc_freq = sidecar.at("doc_freq").get<std::vector<std::int64_t>>();
  v.tfidf_score = sidecar.at("tfidf_score").get<std::vector<double>>();
  if (v.doc_freq.size() != v.terms.size() || v.tfidf_score.size() != v.terms.size())
    throw Error("vocabulary: sidecar does not match term list");
  return v;
}

}  // namespace topicflow::textprep
