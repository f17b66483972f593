#pragma once

// Author and venue aggregation: name normalization with diacritic folding,
// segment-based name similarity, an exact linear-assignment solver used for
// list matching and duplicate merging, per-entity innovation summaries, and
// the standardized novelty/resonance comparison across a cohort.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "topicflow/common.hpp"
#include "topicflow/csv.hpp"
#include "topicflow/innovation.hpp"

namespace topicflow::entities {

inline constexpr double kDefaultNameThreshold = 0.75;

namespace detail {

inline void append_folded_codepoint(std::string& out, unsigned int cp) {
  // Latin-1 supplement letters.
  switch (cp) {
    case 0xC6: case 0xE6: out += "ae"; return;
    case 0xD0: case 0xF0: out += 'd'; return;
    case 0xD8: case 0xF8: out += 'o'; return;
    case 0xDE: case 0xFE: out += "th"; return;
    case 0xDF: out += "ss"; return;
    default: break;
  }
  auto in_any = [cp](std::initializer_list<std::pair<unsigned, unsigned>> ranges) {
    for (auto [lo, hi] : ranges)
      if (cp >= lo && cp <= hi) return true;
    return false;
  };
  if (in_any({{0xC0, 0xC5}, {0xE0, 0xE5}})) { out += 'a'; return; }
  if (cp == 0xC7 || cp == 0xE7) { out += 'c'; return; }
  if (in_any({{0xC8, 0xCB}, {0xE8, 0xEB}})) { out += 'e'; return; }
  if (in_any({{0xCC, 0xCF}, {0xEC, 0xEF}})) { out += 'i'; return; }
  if (cp == 0xD1 || cp == 0xF1) { out += 'n'; return; }
  if (in_any({{0xD2, 0xD6}, {0xF2, 0xF6}})) { out += 'o'; return; }
  if (in_any({{0xD9, 0xDC}, {0xF9, 0xFC}})) { out += 'u'; return; }
  if (cp == 0xDD || cp == 0xFD || cp == 0xFF) { out += 'y'; return; }
  // Latin extended-A, grouped by base letter.
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp <= 0x105) { out += 'a'; return; }
    if (cp <= 0x10D) { out += 'c'; return; }
    if (cp <= 0x111) { out += 'd'; return; }
    if (cp <= 0x11B) { out += 'e'; return; }
    if (cp <= 0x123) { out += 'g'; return; }
    if (cp <= 0x127) { out += 'h'; return; }
    if (cp <= 0x131) { out += 'i'; return; }
    if (cp <= 0x133) { out += "ij"; return; }
    if (cp <= 0x135) { out += 'j'; return; }
    if (cp <= 0x138) { out += 'k'; return; }
    if (cp <= 0x142) { out += 'l'; return; }
    if (cp <= 0x14B) { out += 'n'; return; }
    if (cp <= 0x151) { out += 'o'; return; }
    if (cp <= 0x153) { out += "oe"; return; }
    if (cp <= 0x159) { out += 'r'; return; }
    if (cp <= 0x161) { out += 's'; return; }
    if (cp <= 0x167) { out += 't'; return; }
    if (cp <= 0x173) { out += 'u'; return; }
    if (cp <= 0x175) { out += 'w'; return; }
    if (cp <= 0x178) { out += 'y'; return; }
    if (cp <= 0x17E) { out += 'z'; return; }
    out += 's';  // long s
    return;
  }
  // Anything else non-ASCII passes through untouched.
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace detail

// Lowercases ASCII and transliterates Latin-1 / Latin extended-A letters to
// their unaccented base. Other byte sequences are preserved.
inline std::string fold_to_ascii(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
      ++i;
    } else if ((c & 0xE0) == 0xC0 && i + 1 < text.size() &&
               (static_cast<unsigned char>(text[i + 1]) & 0xC0) == 0x80) {
      const unsigned int cp = ((c & 0x1Fu) << 6) |
                              (static_cast<unsigned char>(text[i + 1]) & 0x3Fu);
      detail::append_folded_codepoint(out, cp);
      i += 2;
    } else {
      out += static_cast<char>(c);
      ++i;
    }
  }
  return out;
}

struct ParsedName {
  std::string raw;
  std::vector<std::string> segments;  // normalized, sorted

  bool empty() const { return segments.empty(); }
};

// "Last, First" inverts around the first comma; the rest is folded,
// lowercased and split on every non-alphanumeric byte, so initials with or
// without periods come out the same. Segments are sorted to make the
// greedy similarity matching order-free.
inline ParsedName parse_name(std::string_view raw) {
  ParsedName name;
  name.raw.assign(raw);
  std::string s(raw);
  if (const auto comma = s.find(','); comma != std::string::npos) {
    s = s.substr(comma + 1) + " " + s.substr(0, comma);
    std::replace(s.begin(), s.end(), ',', ' ');
  }
  const std::string folded = fold_to_ascii(s);
  std::string current;
  for (const char ch : folded) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') ||
                      static_cast<unsigned char>(ch) >= 0x80;
    if (keep) {
      current += ch;
    } else if (!current.empty()) {
      name.segments.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) name.segments.push_back(std::move(current));
  std::sort(name.segments.begin(), name.segments.end());
  return name;
}

// (exact segment matches + 0.5 * initial matches) / max(|A|, |B|). An
// initial match pairs a single-letter segment with an unmatched full
// segment starting with that letter.
inline double name_similarity(const ParsedName& a, const ParsedName& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t exact = 0;
  std::vector<std::string> rest_a, rest_b;
  {
    std::size_t i = 0, j = 0;
    while (i < a.segments.size() && j < b.segments.size()) {
      const int cmp = a.segments[i].compare(b.segments[j]);
      if (cmp == 0) {
        ++exact;
        ++i;
        ++j;
      } else if (cmp < 0) {
        rest_a.push_back(a.segments[i++]);
      } else {
        rest_b.push_back(b.segments[j++]);
      }
    }
    for (; i < a.segments.size(); ++i) rest_a.push_back(a.segments[i]);
    for (; j < b.segments.size(); ++j) rest_b.push_back(b.segments[j]);
  }
  std::size_t initial = 0;
  std::vector<bool> used_b(rest_b.size(), false), used_a(rest_a.size(), false);
  for (std::size_t i = 0; i < rest_a.size(); ++i) {
    if (rest_a[i].size() != 1) continue;
    for (std::size_t j = 0; j < rest_b.size(); ++j) {
      if (used_b[j] || rest_b[j].size() == 1 || rest_b[j][0] != rest_a[i][0]) continue;
      used_b[j] = true;
      used_a[i] = true;
      ++initial;
      break;
    }
  }
  for (std::size_t j = 0; j < rest_b.size(); ++j) {
    if (used_b[j] || rest_b[j].size() != 1) continue;
    for (std::size_t i = 0; i < rest_a.size(); ++i) {
      if (used_a[i] || rest_a[i].size() == 1 || rest_a[i][0] != rest_b[j][0]) continue;
      used_a[i] = true;
      used_b[j] = true;
      ++initial;
      break;
    }
  }
  const double denom = static_cast<double>(std::max(a.segments.size(), b.segments.size()));
  return (static_cast<double>(exact) + 0.5 * static_cast<double>(initial)) / denom;
}

// Exact minimum-cost assignment (shortest augmenting path with potentials,
// O(n^3)). Rectangular inputs are padded square at `pad_cost`; the result
// maps each real row to its real column or -1 when it lands on padding.
inline std::vector<int> lap_solve(const Matrix& cost, double pad_cost = 1.0) {
  const std::size_t n_rows = cost.rows;
  const std::size_t n_cols = cost.cols;
  if (n_rows == 0 || n_cols == 0) throw ValidationError("lap: empty cost matrix");
  const std::size_t n = std::max(n_rows, n_cols);
  auto at = [&](std::size_t r, std::size_t c) {
    return r < n_rows && c < n_cols ? cost(r, c) : pad_cost;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n_rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] == 0) continue;
    const std::size_t r = p[j] - 1;
    if (r < n_rows && j - 1 < n_cols) row_to_col[r] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

struct MatchPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double similarity = 0.0;
};

// One-to-one matching of two name lists: assignment minimizes total
// (1 - similarity), pairs below the threshold are dropped.
inline std::vector<MatchPair> match_names(const std::vector<ParsedName>& list_a,
                                          const std::vector<ParsedName>& list_b,
                                          double threshold = kDefaultNameThreshold) {
  if (list_a.empty() || list_b.empty()) return {};
  Matrix cost(list_a.size(), list_b.size());
  for (std::size_t i = 0; i < list_a.size(); ++i)
    for (std::size_t j = 0; j < list_b.size(); ++j)
      cost(i, j) = 1.0 - name_similarity(list_a[i], list_b[j]);
  const auto assignment = lap_solve(cost);
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < list_a.size(); ++i) {
    if (assignment[i] < 0) continue;
    const auto j = static_cast<std::size_t>(assignment[i]);
    const double sim = name_similarity(list_a[i], list_b[j]);
    if (sim >= threshold) out.push_back({i, j, sim});
  }
  return out;
}

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);  // smaller index wins, keeps components stable
    parent[b] = a;
  }
};

}  // namespace detail

// Groups likely duplicates: assignment of the list against itself with the
// diagonal forbidden, merging assigned pairs at or above the threshold.
// Returns a component id per name (the smallest member index).
inline std::vector<std::size_t> dedupe_names(const std::vector<ParsedName>& names,
                                             double threshold = kDefaultNameThreshold) {
  detail::UnionFind uf(names.size());
  if (names.size() >= 2) {
    constexpr double kForbidden = 1e9;
    Matrix cost(names.size(), names.size());
    std::vector<std::vector<double>> sims(names.size(), std::vector<double>(names.size(), 0.0));
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (std::size_t j = i; j < names.size(); ++j) {
        const double sim = i == j ? 0.0 : name_similarity(names[i], names[j]);
        sims[i][j] = sims[j][i] = sim;
        cost(i, j) = i == j ? kForbidden : 1.0 - sim;
        cost(j, i) = cost(i, j);
      }
    }
    const auto assignment = lap_solve(cost, kForbidden);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (assignment[i] < 0) continue;
      const auto j = static_cast<std::size_t>(assignment[i]);
      if (j != i && sims[i][j] >= threshold) uf.unite(i, j);
    }
  }
  std::vector<std::size_t> component(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) component[i] = uf.find(i);
  return component;
}

// ---------------------------------------------------------------------------
// Aggregation

struct EntityProfile {
  std::string name;                    // most frequent raw variant
  std::vector<std::string> variants;   // distinct raw spellings, sorted
  std::size_t n_docs = 0;              // distinct documents attributed
  std::size_t n_scored = 0;            // of those, documents with valid scores
  double mean_novelty = std::numeric_limits<double>::quiet_NaN();
  double mean_transience = std::numeric_limits<double>::quiet_NaN();
  double mean_resonance = std::numeric_limits<double>::quiet_NaN();
  double z_novelty = std::numeric_limits<double>::quiet_NaN();
  double z_resonance = std::numeric_limits<double>::quiet_NaN();
  double dz = std::numeric_limits<double>::quiet_NaN();
  bool has_z = false;
};

struct EntityTable {
  std::vector<EntityProfile> profiles;  // ranked by n_docs desc, then name
  std::optional<innovation::RegressionFit> fit;  // z_resonance on z_novelty
};

struct AggregateOptions {
  std::size_t top_n = 0;     // 0 keeps everyone; otherwise ties at the cutoff stay in
  bool dedupe = false;       // merge near-duplicate names within the selection
  double threshold = kDefaultNameThreshold;
};

// Builds ranked entity profiles from per-document attribution lists (every
// listed entity gets full credit for the document). Selection by document
// count happens before duplicate merging, mirroring a top-N-authors then
// merge workflow; ties at the cutoff are all kept.
inline EntityTable aggregate_entities(const std::vector<std::vector<std::string>>& doc_entities,
                                      const std::vector<innovation::InnovationScore>& scores,
                                      const AggregateOptions& opt = {}) {
  if (doc_entities.size() != scores.size())
    throw ValidationError("aggregate: attribution and score lengths differ");

  // Distinct documents per raw spelling, plus raw occurrence counts.
  std::map<std::string, std::set<std::size_t>> docs_by_raw;
  std::map<std::string, std::size_t> occurrences;
  for (std::size_t d = 0; d < doc_entities.size(); ++d) {
    for (const auto& raw : doc_entities[d]) {
      if (raw.empty()) continue;
      docs_by_raw[raw].insert(d);
      ++occurrences[raw];
    }
  }
  if (docs_by_raw.empty()) throw ValidationError("aggregate: no entities found");

  std::vector<const std::string*> ranked;
  ranked.reserve(docs_by_raw.size());
  for (const auto& [raw, docs] : docs_by_raw) ranked.push_back(&raw);
  std::sort(ranked.begin(), ranked.end(), [&](const std::string* a, const std::string* b) {
    const auto ca = docs_by_raw[*a].size(), cb = docs_by_raw[*b].size();
    if (ca != cb) return ca > cb;
    return *a < *b;
  });
  if (opt.top_n > 0 && ranked.size() > opt.top_n) {
    const std::size_t cutoff = docs_by_raw[*ranked[opt.top_n - 1]].size();
    std::size_t keep = opt.top_n;
    while (keep < ranked.size() && docs_by_raw[*ranked[keep]].size() >= cutoff) ++keep;
    ranked.resize(keep);
  }

  std::vector<std::size_t> component(ranked.size());
  if (opt.dedupe) {
    std::vector<ParsedName> parsed;
    parsed.reserve(ranked.size());
    for (const auto* raw : ranked) parsed.push_back(parse_name(*raw));
    component = dedupe_names(parsed, opt.threshold);
  } else {
    std::iota(component.begin(), component.end(), 0);
  }

  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < ranked.size(); ++i) members[component[i]].push_back(i);

  EntityTable table;
  table.profiles.reserve(members.size());
  for (const auto& [root, idxs] : members) {
    EntityProfile prof;
    std::set<std::size_t> all_docs;
    std::size_t best_occ = 0;
    for (const std::size_t i : idxs) {
      const std::string& raw = *ranked[i];
      prof.variants.push_back(raw);
      all_docs.insert(docs_by_raw[raw].begin(), docs_by_raw[raw].end());
      const std::size_t occ = occurrences[raw];
      if (occ > best_occ || (occ == best_occ && (prof.name.empty() || raw < prof.name))) {
        best_occ = occ;
        prof.name = raw;
      }
    }
    std::sort(prof.variants.begin(), prof.variants.end());
    prof.n_docs = all_docs.size();
    double sn = 0.0, st = 0.0, sr = 0.0;
    for (const std::size_t d : all_docs) {
      if (!scores[d].valid) continue;
      ++prof.n_scored;
      sn += scores[d].novelty;
      st += scores[d].transience;
      sr += scores[d].resonance;
    }
    if (prof.n_scored > 0) {
      prof.mean_novelty = sn / static_cast<double>(prof.n_scored);
      prof.mean_transience = st / static_cast<double>(prof.n_scored);
      prof.mean_resonance = sr / static_cast<double>(prof.n_scored);
    }
    table.profiles.push_back(std::move(prof));
  }

  std::sort(table.profiles.begin(), table.profiles.end(),
            [](const EntityProfile& a, const EntityProfile& b) {
              if (a.n_docs != b.n_docs) return a.n_docs > b.n_docs;
              return a.name < b.name;
            });

  // Standardize across entities that have scores, then take the residual
  // against the fitted resonance-on-novelty line.
  std::vector<std::size_t> scored;
  for (std::size_t i = 0; i < table.profiles.size(); ++i)
    if (table.profiles[i].n_scored > 0) scored.push_back(i);
  if (scored.size() >= 2) {
    std::vector<double> nov(scored.size()), res(scored.size());
    for (std::size_t s = 0; s < scored.size(); ++s) {
      nov[s] = table.profiles[scored[s]].mean_novelty;
      res[s] = table.profiles[scored[s]].mean_resonance;
    }
    try {
      const auto zn = innovation::zscore(nov);
      const auto zr = innovation::zscore(res);
      const auto fit = innovation::fit_ols(zn, zr);
      const auto dz = innovation::delta_z(zn, zr, fit);
      for (std::size_t s = 0; s < scored.size(); ++s) {
        auto& prof = table.profiles[scored[s]];
        prof.z_novelty = zn[s];
        prof.z_resonance = zr[s];
        prof.dz = dz[s];
        prof.has_z = true;
      }
      table.fit = fit;
    } catch (const ValidationError&) {
      // Degenerate cohort (zero variance): plain means stay available.
    }
  }
  return table;
}

inline void write_entities_csv(std::ostream& out, const EntityTable& table) {
  csv::write_row(out, {"rank", "name", "variants", "n_docs", "n_scored", "mean_novelty",
                       "mean_transience", "mean_resonance", "z_novelty", "z_resonance",
                       "delta_z"});
  std::size_t rank = 1;
  for (const auto& prof : table.profiles) {
    std::string variants;
    for (std::size_t i = 0; i < prof.variants.size(); ++i) {
      if (i) variants += "|";
      variants += prof.variants[i];
    }
    const bool scored = prof.n_scored > 0;
    csv::write_row(out, {std::to_string(rank++), prof.name, variants,
                         std::to_string(prof.n_docs), std::to_string(prof.n_scored),
                         scored ? math::format_double(prof.mean_novelty) : std::string(),
                         scored ? math::format_double(prof.mean_transience) : std::string(),
                         scored ? math::format_double(prof.mean_resonance) : std::string(),
                         prof.has_z ? math::format_double(prof.z_novelty) : std::string(),
                         prof.has_z ? math::format_double(prof.z_resonance) : std::string(),
                         prof.has_z ? math::format_double(prof.dz) : std::string()});
  }
}

struct QuadrantRow {
  std::string quadrant;
  const EntityProfile* profile = nullptr;
};

// Representative entities per quadrant of the (z_novelty, delta_z) plane:
// from the `pool` highest-ranked scored entities, the `pick` largest |dz|
// per quadrant.
inline std::vector<QuadrantRow> quadrant_rows(const EntityTable& table, std::size_t pool,
                                              std::size_t pick) {
  std::vector<const EntityProfile*> candidates;
  for (const auto& prof : table.profiles) {
    if (candidates.size() >= pool) break;
    if (prof.has_z) candidates.push_back(&prof);
  }
  const char* labels[4] = {"novel_resonant", "novel_transient", "conventional_resonant",
                           "conventional_transient"};
  std::vector<QuadrantRow> out;
  for (int q = 0; q < 4; ++q) {
    const bool want_novel = q < 2;
    const bool want_resonant = q % 2 == 0;
    std::vector<const EntityProfile*> bucket;
    for (const auto* prof : candidates)
      if ((prof->z_novelty >= 0.0) == want_novel && (prof->dz >= 0.0) == want_resonant)
        bucket.push_back(prof);
    std::sort(bucket.begin(), bucket.end(), [](const EntityProfile* a, const EntityProfile* b) {
      const double da = std::fabs(a->dz), db = std::fabs(b->dz);
      if (da != db) return da > db;
      return a->name < b->name;
    });
    if (bucket.size() > pick) bucket.resize(pick);
    for (const auto* prof : bucket) out.push_back({labels[q], prof});
  }
  return out;
}

inline void write_quadrants_csv(std::ostream& out, const std::vector<QuadrantRow>& rows) {
  csv::write_row(out, {"quadrant", "name", "n_docs", "n_scored", "z_novelty", "z_resonance",
                       "delta_z"});
  for (const auto& row : rows) {
    const auto& prof = *row.profile;
    csv::write_row(out, {row.quadrant, prof.name, std::to_string(prof.n_docs),
                         std::to_string(prof.n_scored), math::format_double(prof.z_novelty),
                         math::format_double(prof.z_resonance), math::format_double(prof.dz)});
  }
}

}  // namespace topicflow::entities
