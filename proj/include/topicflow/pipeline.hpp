#pragma once

// Batch orchestration: a validated run configuration, staged artifacts in a
// run directory with fingerprint manifests and no-op detection, plus a
// synthetic fixture generator for end-to-end runs.
//
// Stage order: ingest -> preprocess -> train -> coherence -> trends ->
// innovation -> entities -> export. Document topic mixtures (thetas.csv)
// are produced on demand by the first stage that needs them.

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "topicflow/coherence.hpp"
#include "topicflow/common.hpp"
#include "topicflow/corpus.hpp"
#include "topicflow/csv.hpp"
#include "topicflow/entities.hpp"
#include "topicflow/innovation.hpp"
#include "topicflow/lda.hpp"
#include "topicflow/textprep.hpp"
#include "topicflow/trends.hpp"

namespace topicflow::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write: " + path.string());
}

inline std::string fingerprint_bytes(std::string_view bytes) { return to_hex(fnv1a(bytes)); }

inline std::string fingerprint_file(const fs::path& path) {
  return fingerprint_bytes(read_file(path));
}

// Exclusive advisory lock on a run directory, released on destruction.
class LockFile {
 public:
  explicit LockFile(const fs::path& run_dir) {
    fs::create_directories(run_dir);
    path_ = run_dir / ".lock";
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw Error("run directory is locked by another process (" + path_.string() +
                  " exists; remove it if that process is gone)");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd_, pid.data(), pid.size());
  }
  ~LockFile() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  fs::path config_dir;  // paths in the file resolve against this

  fs::path input_path;
  std::string input_format = "csv";  // csv | jsonl
  corpus::ColumnMap columns;
  fs::path stopwords_path;  // optional
  fs::path groups_path;     // optional, enables group trends

  std::string epoch = "1986-01";
  corpus::IngestOptions ingest;

  double df_max = 0.5;
  double tfidf_min = 0.0075;
  int min_token_length = 2;

  lda::LdaConfig lda;

  int window_size = coherence::kDefaultWindowSize;
  int topn = coherence::kDefaultTopN;
  double epsilon = coherence::kDefaultEpsilon;
  coherence::GridAxes grid;

  int window_months = innovation::kDefaultWindowMonths;
  double smoothing_eps = innovation::kDefaultSmoothingEps;

  std::size_t author_top_n = 1000;
  std::size_t venue_top_n = 0;  // 0 keeps every venue
  double name_threshold = entities::kDefaultNameThreshold;
  std::size_t quadrant_pool = 100;
  std::size_t quadrant_pick = 5;

  std::uint64_t seed = 42;
  unsigned threads = 1;

  json canonical;  // normalized config with defaults filled in
};

namespace detail {

struct ConfigReader {
  std::vector<std::string> problems;

  void complain(const std::string& path, const std::string& msg) {
    problems.push_back(path + ": " + msg);
  }

  const json* object(const json& parent, const std::string& path, const char* key,
                     std::initializer_list<const char*> allowed) {
    if (!parent.contains(key)) return nullptr;
    const json& j = parent.at(key);
    const std::string here = path.empty() ? key : path + "." + key;
    if (!j.is_object()) {
      complain(here, "must be an object");
      return nullptr;
    }
    for (const auto& [k, v] : j.items()) {
      bool known = false;
      for (const char* a : allowed)
        if (k == a) known = true;
      if (!known) complain(here + "." + k, "unknown key");
    }
    return &j;
  }

  template <typename T>
  void number(const json& obj, const char* key, const std::string& path, T& out) {
    if (!obj.contains(key)) return;
    const json& j = obj.at(key);
    if (!j.is_number()) {
      complain(path + "." + key, "must be a number");
      return;
    }
    out = j.get<T>();
  }

  void string_field(const json& obj, const char* key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return;
    const json& j = obj.at(key);
    if (!j.is_string()) {
      complain(path + "." + key, "must be a string");
      return;
    }
    out = j.get<std::string>();
  }

  void bool_field(const json& obj, const char* key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    const json& j = obj.at(key);
    if (!j.is_boolean()) {
      complain(path + "." + key, "must be a boolean");
      return;
    }
    out = j.get<bool>();
  }
};

inline bool parse_epoch(const std::string& epoch, int& year, int& month) {
  if (epoch.size() != 7 || epoch[4] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u})
    if (!std::isdigit(static_cast<unsigned char>(epoch[i]))) return false;
  year = std::stoi(epoch.substr(0, 4));
  month = std::stoi(epoch.substr(5, 2));
  return month >= 1 && month <= 12;
}

}  // namespace detail

// Dotted-path override ("lda.k=5"); the value is parsed as JSON when
// possible and kept as a string otherwise.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override must look like section.key=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ValidationError("override has an empty path segment: " + assignment);
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null())
      throw ValidationError("override path crosses a non-object value: " + assignment);
    start = dot + 1;
  }
}

// Parses and validates the whole configuration; every problem is reported
// in one failure rather than the first found.
inline RunConfig parse_config(const json& root, const fs::path& config_dir) {
  detail::ConfigReader r;
  RunConfig cfg;
  cfg.config_dir = config_dir;

  if (!root.is_object()) throw ValidationError("configuration root must be a JSON object");
  for (const auto& [k, v] : root.items()) {
    static const std::set<std::string> sections{"input",     "corpus",   "vocabulary", "lda",
                                                "coherence", "innovation", "entities", "run"};
    if (!sections.count(k)) r.complain(k, "unknown section");
  }

  std::string input_path_raw, stopwords_raw, groups_raw;
  if (const json* input = r.object(root, "", "input",
                                   {"path", "format", "columns", "authors_delimiter",
                                    "stopwords", "groups"})) {
    r.string_field(*input, "path", "input", input_path_raw);
    r.string_field(*input, "format", "input", cfg.input_format);
    r.string_field(*input, "stopwords", "input", stopwords_raw);
    r.string_field(*input, "groups", "input", groups_raw);
    r.string_field(*input, "authors_delimiter", "input", cfg.columns.authors_delimiter);
    if (const json* cols = r.object(*input, "input", "columns",
                                    {"id", "title", "abstract", "venue", "authors", "date"})) {
      r.string_field(*cols, "id", "input.columns", cfg.columns.id);
      r.string_field(*cols, "title", "input.columns", cfg.columns.title);
      r.string_field(*cols, "abstract", "input.columns", cfg.columns.abstract_col);
      r.string_field(*cols, "venue", "input.columns", cfg.columns.venue);
      r.string_field(*cols, "authors", "input.columns", cfg.columns.authors);
      r.string_field(*cols, "date", "input.columns", cfg.columns.date);
    }
  }
  if (input_path_raw.empty()) r.complain("input.path", "is required");
  if (cfg.input_format != "csv" && cfg.input_format != "jsonl")
    r.complain("input.format", "must be csv or jsonl");
  if (cfg.columns.authors_delimiter.empty())
    r.complain("input.authors_delimiter", "must not be empty");
  for (const auto& [name, value] :
       {std::pair<const char*, const std::string*>{"id", &cfg.columns.id},
        {"title", &cfg.columns.title},
        {"abstract", &cfg.columns.abstract_col},
        {"venue", &cfg.columns.venue},
        {"authors", &cfg.columns.authors},
        {"date", &cfg.columns.date}}) {
    if (value->empty()) r.complain(std::string("input.columns.") + name, "must not be empty");
  }

  if (const json* cor = r.object(root, "", "corpus",
                                 {"epoch", "year_only_month", "include_title", "season_map"})) {
    r.string_field(*cor, "epoch", "corpus", cfg.epoch);
    r.number(*cor, "year_only_month", "corpus", cfg.ingest.year_only_month);
    r.bool_field(*cor, "include_title", "corpus", cfg.ingest.include_title);
    if (cor->contains("season_map")) {
      const json& sm = cor->at("season_map");
      if (!sm.is_object()) {
        r.complain("corpus.season_map", "must be an object");
      } else {
        for (const auto& [season, m] : sm.items()) {
          if (!m.is_number_integer() || m.get<int>() < 1 || m.get<int>() > 12)
            r.complain("corpus.season_map." + season, "must be a month number 1..12");
          else
            cfg.ingest.season_map[season] = m.get<int>();
        }
        for (const char* name : {"spring", "summer", "autumn", "winter"})
          if (!cfg.ingest.season_map.count(name))
            r.complain(std::string("corpus.season_map.") + name, "is required");
      }
    }
  }
  if (!detail::parse_epoch(cfg.epoch, cfg.ingest.epoch_year, cfg.ingest.epoch_month))
    r.complain("corpus.epoch", "must be YYYY-MM with a month 01..12");
  if (cfg.ingest.year_only_month < 1 || cfg.ingest.year_only_month > 12)
    r.complain("corpus.year_only_month", "must be 1..12");

  if (const json* voc =
          r.object(root, "", "vocabulary", {"df_max", "tfidf_min", "min_token_length"})) {
    r.number(*voc, "df_max", "vocabulary", cfg.df_max);
    r.number(*voc, "tfidf_min", "vocabulary", cfg.tfidf_min);
    r.number(*voc, "min_token_length", "vocabulary", cfg.min_token_length);
  }
  if (!(cfg.df_max > 0.0 && cfg.df_max <= 1.0)) r.complain("vocabulary.df_max", "must be in (0, 1]");
  if (cfg.tfidf_min < 0.0) r.complain("vocabulary.tfidf_min", "must be >= 0");
  if (cfg.min_token_length < 1) r.complain("vocabulary.min_token_length", "must be >= 1");

  if (const json* l = r.object(root, "", "lda",
                               {"k", "alpha_mode", "eta_mode", "minibatch_size", "tau0", "kappa",
                                "passes", "e_step_tol", "e_step_max_iter"})) {
    r.number(*l, "k", "lda", cfg.lda.k);
    r.string_field(*l, "alpha_mode", "lda", cfg.lda.alpha_mode);
    r.string_field(*l, "eta_mode", "lda", cfg.lda.eta_mode);
    r.number(*l, "minibatch_size", "lda", cfg.lda.minibatch_size);
    r.number(*l, "tau0", "lda", cfg.lda.tau0);
    r.number(*l, "kappa", "lda", cfg.lda.kappa);
    r.number(*l, "passes", "lda", cfg.lda.passes);
    r.number(*l, "e_step_tol", "lda", cfg.lda.e_step_tol);
    r.number(*l, "e_step_max_iter", "lda", cfg.lda.e_step_max_iter);
  }
  for (const auto& problem : lda::validate_config(cfg.lda)) r.problems.push_back(problem);

  if (const json* coh = r.object(root, "", "coherence",
                                 {"window_size", "topn", "epsilon", "grid"})) {
    r.number(*coh, "window_size", "coherence", cfg.window_size);
    r.number(*coh, "topn", "coherence", cfg.topn);
    r.number(*coh, "epsilon", "coherence", cfg.epsilon);
    if (const json* grid = r.object(*coh, "coherence", "grid",
                                    {"df_max", "tfidf_min", "k", "alpha_modes", "eta_modes"})) {
      auto array_of = [&](const char* key, auto& out, auto check, const char* what) {
        if (!grid->contains(key)) return;
        const json& arr = grid->at(key);
        const std::string here = std::string("coherence.grid.") + key;
        if (!arr.is_array() || arr.empty()) {
          r.complain(here, "must be a non-empty array");
          return;
        }
        out.clear();
        for (const auto& item : arr) {
          using V = typename std::decay_t<decltype(out)>::value_type;
          if constexpr (std::is_same_v<V, std::string>) {
            if (!item.is_string()) {
              r.complain(here, "entries must be strings");
              return;
            }
          } else {
            if (!item.is_number()) {
              r.complain(here, "entries must be numbers");
              return;
            }
          }
          V v = item.get<V>();
          if (!check(v)) {
            r.complain(here, std::string("entry out of range: ") + what);
            return;
          }
          out.push_back(std::move(v));
        }
      };
      array_of("df_max", cfg.grid.df_max_values,
               [](double v) { return v > 0.0 && v <= 1.0; }, "df_max in (0, 1]");
      array_of("tfidf_min", cfg.grid.tfidf_min_values,
               [](double v) { return v >= 0.0; }, "tfidf_min >= 0");
      array_of("k", cfg.grid.k_values, [](int v) { return v >= 2; }, "k >= 2");
      array_of("alpha_modes", cfg.grid.alpha_modes,
               [](const std::string& v) {
                 return v == "symmetric" || v == "asymmetric" || v == "auto";
               },
               "symmetric|asymmetric|auto");
      array_of("eta_modes", cfg.grid.eta_modes,
               [](const std::string& v) { return v == "symmetric" || v == "auto"; },
               "symmetric|auto");
    }
  }
  if (cfg.window_size < 1) r.complain("coherence.window_size", "must be >= 1");
  if (cfg.topn < 2) r.complain("coherence.topn", "must be >= 2");
  if (!(cfg.epsilon > 0.0)) r.complain("coherence.epsilon", "must be > 0");

  if (const json* inn = r.object(root, "", "innovation", {"window_months", "smoothing_eps"})) {
    r.number(*inn, "window_months", "innovation", cfg.window_months);
    r.number(*inn, "smoothing_eps", "innovation", cfg.smoothing_eps);
  }
  if (cfg.window_months < 1) r.complain("innovation.window_months", "must be >= 1");
  if (!(cfg.smoothing_eps > 0.0)) r.complain("innovation.smoothing_eps", "must be > 0");

  if (const json* ent = r.object(root, "", "entities",
                                 {"author_top_n", "venue_top_n", "name_threshold",
                                  "quadrant_pool", "quadrant_pick"})) {
    r.number(*ent, "author_top_n", "entities", cfg.author_top_n);
    r.number(*ent, "venue_top_n", "entities", cfg.venue_top_n);
    r.number(*ent, "name_threshold", "entities", cfg.name_threshold);
    r.number(*ent, "quadrant_pool", "entities", cfg.quadrant_pool);
    r.number(*ent, "quadrant_pick", "entities", cfg.quadrant_pick);
  }
  if (!(cfg.name_threshold >= 0.0 && cfg.name_threshold <= 1.0))
    r.complain("entities.name_threshold", "must be in [0, 1]");
  if (cfg.quadrant_pool < 1) r.complain("entities.quadrant_pool", "must be >= 1");
  if (cfg.quadrant_pick < 1) r.complain("entities.quadrant_pick", "must be >= 1");

  if (const json* run = r.object(root, "", "run", {"seed", "threads"})) {
    r.number(*run, "seed", "run", cfg.seed);
    r.number(*run, "threads", "run", cfg.threads);
  }
  if (cfg.threads < 1) r.complain("run.threads", "must be >= 1");

  if (!r.problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : r.problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }

  cfg.input_path = config_dir / fs::path(input_path_raw);
  if (!stopwords_raw.empty()) cfg.stopwords_path = config_dir / fs::path(stopwords_raw);
  if (!groups_raw.empty()) cfg.groups_path = config_dir / fs::path(groups_raw);

  cfg.canonical = json{
      {"input",
       {{"path", input_path_raw},
        {"format", cfg.input_format},
        {"stopwords", stopwords_raw},
        {"groups", groups_raw},
        {"authors_delimiter", cfg.columns.authors_delimiter},
        {"columns",
         {{"id", cfg.columns.id},
          {"title", cfg.columns.title},
          {"abstract", cfg.columns.abstract_col},
          {"venue", cfg.columns.venue},
          {"authors", cfg.columns.authors},
          {"date", cfg.columns.date}}}}},
      {"corpus",
       {{"epoch", cfg.epoch},
        {"year_only_month", cfg.ingest.year_only_month},
        {"include_title", cfg.ingest.include_title},
        {"season_map", cfg.ingest.season_map}}},
      {"vocabulary",
       {{"df_max", cfg.df_max},
        {"tfidf_min", cfg.tfidf_min},
        {"min_token_length", cfg.min_token_length}}},
      {"lda", lda::config_to_json(cfg.lda)},
      {"coherence",
       {{"window_size", cfg.window_size},
        {"topn", cfg.topn},
        {"epsilon", cfg.epsilon},
        {"grid",
         {{"df_max", cfg.grid.df_max_values},
          {"tfidf_min", cfg.grid.tfidf_min_values},
          {"k", cfg.grid.k_values},
          {"alpha_modes", cfg.grid.alpha_modes},
          {"eta_modes", cfg.grid.eta_modes}}}}},
      {"innovation",
       {{"window_months", cfg.window_months}, {"smoothing_eps", cfg.smoothing_eps}}},
      {"entities",
       {{"author_top_n", cfg.author_top_n},
        {"venue_top_n", cfg.venue_top_n},
        {"name_threshold", cfg.name_threshold},
        {"quadrant_pool", cfg.quadrant_pool},
        {"quadrant_pick", cfg.quadrant_pick}}},
      {"run", {{"seed", cfg.seed}, {"threads", cfg.threads}}}};
  return cfg;
}

inline RunConfig load_config(const fs::path& config_path,
                             const std::vector<std::string>& overrides = {}) {
  json root;
  try {
    root = json::parse(read_file(config_path));
  } catch (const json::exception& ex) {
    throw ValidationError("configuration is not valid JSON: " + std::string(ex.what()));
  }
  for (const auto& ov : overrides) apply_override(root, ov);
  return parse_config(root, fs::absolute(config_path).parent_path());
}

inline std::string config_hash(const json& j) { return fingerprint_bytes(j.dump()); }

// The configuration slice a stage's outputs actually depend on; a change
// elsewhere must not dirty the stage.
inline json stage_config(const RunConfig& cfg, std::string_view stage) {
  if (stage == "ingest") return {{"input", cfg.canonical.at("input")},
                                 {"corpus", cfg.canonical.at("corpus")},
                                 {"min_token_length", cfg.min_token_length}};
  if (stage == "preprocess") return {{"vocabulary", cfg.canonical.at("vocabulary")}};
  if (stage == "train") return {{"lda", cfg.canonical.at("lda")}, {"seed", cfg.seed}};
  if (stage == "coherence")
    return {{"window_size", cfg.window_size}, {"topn", cfg.topn}, {"epsilon", cfg.epsilon}};
  if (stage == "grid") return {{"coherence", cfg.canonical.at("coherence")},
                               {"lda", cfg.canonical.at("lda")},
                               {"seed", cfg.seed}};
  if (stage == "thetas") return json::object();
  if (stage == "trends") return {{"epoch", cfg.epoch}};
  if (stage == "innovation")
    return {{"innovation", cfg.canonical.at("innovation")}, {"epoch", cfg.epoch}};
  if (stage == "entities") return {{"entities", cfg.canonical.at("entities")}};
  if (stage == "export") return cfg.canonical;
  throw Error("unknown stage: " + std::string(stage));
}

// ---------------------------------------------------------------------------
// Manifests

inline constexpr int kManifestVersion = 1;

struct StageResult {
  bool ran = false;
  std::int64_t duration_ms = 0;
};

// Aligned bag-of-words store, one JSON object per line after a header.
inline void save_bows(std::ostream& out, const std::vector<std::string>& ids,
                      const std::vector<lda::BagOfWords>& bows, const std::string& vocab_fp) {
  json header{{"format", "topicflow-bows"}, {"version", 1}, {"vocab_fingerprint", vocab_fp}};
  out << header.dump() << '\n';
  for (std::size_t d = 0; d < bows.size(); ++d) {
    json pairs = json::array();
    for (const auto& [id, count] : bows[d].pairs) pairs.push_back({id, count});
    out << json{{"id", ids[d]}, {"bow", pairs}}.dump() << '\n';
  }
}

struct BowStore {
  std::vector<std::string> ids;
  std::vector<lda::BagOfWords> bows;
  std::string vocab_fingerprint;
};

inline BowStore load_bows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("bow store: empty file");
  json header = json::parse(line);
  if (header.value("format", "") != "topicflow-bows")
    throw Error("bow store: unrecognized format header");
  BowStore store;
  store.vocab_fingerprint = header.value("vocab_fingerprint", "");
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj = json::parse(line);
    store.ids.push_back(obj.at("id").get<std::string>());
    lda::BagOfWords bow;
    for (const auto& pair : obj.at("bow"))
      bow.pairs.emplace_back(pair.at(0).get<std::int32_t>(), pair.at(1).get<std::int32_t>());
    store.bows.push_back(std::move(bow));
  }
  return store;
}

struct ThetaStore {
  std::vector<std::string> ids;
  std::vector<int> months;
  std::vector<bool> from_prior;
  std::vector<std::vector<double>> thetas;
};

inline void save_thetas(std::ostream& out, const ThetaStore& store) {
  const std::size_t k_dim = store.thetas.empty() ? 0 : store.thetas[0].size();
  std::vector<std::string> header{"doc_id", "month_index", "from_prior"};
  for (std::size_t k = 0; k < k_dim; ++k) header.push_back("theta_" + std::to_string(k));
  csv::write_row(out, header);
  for (std::size_t d = 0; d < store.thetas.size(); ++d) {
    std::vector<std::string> row{store.ids[d], std::to_string(store.months[d]),
                                 store.from_prior[d] ? "true" : "false"};
    for (const double v : store.thetas[d]) row.push_back(math::format_double(v));
    csv::write_row(out, row);
  }
}

inline ThetaStore load_thetas(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields.size() < 4 || fields[0] != "doc_id")
    throw Error("theta table: missing header");
  const std::size_t k_dim = fields.size() - 3;
  ThetaStore store;
  while (reader.next(fields)) {
    if (fields.size() != k_dim + 3) throw Error("theta table: ragged row");
    store.ids.push_back(fields[0]);
    store.months.push_back(std::stoi(fields[1]));
    store.from_prior.push_back(fields[2] == "true");
    std::vector<double> theta(k_dim);
    for (std::size_t k = 0; k < k_dim; ++k) theta[k] = std::stod(fields[3 + k]);
    store.thetas.push_back(std::move(theta));
  }
  return store;
}

// ---------------------------------------------------------------------------
// Runner

class Runner {
 public:
  Runner(fs::path run_dir, RunConfig cfg, bool force = false, bool verbose = false)
      : run_dir_(std::move(run_dir)), cfg_(std::move(cfg)), force_(force), verbose_(verbose) {
    fs::create_directories(run_dir_);
  }

  static const std::vector<std::string>& stage_order() {
    static const std::vector<std::string> order{"ingest",     "preprocess", "train",
                                                "coherence",  "trends",     "innovation",
                                                "entities",   "export"};
    return order;
  }

  const fs::path& run_dir() const { return run_dir_; }
  const RunConfig& config() const { return cfg_; }

  StageResult run_stage(const std::string& name) {
    if (name == "ingest") return ingest();
    if (name == "preprocess") return preprocess();
    if (name == "train") return train();
    if (name == "coherence") return coherence_stage();
    if (name == "grid") return grid_stage();
    if (name == "trends") return trends_stage();
    if (name == "innovation") return innovation_stage();
    if (name == "entities") return entities_stage();
    if (name == "export") return export_stage();
    throw ValidationError("unknown stage: " + name);
  }

  StageResult ingest() {
    const json sub = stage_config(cfg_, "ingest");
    std::map<std::string, std::string> inputs;
    if (!fs::exists(cfg_.input_path))
      throw ValidationError("input records file not found: " + cfg_.input_path.string());
    inputs["records"] = fingerprint_file(cfg_.input_path);
    if (!cfg_.stopwords_path.empty()) {
      if (!fs::exists(cfg_.stopwords_path))
        throw ValidationError("stopwords file not found: " + cfg_.stopwords_path.string());
      inputs["stopwords"] = fingerprint_file(cfg_.stopwords_path);
    }
    const std::vector<std::string> outputs{"documents.jsonl", "ingest_report.json"};
    if (current("ingest", sub, inputs, outputs)) return {};
    const auto t0 = now();

    textprep::TokenizerOptions tok_opt;
    tok_opt.min_token_length = cfg_.min_token_length;
    if (!cfg_.stopwords_path.empty()) {
      std::ifstream sw(cfg_.stopwords_path);
      tok_opt.stopwords = textprep::load_stopwords(sw);
    }
    std::ifstream in(cfg_.input_path, std::ios::binary);
    if (!in) throw Error("cannot read input records: " + cfg_.input_path.string());
    corpus::ReadResult raw = cfg_.input_format == "csv"
                                 ? corpus::read_records_csv(in, cfg_.columns)
                                 : corpus::read_records_jsonl(in, cfg_.columns);
    auto [docs, report] = corpus::ingest(raw.records, cfg_.ingest, [&](std::string_view text) {
      return textprep::tokenize(text, tok_opt);
    });
    report.epoch = cfg_.epoch;
    for (auto& err : raw.row_errors) report.row_errors.push_back(std::move(err));

    {
      std::ostringstream buf;
      corpus::save_documents(buf, docs, cfg_.epoch);
      write_file(run_dir_ / "documents.jsonl", buf.str());
    }
    write_file(run_dir_ / "ingest_report.json", report.to_json().dump(2) + "\n");
    return finish("ingest", sub, inputs, outputs, t0);
  }

  StageResult preprocess() {
    const json sub = stage_config(cfg_, "preprocess");
    std::map<std::string, std::string> inputs{
        {"documents.jsonl", require("documents.jsonl", "ingest")}};
    const std::vector<std::string> outputs{"vocabulary.txt", "vocabulary.json", "bows.jsonl"};
    if (current("preprocess", sub, inputs, outputs)) return {};
    const auto t0 = now();

    const auto docs = load_docs();
    std::vector<std::vector<std::string>> token_docs;
    token_docs.reserve(docs.size());
    for (const auto& d : docs) token_docs.push_back(d.tokens);
    const auto vocab = textprep::build_vocabulary(token_docs, cfg_.df_max, cfg_.tfidf_min);

    {
      std::ostringstream buf;
      textprep::save_vocabulary_terms(buf, vocab);
      write_file(run_dir_ / "vocabulary.txt", buf.str());
    }
    write_file(run_dir_ / "vocabulary.json", textprep::vocabulary_sidecar(vocab).dump(2) + "\n");
    {
      std::ostringstream buf;
      std::vector<std::string> ids;
      std::vector<lda::BagOfWords> bows;
      ids.reserve(docs.size());
      bows.reserve(docs.size());
      for (const auto& d : docs) {
        ids.push_back(d.id);
        bows.push_back(textprep::to_bow(d.tokens, vocab));
      }
      save_bows(buf, ids, bows, vocab.fingerprint());
      write_file(run_dir_ / "bows.jsonl", buf.str());
    }
    return finish("preprocess", sub, inputs, outputs, t0);
  }

  StageResult train() {
    const json sub = stage_config(cfg_, "train");
    std::map<std::string, std::string> inputs{
        {"bows.jsonl", require("bows.jsonl", "preprocess")},
        {"vocabulary.json", require("vocabulary.json", "preprocess")}};
    const std::vector<std::string> outputs{"model.json"};
    if (current("train", sub, inputs, outputs)) return {};
    const auto t0 = now();

    std::ifstream bows_in(run_dir_ / "bows.jsonl");
    const BowStore store = load_bows(bows_in);
    const json sidecar = json::parse(read_file(run_dir_ / "vocabulary.json"));
    const auto vocab_size = sidecar.at("n_terms").get<std::size_t>();
    const auto vocab_fp = sidecar.at("fingerprint").get<std::string>();
    if (store.vocab_fingerprint != vocab_fp)
      throw Error("bows.jsonl was built against a different vocabulary; rerun preprocess");

    lda::LdaConfig lda_cfg = cfg_.lda;
    lda_cfg.seed = cfg_.seed;
    const auto fit = lda::fit_online(store.bows, lda_cfg, vocab_size, vocab_fp, cfg_.threads);
    json model_json = lda::save_model(fit.model);
    model_json["pass_bounds"] = fit.pass_bounds;
    write_file(run_dir_ / "model.json", model_json.dump() + "\n");
    return finish("train", sub, inputs, outputs, t0);
  }

  StageResult coherence_stage() {
    const json sub = stage_config(cfg_, "coherence");
    std::map<std::string, std::string> inputs{
        {"model.json", require("model.json", "train")},
        {"documents.jsonl", require("documents.jsonl", "ingest")},
        {"vocabulary.txt", require("vocabulary.txt", "preprocess")},
        {"vocabulary.json", require("vocabulary.json", "preprocess")}};
    const std::vector<std::string> outputs{"coherence.json"};
    if (current("coherence", sub, inputs, outputs)) return {};
    const auto t0 = now();

    const auto model = lda::load_model(json::parse(read_file(run_dir_ / "model.json")));
    const auto vocab = load_vocab();
    if (model.vocab_fingerprint != vocab.fingerprint())
      throw Error("model.json was trained against a different vocabulary; rerun train");
    const auto sequences = doc_sequences(vocab);
    const auto score =
        coherence::model_coherence(model, sequences, cfg_.window_size, cfg_.topn, cfg_.epsilon);
    json out{{"mean", score.mean},
             {"per_topic", score.per_topic},
             {"window_size", cfg_.window_size},
             {"topn", cfg_.topn},
             {"epsilon", cfg_.epsilon},
             {"k", model.k()}};
    write_file(run_dir_ / "coherence.json", out.dump(2) + "\n");
    return finish("coherence", sub, inputs, outputs, t0);
  }

  StageResult grid_stage() {
    const json sub = stage_config(cfg_, "grid");
    std::map<std::string, std::string> inputs{
        {"documents.jsonl", require("documents.jsonl", "ingest")}};
    const std::vector<std::string> outputs{"grid_results.csv"};
    if (current("grid", sub, inputs, outputs)) return {};
    const auto t0 = now();

    const auto docs = load_docs();
    std::vector<std::vector<std::string>> token_docs;
    token_docs.reserve(docs.size());
    for (const auto& d : docs) token_docs.push_back(d.tokens);
    const auto grid =
        coherence::grid_search(token_docs, cfg_.grid, cfg_.lda, cfg_.seed, cfg_.window_size,
                               cfg_.topn, cfg_.epsilon, cfg_.threads);
    std::ostringstream buf;
    coherence::write_grid_csv(buf, grid);
    write_file(run_dir_ / "grid_results.csv", buf.str());
    return finish("grid", sub, inputs, outputs, t0);
  }

  // Built on demand by trends or innovation, cached under its own manifest.
  void ensure_thetas() {
    const json sub = stage_config(cfg_, "thetas");
    std::map<std::string, std::string> inputs{
        {"model.json", require("model.json", "train")},
        {"bows.jsonl", require("bows.jsonl", "preprocess")},
        {"documents.jsonl", require("documents.jsonl", "ingest")}};
    const std::vector<std::string> outputs{"thetas.csv"};
    if (current("thetas", sub, inputs, outputs)) return;
    const auto t0 = now();

    const auto model = lda::load_model(json::parse(read_file(run_dir_ / "model.json")));
    std::ifstream bows_in(run_dir_ / "bows.jsonl");
    const BowStore store = load_bows(bows_in);
    if (store.vocab_fingerprint != model.vocab_fingerprint)
      throw Error("bows.jsonl and model.json disagree on the vocabulary");
    const auto docs = load_docs();
    if (docs.size() != store.bows.size())
      throw Error("documents.jsonl and bows.jsonl hold different document counts");

    const auto doc_topics = lda::infer_thetas(store.bows, model, cfg_.threads);
    ThetaStore thetas;
    thetas.ids = store.ids;
    thetas.months.reserve(docs.size());
    for (const auto& d : docs) thetas.months.push_back(d.month);
    thetas.from_prior.reserve(docs.size());
    thetas.thetas.reserve(docs.size());
    for (const auto& dt : doc_topics) {
      thetas.from_prior.push_back(dt.from_prior);
      thetas.thetas.push_back(dt.theta);
    }
    std::ostringstream buf;
    save_thetas(buf, thetas);
    write_file(run_dir_ / "thetas.csv", buf.str());
    finish("thetas", sub, inputs, outputs, t0);
  }

  StageResult trends_stage() {
    ensure_thetas();
    const json sub = stage_config(cfg_, "trends");
    std::map<std::string, std::string> inputs{{"thetas.csv", require("thetas.csv", "trends")}};
    std::vector<std::string> outputs{"topic_series.csv"};
    if (!cfg_.groups_path.empty()) {
      if (!fs::exists(cfg_.groups_path))
        throw ValidationError("groups file not found: " + cfg_.groups_path.string());
      inputs["groups"] = fingerprint_file(cfg_.groups_path);
      outputs.push_back("group_series.csv");
      outputs.push_back("correlations.csv");
    }
    if (current("trends", sub, inputs, outputs)) return {};
    const auto t0 = now();

    std::ifstream thetas_in(run_dir_ / "thetas.csv");
    const ThetaStore store = load_thetas(thetas_in);
    const auto series = trends::topic_series(store.thetas, store.months);
    {
      std::ostringstream buf;
      trends::write_topic_series_csv(buf, series, cfg_.ingest.epoch_year, cfg_.ingest.epoch_month);
      write_file(run_dir_ / "topic_series.csv", buf.str());
    }
    if (!cfg_.groups_path.empty()) {
      std::ifstream groups_in(cfg_.groups_path);
      const auto groups = trends::load_groups(groups_in);
      const auto gs = trends::group_series(series, groups);
      std::ostringstream buf;
      trends::write_group_series_csv(buf, gs, cfg_.ingest.epoch_year, cfg_.ingest.epoch_month);
      write_file(run_dir_ / "group_series.csv", buf.str());
      std::ostringstream cbuf;
      trends::write_correlations_csv(cbuf, trends::group_correlations(gs));
      write_file(run_dir_ / "correlations.csv", cbuf.str());
    }
    return finish("trends", sub, inputs, outputs, t0);
  }

  StageResult innovation_stage() {
    ensure_thetas();
    const json sub = stage_config(cfg_, "innovation");
    std::map<std::string, std::string> inputs{
        {"thetas.csv", require("thetas.csv", "innovation")}};
    const std::vector<std::string> outputs{"scores.csv", "regression.json"};
    if (current("innovation", sub, inputs, outputs)) return {};
    const auto t0 = now();

    std::ifstream thetas_in(run_dir_ / "thetas.csv");
    const ThetaStore store = load_thetas(thetas_in);
    const innovation::ThetaTable table(store.thetas, store.months, cfg_.smoothing_eps);
    const auto scores = innovation::score_all(table, cfg_.window_months, cfg_.threads);

    std::vector<std::string> labels;
    labels.reserve(store.months.size());
    for (const int m : store.months)
      labels.push_back(trends::month_label(m, cfg_.ingest.epoch_year, cfg_.ingest.epoch_month));
    {
      std::ostringstream buf;
      innovation::write_scores_csv(buf, store.ids, store.months, labels, scores);
      write_file(run_dir_ / "scores.csv", buf.str());
    }

    std::vector<double> nov, tra, res;
    for (const auto& s : scores) {
      if (!s.valid) continue;
      nov.push_back(s.novelty);
      tra.push_back(s.transience);
      res.push_back(s.resonance);
    }
    json reg{{"n_docs", scores.size()}, {"n_valid", nov.size()},
             {"window_months", cfg_.window_months}};
    if (nov.size() >= 2) {
      reg["novelty"] = {{"mean", math::mean(nov)},
                        {"sd", std::sqrt(math::sample_variance(nov))}};
      reg["transience"] = {{"mean", math::mean(tra)},
                           {"sd", std::sqrt(math::sample_variance(tra))}};
      reg["resonance"] = {{"mean", math::mean(res)},
                          {"sd", std::sqrt(math::sample_variance(res))}};
      try {
        const auto raw_fit = innovation::fit_ols(nov, res);
        reg["raw"] = {{"slope", raw_fit.slope},
                      {"intercept", raw_fit.intercept},
                      {"r_squared", raw_fit.r_squared}};
        const auto zn = innovation::zscore(nov);
        const auto zr = innovation::zscore(res);
        const auto z_fit = innovation::fit_ols(zn, zr);
        reg["standardized"] = {{"slope", z_fit.slope},
                               {"intercept", z_fit.intercept},
                               {"r_squared", z_fit.r_squared}};
        reg["status"] = "ok";
      } catch (const ValidationError& ex) {
        reg["status"] = std::string("degenerate: ") + ex.what();
      }
    } else {
      reg["status"] = "degenerate: fewer than 2 scored documents";
    }
    write_file(run_dir_ / "regression.json", reg.dump(2) + "\n");
    return finish("innovation", sub, inputs, outputs, t0);
  }

  StageResult entities_stage() {
    const json sub = stage_config(cfg_, "entities");
    std::map<std::string, std::string> inputs{
        {"scores.csv", require("scores.csv", "innovation")},
        {"documents.jsonl", require("documents.jsonl", "ingest")}};
    const std::vector<std::string> outputs{"authors.csv", "venues.csv", "author_quadrants.csv"};
    if (current("entities", sub, inputs, outputs)) return {};
    const auto t0 = now();

    const auto docs = load_docs();
    const auto scores = load_scores(docs);

    std::vector<std::vector<std::string>> author_lists, venue_lists;
    author_lists.reserve(docs.size());
    venue_lists.reserve(docs.size());
    for (const auto& d : docs) {
      author_lists.push_back(d.authors);
      venue_lists.push_back(d.venue.empty() ? std::vector<std::string>{}
                                            : std::vector<std::string>{d.venue});
    }
    entities::AggregateOptions author_opt;
    author_opt.top_n = cfg_.author_top_n;
    author_opt.dedupe = true;
    author_opt.threshold = cfg_.name_threshold;
    const auto authors = entities::aggregate_entities(author_lists, scores, author_opt);
    entities::AggregateOptions venue_opt;
    venue_opt.top_n = cfg_.venue_top_n;
    venue_opt.dedupe = false;
    const auto venues = entities::aggregate_entities(venue_lists, scores, venue_opt);

    {
      std::ostringstream buf;
      entities::write_entities_csv(buf, authors);
      write_file(run_dir_ / "authors.csv", buf.str());
    }
    {
      std::ostringstream buf;
      entities::write_entities_csv(buf, venues);
      write_file(run_dir_ / "venues.csv", buf.str());
    }
    {
      std::ostringstream buf;
      entities::write_quadrants_csv(
          buf, entities::quadrant_rows(authors, cfg_.quadrant_pool, cfg_.quadrant_pick));
      write_file(run_dir_ / "author_quadrants.csv", buf.str());
    }
    return finish("entities", sub, inputs, outputs, t0);
  }

  StageResult export_stage() {
    const json sub = stage_config(cfg_, "export");
    std::map<std::string, std::string> inputs{
        {"ingest_report.json", require("ingest_report.json", "ingest")},
        {"documents.jsonl", require("documents.jsonl", "ingest")}};
    static const std::vector<std::string> optional_artifacts{
        "vocabulary.txt", "vocabulary.json", "bows.jsonl",   "model.json",
        "coherence.json", "grid_results.csv", "thetas.csv",  "topic_series.csv",
        "group_series.csv", "correlations.csv", "scores.csv", "regression.json",
        "authors.csv",    "venues.csv",      "author_quadrants.csv"};
    for (const auto& name : optional_artifacts)
      if (fs::exists(run_dir_ / name)) inputs[name] = fingerprint_file(run_dir_ / name);
    const std::vector<std::string> outputs{"export/run_summary.json"};
    if (current("export", sub, inputs, outputs)) return {};
    const auto t0 = now();

    json summary{{"config_hash", config_hash(cfg_.canonical)},
                 {"config", cfg_.canonical},
                 {"artifacts", inputs},
                 {"ingest", json::parse(read_file(run_dir_ / "ingest_report.json"))}};
    if (fs::exists(run_dir_ / "model.json")) {
      const json model = json::parse(read_file(run_dir_ / "model.json"));
      summary["model"] = {{"k", model.at("k")},
                          {"v", model.at("v")},
                          {"updates_seen", model.at("updates_seen")},
                          {"pass_bounds", model.value("pass_bounds", json::array())}};
    }
    if (fs::exists(run_dir_ / "coherence.json"))
      summary["coherence"] = json::parse(read_file(run_dir_ / "coherence.json"));
    if (fs::exists(run_dir_ / "regression.json"))
      summary["regression"] = json::parse(read_file(run_dir_ / "regression.json"));
    if (fs::exists(run_dir_ / "correlations.csv")) {
      std::ifstream in(run_dir_ / "correlations.csv");
      csv::Reader reader(in);
      std::vector<std::string> fields;
      json rows = json::array();
      bool first = true;
      while (reader.next(fields)) {
        if (first) {
          first = false;
          continue;
        }
        if (fields.size() == 3)
          rows.push_back({{"group_a", fields[0]}, {"group_b", fields[1]}, {"r", fields[2]}});
      }
      summary["correlations"] = rows;
    }
    if (fs::exists(run_dir_ / "grid_results.csv")) {
      std::ifstream in(run_dir_ / "grid_results.csv");
      csv::Reader reader(in);
      std::vector<std::string> header, fields;
      if (reader.next(header) && reader.next(fields) && fields.size() == header.size()) {
        json best;
        for (std::size_t i = 0; i < header.size(); ++i) best[header[i]] = fields[i];
        summary["grid_best"] = best;
      }
    }
    write_file(run_dir_ / "export/run_summary.json", summary.dump(2) + "\n");
    return finish("export", sub, inputs, outputs, t0);
  }

 private:
  using Clock = std::chrono::steady_clock;
  static Clock::time_point now() { return Clock::now(); }

  std::string require(const std::string& artifact, const std::string& producer) {
    const fs::path path = run_dir_ / artifact;
    if (!fs::exists(path))
      throw MissingArtifactError("missing artifact " + artifact + "; run the '" + producer +
                                 "' stage first");
    return fingerprint_file(path);
  }

  std::vector<corpus::Document> load_docs() {
    std::ifstream in(run_dir_ / "documents.jsonl");
    if (!in) throw Error("cannot read documents.jsonl");
    return corpus::load_documents(in).first;
  }

  textprep::Vocabulary load_vocab() {
    std::ifstream terms(run_dir_ / "vocabulary.txt");
    if (!terms) throw Error("cannot read vocabulary.txt");
    const json sidecar = json::parse(read_file(run_dir_ / "vocabulary.json"));
    return textprep::load_vocabulary(terms, sidecar);
  }

  std::vector<std::vector<std::int32_t>> doc_sequences(const textprep::Vocabulary& vocab) {
    const auto docs = load_docs();
    std::vector<std::vector<std::int32_t>> sequences;
    sequences.reserve(docs.size());
    for (const auto& d : docs) sequences.push_back(textprep::to_id_sequence(d.tokens, vocab));
    return sequences;
  }

  // scores.csv rows must align with documents.jsonl.
  std::vector<innovation::InnovationScore> load_scores(const std::vector<corpus::Document>& docs) {
    std::ifstream in(run_dir_ / "scores.csv");
    if (!in) throw Error("cannot read scores.csv");
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields.size() < 7 || fields[0] != "doc_id")
      throw Error("scores.csv: missing header");
    std::vector<innovation::InnovationScore> scores;
    std::size_t row = 0;
    while (reader.next(fields)) {
      if (fields.size() < 7) throw Error("scores.csv: ragged row");
      if (row >= docs.size() || fields[0] != docs[row].id)
        throw Error("scores.csv does not align with documents.jsonl; rerun innovation");
      innovation::InnovationScore s;
      s.valid = fields[6] == "true";
      if (s.valid) {
        s.novelty = std::stod(fields[3]);
        s.transience = std::stod(fields[4]);
        s.resonance = std::stod(fields[5]);
      }
      scores.push_back(s);
      ++row;
    }
    if (row != docs.size())
      throw Error("scores.csv does not align with documents.jsonl; rerun innovation");
    return scores;
  }

  // A stage is current when its manifest matches the config slice, every
  // input fingerprint, and every output file as it exists on disk.
  bool current(const std::string& stage, const json& sub,
               const std::map<std::string, std::string>& inputs,
               const std::vector<std::string>& outputs) {
    if (force_) return false;
    const fs::path manifest_path = run_dir_ / (stage + ".manifest.json");
    if (!fs::exists(manifest_path)) return false;
    json manifest;
    try {
      manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception&) {
      return false;
    }
    if (manifest.value("format_version", -1) != kManifestVersion) return false;
    if (manifest.value("config_hash", "") != config_hash(sub)) return false;
    const json recorded_inputs = manifest.value("inputs", json::object());
    if (recorded_inputs.size() != inputs.size()) return false;
    for (const auto& [name, fp] : inputs) {
      if (!recorded_inputs.contains(name) || recorded_inputs.at(name).get<std::string>() != fp)
        return false;
    }
    const json recorded_outputs = manifest.value("outputs", json::object());
    for (const auto& name : outputs) {
      const fs::path path = run_dir_ / name;
      if (!fs::exists(path)) return false;
      if (!recorded_outputs.contains(name)) return false;
      if (recorded_outputs.at(name).get<std::string>() != fingerprint_file(path)) return false;
    }
    return true;
  }

  StageResult finish(const std::string& stage, const json& sub,
                     const std::map<std::string, std::string>& inputs,
                     const std::vector<std::string>& outputs, Clock::time_point t0) {
    json output_fps = json::object();
    for (const auto& name : outputs) output_fps[name] = fingerprint_file(run_dir_ / name);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now() - t0).count();
    json manifest{{"stage", stage},
                  {"format_version", kManifestVersion},
                  {"config_hash", config_hash(sub)},
                  {"config", sub},
                  {"inputs", inputs},
                  {"outputs", output_fps},
                  {"duration_ms", ms}};
    write_file(run_dir_ / (stage + ".manifest.json"), manifest.dump(2) + "\n");
    return {true, ms};
  }

  fs::path run_dir_;
  RunConfig cfg_;
  bool force_ = false;
  bool verbose_ = false;
};

// ---------------------------------------------------------------------------
// Synthetic end-to-end fixture

// Writes records.csv (202 rows, 200 ingestible), stopwords.txt, groups.csv
// and config.json into `dir`. Five planted topics over a 100-term
// vocabulary, 36 months of dates including season and year-only forms,
// author spelling variants and a venue with an embedded comma, so one run
// exercises every pipeline stage.
inline void make_fixture(const fs::path& dir, std::uint64_t seed = 7) {
  fs::create_directories(dir);
  constexpr int kTopics = 5;
  constexpr int kTerms = 100;
  constexpr int kDocs = 200;

  std::vector<std::string> terms;
  for (char c1 = 'a'; c1 <= 'd' && terms.size() < kTerms; ++c1)
    for (char c2 = 'a'; c2 <= 'z' && terms.size() < kTerms; ++c2)
      terms.push_back(std::string("t") + c1 + c2);

  Matrix beta(kTopics, kTerms);
  for (int k = 0; k < kTopics; ++k)
    for (int w = 0; w < kTerms; ++w)
      beta(static_cast<std::size_t>(k), static_cast<std::size_t>(w)) =
          (w >= 20 * k && w < 20 * (k + 1)) ? 0.042 : 0.002;

  const auto sampled = lda::sample_corpus(beta, kDocs, 40.0,
                                          std::vector<double>(kTopics, 0.1), seed);

  struct Person {
    std::vector<const char*> spellings;
  };
  const std::vector<Person> people{
      {{"Ada Lovelace", "Lovelace, Ada", "A. Lovelace"}},
      {{"Jos\xC3\xA9 N\xC3\xBA\xC3\xB1"
        "ez",
        "Jose Nunez"}},
      {{"Kurt G\xC3\xB6"
        "del",
        "G\xC3\xB6"
        "del, Kurt"}},
      {{"Alan Turing"}},
      {{"Grace Hopper", "Hopper, Grace"}},
      {{"John McCarthy"}},
      {{"Barbara Liskov"}},
      {{"Donald Knuth", "D. Knuth"}},
      {{"Edsger Dijkstra"}},
      {{"Frances Allen"}},
      {{"Tony Hoare"}},
      {{"Claude Shannon", "Shannon, Claude"}}};
  const std::vector<const char*> venues{
      "Journal of Synthetic Results", "Symposium on Generated Data",
      "Workshop on Reproducible Pipelines", "Conference on Statistical Text, Series B",
      "Annals of Artificial Corpora"};
  const std::vector<const char*> season_names{"Spring", "Summer", "Autumn", "Winter"};

  std::mt19937_64 rng(seed + 1);
  std::ostringstream out;
  csv::write_row(out, {"id", "title", "abstract", "venue", "authors", "date"});
  for (int d = 0; d < kDocs; ++d) {
    std::string abstract;
    for (const auto& [id, count] : sampled.docs[static_cast<std::size_t>(d)].pairs)
      for (std::int32_t c = 0; c < count; ++c) {
        if (!abstract.empty()) abstract += ' ';
        abstract += terms[static_cast<std::size_t>(id)];
      }
    if (abstract.empty()) abstract = terms[static_cast<std::size_t>(d % kTerms)];

    const int m = d % 36;
    const int year = 1990 + m / 12;
    const int month = m % 12 + 1;
    std::string date;
    if (d % 50 == 10) {
      date = std::string(season_names[static_cast<std::size_t>(d / 50) % 4]) + " " +
             std::to_string(year);
    } else if (d % 50 == 30) {
      date = std::to_string(year);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%02d", month);
      date = std::to_string(year) + "-" + buf;
    }

    const std::size_t n_authors = 1 + rng() % 3;
    std::string authors;
    std::set<std::size_t> chosen;
    while (chosen.size() < n_authors) chosen.insert(rng() % people.size());
    for (const std::size_t p : chosen) {
      if (!authors.empty()) authors += ";";
      const auto& spellings = people[p].spellings;
      authors += spellings[rng() % spellings.size()];
    }

    csv::write_row(out, {"doc-" + std::to_string(d), "Synthetic study " + std::to_string(d),
                         abstract, venues[rng() % venues.size()], authors, date});
  }
  csv::write_row(out, {"doc-no-abstract", "Placeholder without body", "",
                       venues[0], "Alan Turing", "1991-05"});
  csv::write_row(out, {"doc-no-date", "Placeholder without date", "taa tab tac",
                       venues[1], "Grace Hopper", "unknown"});
  write_file(dir / "records.csv", out.str());

  write_file(dir / "stopwords.txt", "the\nand\nwith\nfrom\n");
  write_file(dir / "groups.csv",
             "group,topic\nalpha,0\nalpha,1\nbeta,2\nbeta,3\ngamma,4\n");

  const json config{
      {"input",
       {{"path", "records.csv"}, {"format", "csv"}, {"stopwords", "stopwords.txt"},
        {"groups", "groups.csv"}}},
      {"corpus", {{"epoch", "1990-01"}}},
      {"vocabulary", {{"df_max", 1.0}, {"tfidf_min", 0.0}, {"min_token_length", 2}}},
      {"lda",
       {{"k", 5}, {"alpha_mode", "symmetric"}, {"eta_mode", "symmetric"},
        {"minibatch_size", 64}, {"tau0", 1.0}, {"kappa", 0.7}, {"passes", 2}}},
      {"coherence", {{"window_size", 10}, {"topn", 10}}},
      {"innovation", {{"window_months", 12}}},
      {"entities",
       {{"author_top_n", 0}, {"venue_top_n", 0}, {"quadrant_pool", 100}, {"quadrant_pick", 5}}},
      {"run", {{"seed", 42}, {"threads", 1}}}};
  write_file(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace topicflow::pipeline
