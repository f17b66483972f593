#pragma once

// Bibliographic record ingestion: exclusion rules for missing abstracts and
// unresolvable dates, season and year-only date repair, month indexing, and
// the month-binned document store.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "topicflow/common.hpp"
#include "topicflow/csv.hpp"

namespace topicflow::corpus {

struct RawRecord {
  std::string id;
  std::string title;
  std::optional<std::string> abstract_text;
  std::string venue;
  std::vector<std::string> authors;
  std::string date_raw;
};

struct Document {
  std::string id;
  std::vector<std::string> tokens;
  int month = 0;  // months since the configured epoch month
  std::string venue;
  std::vector<std::string> authors;
};

struct IngestReport {
  std::int64_t total = 0;
  std::int64_t excluded_no_abstract = 0;
  std::int64_t excluded_no_date = 0;
  std::int64_t repaired_season_dates = 0;
  std::int64_t repaired_year_only_dates = 0;
  std::int64_t retained = 0;
  std::string epoch;
  std::vector<std::string> row_errors;  // malformed rows, collected not fatal

  nlohmann::json to_json() const {
    return nlohmann::json{{"total", total},
                          {"excluded_no_abstract", excluded_no_abstract},
                          {"excluded_no_date", excluded_no_date},
                          {"repaired_season_dates", repaired_season_dates},
                          {"repaired_year_only_dates", repaired_year_only_dates},
                          {"retained", retained},
                          {"epoch", epoch},
                          {"row_errors", row_errors}};
  }
};

// month -> 1..12
using SeasonMap = std::map<std::string, int>;

inline SeasonMap default_season_map() {
  return {{"spring", 4}, {"summer", 7}, {"autumn", 10}, {"winter", 1}};
}

struct IngestOptions {
  SeasonMap season_map = default_season_map();
  int year_only_month = 6;     // year-only dates resolve to this month
  int epoch_year = 1986;       // month index 0 = epoch_year-epoch_month
  int epoch_month = 1;
  bool include_title = false;  // prepend title text to the abstract
};

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

namespace detail {

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '-' || c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

inline std::optional<int> month_name_to_number(std::string_view word) {
  static const std::unordered_map<std::string, int> names = {
      {"jan", 1},  {"january", 1},   {"feb", 2},  {"february", 2},
      {"mar", 3},  {"march", 3},     {"apr", 4},  {"april", 4},
      {"may", 5},  {"jun", 6},       {"june", 6}, {"jul", 7},
      {"july", 7}, {"aug", 8},       {"august", 8},
      {"sep", 9},  {"september", 9}, {"oct", 10}, {"october", 10},
      {"nov", 11}, {"november", 11}, {"dec", 12}, {"december", 12}};
  auto it = names.find(lower_ascii(word));
  if (it == names.end()) return std::nullopt;
  return it->second;
}

}  // namespace detail

struct ParsedDate {
  int year = 0;
  int month = 0;  // 1..12
  bool season_repaired = false;
  bool year_only_repaired = false;
};

// Accepted forms: "YYYY-MM", "YYYY-MM-DD" (day ignored), "YYYY" (repaired to
// the configured month), "<Season> YYYY" / "YYYY <Season>" via the season
// map, and "<MonthName> YYYY" / "YYYY <MonthName>" with English month names.
// "fall" is accepted as an alias of autumn. Returns nullopt when the string
// resolves to no month.
inline std::optional<ParsedDate> parse_date(std::string_view raw, const IngestOptions& opt) {
  const auto words = detail::split_words(raw);
  if (words.empty()) return std::nullopt;

  std::optional<int> year, month;
  bool season = false, year_only = false;

  for (const auto& w : words) {
    if (detail::all_digits(w)) {
      if (w.size() == 4 && !year) {
        year = std::stoi(w);
      } else if (w.size() <= 2 && !month) {
        const int m = std::stoi(w);
        if (m >= 1 && m <= 12) month = m;
        // out-of-range numbers (e.g. a day of month) are ignored
      }
      continue;
    }
    std::string key = detail::lower_ascii(w);
    if (key == "fall") key = "autumn";
    if (auto it = opt.season_map.find(key); it != opt.season_map.end() && !month) {
      month = it->second;
      season = true;
      continue;
    }
    if (auto m = detail::month_name_to_number(key); m && !month) month = *m;
  }

  if (!year) return std::nullopt;
  if (!month) {
    month = opt.year_only_month;
    year_only = true;
  }
  return ParsedDate{*year, *month, season, year_only};
}

inline int month_index(int year, int month, const IngestOptions& opt) {
  return (year - opt.epoch_year) * 12 + (month - opt.epoch_month);
}

// Applies the exclusion rules in order: abstract first, then date, so the
// two exclusion counts are disjoint. A record whose abstract yields no
// tokens counts as having no abstract. Tokenization is injected so this
// module stays independent of the text-preparation configuration.
inline std::pair<std::vector<Document>, IngestReport> ingest(
    const std::vector<RawRecord>& records, const IngestOptions& opt,
    const Tokenizer& tokenize) {
  for (const char* name : {"spring", "summer", "autumn", "winter"}) {
    if (!opt.season_map.count(name))
      throw ValidationError(std::string("season map missing entry: ") + name);
  }

  std::vector<Document> docs;
  IngestReport report;
  report.total = static_cast<std::int64_t>(records.size());
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", opt.epoch_year, opt.epoch_month);
    report.epoch = buf;
  }

  for (const auto& rec : records) {
    std::string text;
    if (rec.abstract_text) text = *rec.abstract_text;
    if (opt.include_title && !rec.title.empty()) text = rec.title + " " + text;

    std::vector<std::string> tokens;
    if (rec.abstract_text) tokens = tokenize(text);
    if (!rec.abstract_text || tokens.empty()) {
      ++report.excluded_no_abstract;
      continue;
    }

    const auto date = parse_date(rec.date_raw, opt);
    if (!date) {
      ++report.excluded_no_date;
      continue;
    }
    if (date->season_repaired) ++report.repaired_season_dates;
    if (date->year_only_repaired) ++report.repaired_year_only_dates;

    Document doc;
    doc.id = rec.id;
    doc.tokens = std::move(tokens);
    doc.month = month_index(date->year, date->month, opt);
    doc.venue = rec.venue;
    doc.authors = rec.authors;
    docs.push_back(std::move(doc));
  }

  report.retained = static_cast<std::int64_t>(docs.size());
  return {std::move(docs), std::move(report)};
}

// Partition by month. Every month between the corpus minimum and maximum is
// present, empty months included. Values are indices into the input list.
inline std::map<int, std::vector<std::size_t>> bin_by_month(const std::vector<Document>& docs) {
  std::map<int, std::vector<std::size_t>> bins;
  if (docs.empty()) return bins;
  int lo = docs.front().month, hi = docs.front().month;
  for (const auto& d : docs) {
    lo = std::min(lo, d.month);
    hi = std::max(hi, d.month);
  }
  for (int m = lo; m <= hi; ++m) bins[m];
  for (std::size_t i = 0; i < docs.size(); ++i) bins[docs[i].month].push_back(i);
  return bins;
}

// ---------------------------------------------------------------------------
// Record readers. Malformed rows are collected as errors, never fatal.

struct ColumnMap {
  std::string id = "id";
  std::string title = "title";
  std::string abstract_col = "abstract";
  std::string venue = "venue";
  std::string authors = "authors";
  std::string date = "date";
  std::string authors_delimiter = ";";
};

struct ReadResult {
  std::vector<RawRecord> records;
  std::vector<std::string> row_errors;
};

namespace detail {

inline std::vector<std::string> split_authors(std::string_view field, std::string_view delim) {
  std::vector<std::string> out;
  if (delim.empty()) delim = ";";
  std::size_t start = 0;
  while (start <= field.size()) {
    const std::size_t pos = field.find(delim, start);
    std::string_view part =
        field.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!part.empty() && std::isspace(static_cast<unsigned char>(part.front())))
      part.remove_prefix(1);
    while (!part.empty() && std::isspace(static_cast<unsigned char>(part.back())))
      part.remove_suffix(1);
    if (!part.empty()) out.emplace_back(part);
    if (pos == std::string_view::npos) break;
    start = pos + delim.size();
  }
  return out;
}

inline bool is_blank(std::string_view s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace detail

inline ReadResult read_records_csv(std::istream& in, const ColumnMap& cols) {
  ReadResult result;
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) return result;

  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos[header[i]] = i;

  auto require = [&](const std::string& name) {
    auto it = pos.find(name);
    if (it == pos.end()) throw ValidationError("csv: missing required column '" + name + "'");
    return it->second;
  };
  const std::size_t ci = require(cols.id);
  const std::size_t ca = require(cols.abstract_col);
  const std::size_t cv = require(cols.venue);
  const std::size_t cu = require(cols.authors);
  const std::size_t cd = require(cols.date);
  const auto title_it = pos.find(cols.title);  // title column is optional

  std::vector<std::string> fields;
  std::size_t row = 1;
  while (true) {
    bool ok;
    try {
      ok = reader.next(fields);
    } catch (const Error& e) {
      result.row_errors.push_back(e.what());
      break;  // stream-level quoting damage; nothing more can be parsed
    }
    if (!ok) break;
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      result.row_errors.push_back("row " + std::to_string(row) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
      continue;
    }
    RawRecord rec;
    rec.id = fields[ci];
    if (rec.id.empty()) {
      result.row_errors.push_back("row " + std::to_string(row) + ": empty id");
      continue;
    }
    if (title_it != pos.end()) rec.title = fields[title_it->second];
    if (!detail::is_blank(fields[ca])) rec.abstract_text = fields[ca];
    rec.venue = fields[cv];
    rec.authors = detail::split_authors(fields[cu], cols.authors_delimiter);
    rec.date_raw = fields[cd];
    result.records.push_back(std::move(rec));
  }
  return result;
}

inline ReadResult read_records_jsonl(std::istream& in, const ColumnMap& cols) {
  ReadResult result;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::is_blank(line)) continue;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      result.row_errors.push_back("row " + std::to_string(row) + ": invalid json object");
      continue;
    }
    RawRecord rec;
    rec.id = obj.value(cols.id, "");
    if (rec.id.empty()) {
      result.row_errors.push_back("row " + std::to_string(row) + ": missing id");
      continue;
    }
    rec.title = obj.value(cols.title, "");
    if (obj.contains(cols.abstract_col) && obj[cols.abstract_col].is_string()) {
      std::string a = obj[cols.abstract_col].get<std::string>();
      if (!detail::is_blank(a)) rec.abstract_text = std::move(a);
    }
    rec.venue = obj.value(cols.venue, "");
    if (obj.contains(cols.authors)) {
      const auto& a = obj[cols.authors];
      if (a.is_array()) {
        for (const auto& name : a)
          if (name.is_string()) rec.authors.push_back(name.get<std::string>());
      } else if (a.is_string()) {
        rec.authors = detail::split_authors(a.get<std::string>(), cols.authors_delimiter);
      }
    }
    if (obj.contains(cols.date)) {
      const auto& d = obj[cols.date];
      rec.date_raw = d.is_string() ? d.get<std::string>() : d.dump();
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Document store: JSON-lines with a versioned header line.

inline constexpr int kDocumentStoreVersion = 1;

inline void save_documents(std::ostream& out, const std::vector<Document>& docs,
                           const std::string& epoch) {
  nlohmann::json header{
      {"format", "topicflow-documents"}, {"version", kDocumentStoreVersion}, {"epoch", epoch}};
  out << header.dump() << '\n';
  for (const auto& d : docs) {
    nlohmann::json obj{{"id", d.id},
                       {"month", d.month},
                       {"venue", d.venue},
                       {"authors", d.authors},
                       {"tokens", d.tokens}};
    out << obj.dump() << '\n';
  }
}

inline std::pair<std::vector<Document>, std::string> load_documents(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("document store: empty file");
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("format", "") != "topicflow-documents")
    throw Error("document store: unrecognized format header");
  if (header.value("version", -1) != kDocumentStoreVersion)
    throw Error("document store: unsupported version");
  std::string epoch = header.value("epoch", "");

  std::vector<Document> docs;
  while (std::getline(in, line)) {
    if (detail::is_blank(line)) continue;
    nlohmann::json obj = nlohmann::json::parse(line);
    Document d;
    d.id = obj.at("id").get<std::string>();
    d.month = obj.at("month").get<int>();
    d.venue = obj.at("venue").get<std::string>();
    d.authors = obj.at("authors").get<std::vector<std::string>>();
    d.tokens = obj.at("tokens").get<std::vector<std::string>>();
    docs.push_back(std::move(d));
  }
  return {std::move(docs), std::move(epoch)};
}

}  // namespace topicflow::corpus
