#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlat/error.hpp"
#include "xlat/lang.hpp"
#include "xlat/util.hpp"

namespace xlat {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Record types. One JSON object per line on disk; the exact field names are
// documented in docs/formats.md.
// ---------------------------------------------------------------------------

struct Program {
  std::string id;
  Lang lang = Lang::python;
  std::string code;
  std::optional<std::string> docstring;
  std::optional<std::string> problem_id;
  std::optional<std::string> source_tag;

  bool operator==(const Program&) const = default;
};

enum class Origin { natural, generated, knn, random };

inline const char* to_string(Origin o) {
  switch (o) {
    case Origin::natural: return "natural";
    case Origin::generated: return "generated";
    case Origin::knn: return "knn";
    case Origin::random: return "random";
  }
  return "?";
}

inline Origin origin_from_string(std::string_view s) {
  if (s == "natural") return Origin::natural;
  if (s == "generated") return Origin::generated;
  if (s == "knn") return Origin::knn;
  if (s == "random") return Origin::random;
  throw ValidationError("unknown origin: '" + std::string(s) + "'");
}

struct ComparableExample {
  Program src;
  Program tgt;
  Origin origin = Origin::natural;

  bool operator==(const ComparableExample&) const = default;
};

struct ParallelExample {
  Program src;
  std::vector<Program> refs;  // refs[0] is the original ground-truth reference

  bool operator==(const ParallelExample&) const = default;
};

enum class DatasetKind { comparable, parallel, monolingual };

inline const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::comparable: return "comparable";
    case DatasetKind::parallel: return "parallel";
    case DatasetKind::monolingual: return "monolingual";
  }
  return "?";
}

inline DatasetKind dataset_kind_from_string(std::string_view s) {
  if (s == "comparable") return DatasetKind::comparable;
  if (s == "parallel") return DatasetKind::parallel;
  if (s == "monolingual" || s == "mono") return DatasetKind::monolingual;
  throw ValidationError("unknown dataset kind: '" + std::string(s) + "'");
}

template <class T>
struct RecordTraits;

template <>
struct RecordTraits<Program> {
  static constexpr DatasetKind kind = DatasetKind::monolingual;
};
template <>
struct RecordTraits<ComparableExample> {
  static constexpr DatasetKind kind = DatasetKind::comparable;
};
template <>
struct RecordTraits<ParallelExample> {
  static constexpr DatasetKind kind = DatasetKind::parallel;
};

// A dataset is a named, uniformly typed list of records. The record type
// fixes the kind, so a mixed dataset cannot be expressed at all.
template <class T>
struct Dataset {
  std::string name;
  std::vector<T> records;

  static constexpr DatasetKind kind = RecordTraits<T>::kind;
  size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

using MonoDataset = Dataset<Program>;
using ComparableDataset = Dataset<ComparableExample>;
using ParallelDataset = Dataset<ParallelExample>;

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

inline void validate_program(const Program& p) {
  if (p.id.empty()) throw ValidationError("program has empty id");
  if (trim(p.code).empty())
    throw ValidationError("program '" + p.id + "' has empty code");
}

inline void validate_record(const Program& p) { validate_program(p); }

inline void validate_record(const ComparableExample& ex) {
  validate_program(ex.src);
  validate_program(ex.tgt);
  if (ex.src.lang == ex.tgt.lang)
    throw ValidationError("comparable pair (" + ex.src.id + ", " + ex.tgt.id +
                          ") has src.lang == tgt.lang (" +
                          to_string(ex.src.lang) + ")");
}

inline void validate_record(const ParallelExample& ex) {
  validate_program(ex.src);
  if (ex.refs.empty())
    throw ValidationError("parallel example '" + ex.src.id + "' has no refs");
  const Lang ref_lang = ex.refs.front().lang;
  std::set<std::string> seen;
  for (const Program& r : ex.refs) {
    validate_program(r);
    if (r.lang != ref_lang)
      throw ValidationError("parallel example '" + ex.src.id +
                            "' mixes ref languages");
    if (!seen.insert(r.code).second)
      throw ValidationError("parallel example '" + ex.src.id +
                            "' has duplicate refs (ref '" + r.id + "')");
  }
  if (ref_lang == ex.src.lang)
    throw ValidationError("parallel example '" + ex.src.id +
                          "' has refs in the source language");
}

// Key used for duplicate detection. Monolingual corpora key on the program
// id, parallel sets on the source id. Comparable sets key on the full pair:
// the same program legitimately appears in many pairs (KNN neighbors,
// capped Cartesian products), but an identical pairing twice is a bug.
inline std::string record_key(const Program& p) { return p.id; }
inline std::string record_key(const ComparableExample& ex) {
  return ex.src.id + "\x1f" + ex.tgt.id + "\x1f" + to_string(ex.origin);
}
inline std::string record_key(const ParallelExample& ex) { return ex.src.id; }

// ---------------------------------------------------------------------------
// JSON (de)serialization. Field order is fixed so writes are byte-stable.
// ---------------------------------------------------------------------------

inline json program_to_json(const Program& p) {
  json j;
  j["id"] = p.id;
  j["lang"] = to_string(p.lang);
  j["code"] = p.code;
  if (p.docstring) j["docstring"] = *p.docstring;
  if (p.problem_id) j["problem_id"] = *p.problem_id;
  if (p.source_tag) j["source_tag"] = *p.source_tag;
  return j;
}

inline Program program_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("program record is not an object");
  Program p;
  if (j.contains("id")) p.id = j.at("id").get<std::string>();
  if (!j.contains("lang")) throw ParseError("program record missing 'lang'");
  p.lang = lang_from_string(j.at("lang").get<std::string>());
  if (!j.contains("code")) throw ParseError("program record missing 'code'");
  p.code = j.at("code").get<std::string>();
  if (j.contains("docstring")) p.docstring = j.at("docstring").get<std::string>();
  if (j.contains("problem_id")) p.problem_id = j.at("problem_id").get<std::string>();
  if (j.contains("source_tag")) p.source_tag = j.at("source_tag").get<std::string>();
  return p;
}

inline json record_to_json(const Program& p) { return program_to_json(p); }

inline json record_to_json(const ComparableExample& ex) {
  json j;
  j["src"] = program_to_json(ex.src);
  j["tgt"] = program_to_json(ex.tgt);
  j["origin"] = to_string(ex.origin);
  return j;
}

inline json record_to_json(const ParallelExample& ex) {
  json j;
  j["src"] = program_to_json(ex.src);
  json refs = json::array();
  for (const Program& r : ex.refs) refs.push_back(program_to_json(r));
  j["refs"] = std::move(refs);
  return j;
}

template <class T>
T record_from_json(const json& j);

template <>
inline Program record_from_json<Program>(const json& j) {
  return program_from_json(j);
}

template <>
inline ComparableExample record_from_json<ComparableExample>(const json& j) {
  if (!j.is_object()) throw ParseError("comparable record is not an object");
  ComparableExample ex;
  if (!j.contains("src") || !j.contains("tgt"))
    throw ParseError("comparable record missing 'src'/'tgt'");
  ex.src = program_from_json(j.at("src"));
  ex.tgt = program_from_json(j.at("tgt"));
  if (!j.contains("origin")) throw ParseError("comparable record missing 'origin'");
  ex.origin = origin_from_string(j.at("origin").get<std::string>());
  return ex;
}

template <>
inline ParallelExample record_from_json<ParallelExample>(const json& j) {
  if (!j.is_object()) throw ParseError("parallel record is not an object");
  ParallelExample ex;
  if (!j.contains("src")) throw ParseError("parallel record missing 'src'");
  ex.src = program_from_json(j.at("src"));
  if (!j.contains("refs") || !j.at("refs").is_array())
    throw ParseError("parallel record missing 'refs' array");
  for (const json& r : j.at("refs")) ex.refs.push_back(program_from_json(r));
  return ex;
}

// ---------------------------------------------------------------------------
// Line-delimited I/O.
// ---------------------------------------------------------------------------

struct LoadError {
  size_t line = 0;  // 1-based
  std::string message;
};

template <class T>
struct LoadReport {
  Dataset<T> dataset;
  std::vector<LoadError> errors;
  size_t lines = 0;  // non-blank lines seen; records + errors == lines
};

namespace detail {

// When a monolingual record carries no id, synthesize a stable one from the
// dataset name and line number.
inline void backfill_id(Program& p, const std::string& name, size_t line) {
  if (p.id.empty()) p.id = name + ":" + std::to_string(line);
}
inline void backfill_id(ComparableExample& ex, const std::string& name,
                        size_t line) {
  if (ex.src.id.empty()) ex.src.id = name + ":" + std::to_string(line) + ":src";
  if (ex.tgt.id.empty()) ex.tgt.id = name + ":" + std::to_string(line) + ":tgt";
}
inline void backfill_id(ParallelExample& ex, const std::string& name,
                        size_t line) {
  if (ex.src.id.empty()) ex.src.id = name + ":" + std::to_string(line);
  for (size_t i = 0; i < ex.refs.size(); ++i)
    if (ex.refs[i].id.empty())
      ex.refs[i].id = ex.src.id + "#ref" + std::to_string(i);
}

}  // namespace detail

// Parses every non-blank line; collects per-line errors instead of throwing.
// Guarantees records + errors == non-blank lines, so nothing is silently
// dropped.
template <class T>
LoadReport<T> load_dataset_lenient(const std::filesystem::path& path,
                                   std::string name = "") {
  if (name.empty()) name = path.stem().string();
  LoadReport<T> report;
  report.dataset.name = name;
  const std::string text = read_file(path);
  const std::vector<std::string> lines = split_lines(text);
  std::set<std::string> keys;
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    ++report.lines;
    try {
      json j = json::parse(lines[i]);
      T rec = record_from_json<T>(j);
      detail::backfill_id(rec, name, line_no);
      validate_record(rec);
      if (!keys.insert(record_key(rec)).second)
        throw ValidationError("duplicate id '" + record_key(rec) + "'");
      report.dataset.records.push_back(std::move(rec));
    } catch (const nlohmann::json::parse_error& e) {
      report.errors.push_back({line_no, std::string("malformed record: ") + e.what()});
    } catch (const Error& e) {
      report.errors.push_back({line_no, e.what()});
    }
  }
  return report;
}

// Strict load: throws on the first bad line, naming it.
template <class T>
Dataset<T> load_dataset(const std::filesystem::path& path,
                        std::string name = "") {
  LoadReport<T> report = load_dataset_lenient<T>(path, std::move(name));
  if (!report.errors.empty()) {
    const LoadError& e = report.errors.front();
    throw ParseError(path.string() + ":" + std::to_string(e.line) + ": " +
                     e.message);
  }
  return std::move(report.dataset);
}

template <class T>
void write_dataset(const Dataset<T>& ds, const std::filesystem::path& path) {
  std::string out;
  for (const T& rec : ds.records) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Corpus statistics.
// ---------------------------------------------------------------------------

struct StatsReport {
  DatasetKind kind = DatasetKind::monolingual;
  std::string name;
  size_t total = 0;
  std::map<std::string, size_t> by_language;  // monolingual only
  std::map<std::string, size_t> by_pair;      // comparable / parallel
  std::map<std::string, size_t> by_origin;    // comparable only
  std::map<std::string, size_t> per_problem;  // problem_id ("<none>" if unset)
  std::map<size_t, size_t> refs_histogram;    // parallel only: refs count -> n
  size_t distinct_problems = 0;

  json to_json() const {
    json j;
    j["kind"] = to_string(kind);
    j["name"] = name;
    j["total"] = total;
    if (!by_language.empty()) j["by_language"] = by_language;
    if (!by_pair.empty()) j["by_pair"] = by_pair;
    if (!by_origin.empty()) j["by_origin"] = by_origin;
    j["distinct_problems"] = distinct_problems;
    j["per_problem"] = per_problem;
    if (!refs_histogram.empty()) {
      json h = json::object();
      for (const auto& [k, v] : refs_histogram) h[std::to_string(k)] = v;
      j["refs_histogram"] = h;
    }
    return j;
  }
};

namespace detail {

inline std::string problem_key(const Program& p) {
  return p.problem_id ? *p.problem_id : std::string("<none>");
}

inline void accumulate(StatsReport& r, const Program& p) {
  r.by_language[to_string(p.lang)] += 1;
  r.per_problem[problem_key(p)] += 1;
}
inline void accumulate(StatsReport& r, const ComparableExample& ex) {
  r.by_pair[lang_pair_key(ex.src.lang, ex.tgt.lang)] += 1;
  r.by_origin[to_string(ex.origin)] += 1;
  r.per_problem[problem_key(ex.src)] += 1;
}
inline void accumulate(StatsReport& r, const ParallelExample& ex) {
  r.by_pair[lang_pair_key(ex.src.lang, ex.refs.front().lang)] += 1;
  r.per_problem[problem_key(ex.src)] += 1;
  r.refs_histogram[ex.refs.size()] += 1;
}

}  // namespace detail

template <class T>
StatsReport corpus_stats(const Dataset<T>& ds) {
  StatsReport r;
  r.kind = Dataset<T>::kind;
  r.name = ds.name;
  r.total = ds.records.size();
  for (const T& rec : ds.records) detail::accumulate(r, rec);
  r.distinct_problems = 0;
  for (const auto& [key, n] : r.per_problem)
    if (key != "<none>") ++r.distinct_problems;
  return r;
}

}  // namespace xlat
