#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xlat/corpus.hpp"
#include "xlat/model_client.hpp"
#include "xlat/tokenize.hpp"
#include "xlat/util.hpp"

namespace xlat {

struct PairingConfig {
  int max_per_problem = 1;
  int knn_k = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_per_problem < 1)
      throw ValidationError("max_per_problem must be >= 1");
    if (knn_k < 1) throw ValidationError("knn_k must be >= 1");
  }
};

namespace detail {

inline Lang uniform_lang(const MonoDataset& ds, const char* which) {
  if (ds.records.empty())
    throw ValidationError(std::string(which) + " dataset is empty");
  const Lang l = ds.records.front().lang;
  for (const Program& p : ds.records)
    if (p.lang != l)
      throw ValidationError(std::string(which) + " dataset mixes languages ('" +
                            p.id + "' is " + std::string(to_string(p.lang)) +
                            ")");
  return l;
}

inline void require_distinct_langs(const MonoDataset& src,
                                   const MonoDataset& tgt) {
  if (uniform_lang(src, "source") == uniform_lang(tgt, "target"))
    throw ValidationError("source and target datasets share a language");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Natural pairs: same contest problem, both languages.
// ---------------------------------------------------------------------------
inline ComparableDataset build_natural(const MonoDataset& mono_src,
                                       const MonoDataset& mono_tgt,
                                       const PairingConfig& cfg) {
  cfg.validate();
  ComparableDataset out;
  out.name = "natural";
  if (mono_src.records.empty() || mono_tgt.records.empty()) return out;
  detail::require_distinct_langs(mono_src, mono_tgt);

  auto group = [](const MonoDataset& ds, const char* which) {
    std::map<std::string, std::vector<const Program*>> by_problem;
    for (const Program& p : ds.records) {
      if (!p.problem_id || p.problem_id->empty())
        throw ValidationError(std::string(which) + " program '" + p.id +
                              "' has no problem_id");
      by_problem[*p.problem_id].push_back(&p);
    }
    return by_problem;
  };
  const auto src_groups = group(mono_src, "source");
  const auto tgt_groups = group(mono_tgt, "target");

  // problems in src-side first-appearance order
  std::vector<std::string> order;
  for (const Program& p : mono_src.records)
    if (std::find(order.begin(), order.end(), *p.problem_id) == order.end())
      order.push_back(*p.problem_id);

  const size_t m = static_cast<size_t>(cfg.max_per_problem);
  for (const std::string& problem : order) {
    const auto it = tgt_groups.find(problem);
    if (it == tgt_groups.end()) continue;
    const auto& srcs = src_groups.at(problem);
    const auto& tgts = it->second;
    for (size_t i = 0; i < std::min(m, srcs.size()); ++i)
      for (size_t j = 0; j < std::min(m, tgts.size()); ++j)
        out.records.push_back({*srcs[i], *tgts[j], Origin::natural});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generated pairs: model output from the docstring (optionally plus source).
// ---------------------------------------------------------------------------
inline constexpr std::string_view kPromptTemplateVersion = "xlat-prompt/1";

inline std::string make_generation_prompt(const Program& src,
                                          Lang tgt_lang,
                                          bool include_source) {
  std::string p = "Write a ";
  p += to_string(tgt_lang);
  p += " function implementing the following description.\n\n";
  p += src.docstring ? *src.docstring : "";
  p += "\n";
  if (include_source) {
    p += "\n[";
    p += to_string(src.lang);
    p += " source]\n";
    p += src.code;
    p += "\n";
  }
  return p;
}

struct SkipEntry {
  std::string program_id;
  std::string reason;
};

inline void write_skip_report(const std::filesystem::path& path,
                              const std::vector<SkipEntry>& entries) {
  std::string buf;
  for (const SkipEntry& e : entries) {
    json j;
    j["program_id"] = e.program_id;
    j["reason"] = e.reason;
    buf += j.dump();
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

struct GeneratedBuild {
  ComparableDataset dataset;
  std::vector<SkipEntry> skipped;
};

inline GeneratedBuild build_generated(const MonoDataset& mono_with_docs,
                                      GenerationClient& client, Lang tgt_lang,
                                      bool include_source_in_prompt,
                                      int n_candidates,
                                      const RetryPolicy& policy,
                                      int workers = 1) {
  if (n_candidates < 1) throw ValidationError("n_candidates must be >= 1");
  for (const Program& p : mono_with_docs.records) {
    if (p.lang == tgt_lang)
      throw ValidationError("program '" + p.id +
                            "' is already in the target language");
    if (!p.docstring || is_blank(*p.docstring))
      throw ValidationError("program '" + p.id + "' has no docstring");
  }

  struct Slot {
    bool ok = false;
    std::string reason;
    Candidate best;
  };
  std::vector<Slot> slots(mono_with_docs.records.size());
  run_parallel(mono_with_docs.records.size(), workers, [&](size_t i) {
    const Program& p = mono_with_docs.records[i];
    GenerationRequest req;
    req.prompt = make_generation_prompt(p, tgt_lang, include_source_in_prompt);
    req.target_lang = tgt_lang;
    req.n = n_candidates;
    req.request_id = p.id;
    try {
      const std::vector<Candidate> cands =
          request_candidates(client, req, policy);
      if (cands.empty()) {
        slots[i].reason = "no usable candidates";
        return;
      }
      slots[i].ok = true;
      slots[i].best = cands.front();
    } catch (const ClientError& e) {
      slots[i].reason = std::string("client error (") + to_string(e.kind) +
                        "): " + e.what();
    }
  });

  GeneratedBuild out;
  out.dataset.name = "generated";
  for (size_t i = 0; i < slots.size(); ++i) {
    const Program& src = mono_with_docs.records[i];
    if (!slots[i].ok) {
      out.skipped.push_back({src.id, slots[i].reason});
      continue;
    }
    Program tgt;
    tgt.id = src.id + "#gen";
    tgt.lang = tgt_lang;
    tgt.code = slots[i].best.text;
    tgt.problem_id = src.problem_id;
    tgt.source_tag = "generated";
    out.dataset.records.push_back({src, std::move(tgt), Origin::generated});
  }
  return out;
}

// ---------------------------------------------------------------------------
// TF-IDF embedding and KNN pairs.
// ---------------------------------------------------------------------------
struct EmbeddingVector {
  std::string program_id;
  std::vector<double> values;
};

inline std::vector<EmbeddingVector> embed_tfidf(
    const std::vector<Program>& programs) {
  if (programs.empty()) throw ValidationError("embed_tfidf: empty corpus");
  std::vector<std::vector<std::string>> docs;
  docs.reserve(programs.size());
  for (const Program& p : programs) {
    docs.push_back(code_tokens(p.code));
    if (docs.back().empty())
      throw ValidationError("program '" + p.id + "' has zero tokens");
  }

  std::map<std::string, int> df;
  for (const auto& doc : docs) {
    std::map<std::string, int> seen;
    for (const std::string& t : doc) seen[t] = 1;
    for (const auto& [t, _] : seen) ++df[t];
  }
  std::map<std::string, size_t> vocab;  // token -> dimension index
  size_t dim = 0;
  for (const auto& [t, _] : df) vocab[t] = dim++;

  const double n_docs = static_cast<double>(programs.size());
  std::vector<EmbeddingVector> out;
  out.reserve(programs.size());
  for (size_t d = 0; d < programs.size(); ++d) {
    EmbeddingVector v;
    v.program_id = programs[d].id;
    v.values.assign(dim, 0.0);
    std::map<std::string, int> tf;
    for (const std::string& t : docs[d]) ++tf[t];
    for (const auto& [t, cnt] : tf) {
      const double idf = 1.0 + std::log(n_docs / df.at(t));
      v.values[vocab.at(t)] = cnt * idf;
    }
    out.push_back(std::move(v));
  }
  return out;
}

inline void write_embeddings(const std::filesystem::path& path,
                             const std::vector<EmbeddingVector>& vecs) {
  std::string buf;
  for (const EmbeddingVector& v : vecs) {
    json j;
    j["program_id"] = v.program_id;
    j["dimension"] = v.values.size();
    j["values"] = v.values;
    buf += j.dump();
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

inline std::vector<EmbeddingVector> load_embeddings(
    const std::filesystem::path& path) {
  std::vector<EmbeddingVector> out;
  size_t line_no = 0;
  for (const std::string& line : split_lines(read_file(path))) {
    ++line_no;
    if (is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
    EmbeddingVector v;
    v.program_id = j.at("program_id").get<std::string>();
    v.values = j.at("values").get<std::vector<double>>();
    if (j.contains("dimension") &&
        j.at("dimension").get<size_t>() != v.values.size())
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": dimension field disagrees with values length");
    double norm2 = 0;
    for (double x : v.values) norm2 += x * x;
    if (norm2 <= 0)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": zero-norm vector for '" + v.program_id + "'");
    out.push_back(std::move(v));
  }
  return out;
}

inline ComparableDataset build_knn(const MonoDataset& mono_src,
                                   const MonoDataset& mono_tgt,
                                   const std::vector<EmbeddingVector>& src_vecs,
                                   const std::vector<EmbeddingVector>& tgt_vecs,
                                   const PairingConfig& cfg) {
  cfg.validate();
  detail::require_distinct_langs(mono_src, mono_tgt);

  auto index = [](const std::vector<EmbeddingVector>& vecs) {
    std::map<std::string, const EmbeddingVector*> m;
    for (const EmbeddingVector& v : vecs) m[v.program_id] = &v;
    return m;
  };
  const auto src_by_id = index(src_vecs);
  const auto tgt_by_id = index(tgt_vecs);

  size_t dim = 0;
  bool have_dim = false;
  auto check = [&](const MonoDataset& ds,
                   const std::map<std::string, const EmbeddingVector*>& m,
                   const char* which) {
    for (const Program& p : ds.records) {
      const auto it = m.find(p.id);
      if (it == m.end())
        throw ValidationError(std::string("missing embedding for ") + which +
                              " program '" + p.id + "'");
      if (!have_dim) {
        dim = it->second->values.size();
        have_dim = true;
      } else if (it->second->values.size() != dim) {
        throw ValidationError("embedding dimension mismatch at '" + p.id +
                              "'");
      }
    }
  };
  check(mono_src, src_by_id, "source");
  check(mono_tgt, tgt_by_id, "target");

  auto normalized = [](const EmbeddingVector& v) {
    double norm2 = 0;
    for (double x : v.values) norm2 += x * x;
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<double> out(v.values.size());
    for (size_t i = 0; i < v.values.size(); ++i) out[i] = v.values[i] * inv;
    return out;
  };
  std::map<std::string, std::vector<double>> tgt_unit;
  for (const Program& p : mono_tgt.records)
    tgt_unit[p.id] = normalized(*tgt_by_id.at(p.id));

  ComparableDataset out;
  out.name = "knn";
  for (const Program& sp : mono_src.records) {
    const std::vector<double> su = normalized(*src_by_id.at(sp.id));
    struct Scored {
      double sim;
      const Program* prog;
    };
    std::vector<Scored> scored;
    scored.reserve(mono_tgt.records.size());
    for (const Program& tp : mono_tgt.records) {
      const std::vector<double>& tu = tgt_unit.at(tp.id);
      double dot = 0;
      for (size_t i = 0; i < dim; ++i) dot += su[i] * tu[i];
      scored.push_back({dot, &tp});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return a.prog->id < b.prog->id;
    });
    const size_t take = std::min<size_t>(cfg.knn_k, scored.size());
    for (size_t i = 0; i < take; ++i)
      out.records.push_back({sp, *scored[i].prog, Origin::knn});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random pairs.
// ---------------------------------------------------------------------------
inline ComparableDataset build_random(const MonoDataset& mono_src,
                                      const MonoDataset& mono_tgt,
                                      const PairingConfig& cfg) {
  cfg.validate();
  detail::require_distinct_langs(mono_src, mono_tgt);
  Rng rng(cfg.seed);
  ComparableDataset out;
  out.name = "random";
  for (const Program& sp : mono_src.records) {
    const size_t pick = rng.below(mono_tgt.records.size());
    out.records.push_back({sp, mono_tgt.records[pick], Origin::random});
  }
  return out;
}

}  // namespace xlat
