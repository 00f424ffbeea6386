#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "xlat/builders.hpp"
#include "xlat/config.hpp"
#include "xlat/metrics.hpp"
#include "xlat/refselect.hpp"

namespace xlat {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitPartial = 3;

inline constexpr std::string_view kCandidatesFile = "candidates.jsonl";
inline constexpr std::string_view kProgressFile = "gen_refs.progress.jsonl";
inline constexpr std::string_view kSuitesFile = "suites.jsonl";
inline constexpr std::string_view kUntestableFile = "untestable.jsonl";
inline constexpr std::string_view kFilterReportsFile = "filter_reports.jsonl";
inline constexpr std::string_view kVerdictsFile = "verdicts.jsonl";
inline constexpr std::string_view kSelectionsFile = "selections.jsonl";
inline constexpr std::string_view kAugmentedFile = "parallel_augmented.jsonl";
inline constexpr std::string_view kEvalReportFile = "eval_report.json";

namespace detail {

template <class Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
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
    fn(line_no, j);
  }
}

inline void ensure_out_dir(const PipelineConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------
inline int cmd_stats(const std::filesystem::path& file, DatasetKind kind,
                     std::ostream& out) {
  json report;
  switch (kind) {
    case DatasetKind::monolingual:
      report = corpus_stats(load_dataset<Program>(file)).to_json();
      break;
    case DatasetKind::comparable:
      report = corpus_stats(load_dataset<ComparableExample>(file)).to_json();
      break;
    case DatasetKind::parallel:
      report = corpus_stats(load_dataset<ParallelExample>(file)).to_json();
      break;
  }
  out << report.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// build-comp
// ---------------------------------------------------------------------------
inline int cmd_build_comp(const PipelineConfig& cfg, Origin origin,
                          std::ostream& out,
                          GenerationClient* client_override = nullptr) {
  const MonoDataset mono_src = load_dataset<Program>(cfg.mono_src);
  const MonoDataset mono_tgt =
      origin == Origin::generated ? MonoDataset{}
                                  : load_dataset<Program>(cfg.mono_tgt);

  ComparableDataset ds;
  std::vector<SkipEntry> skipped;
  switch (origin) {
    case Origin::natural:
      ds = build_natural(mono_src, mono_tgt, cfg.pairing);
      break;
    case Origin::generated: {
      std::unique_ptr<HttpGenerationClient> owned;
      GenerationClient* client = client_override;
      if (!client) {
        owned = std::make_unique<HttpGenerationClient>(
            cfg.endpoint, cfg.auth_token_env, cfg.client_timeout_s,
            cfg.max_in_flight);
        client = owned.get();
      }
      GeneratedBuild gb = build_generated(
          mono_src, *client, cfg.tgt_lang, cfg.include_source_in_prompt,
          cfg.n_candidates, cfg.retry, cfg.effective_workers());
      ds = std::move(gb.dataset);
      skipped = std::move(gb.skipped);
      break;
    }
    case Origin::knn: {
      std::vector<EmbeddingVector> sv, tv;
      if (!cfg.emb_src.empty()) sv = load_embeddings(cfg.emb_src);
      if (!cfg.emb_tgt.empty()) tv = load_embeddings(cfg.emb_tgt);
      if (cfg.emb_src.empty() || cfg.emb_tgt.empty()) {
        // built-in TF-IDF must share one vocabulary across both sides, so
        // embed the union corpus and split it back apart
        std::vector<Program> all = mono_src.records;
        all.insert(all.end(), mono_tgt.records.begin(),
                   mono_tgt.records.end());
        const std::vector<EmbeddingVector> vecs = embed_tfidf(all);
        const auto mid = vecs.begin() +
                         static_cast<std::ptrdiff_t>(mono_src.records.size());
        if (cfg.emb_src.empty()) sv.assign(vecs.begin(), mid);
        if (cfg.emb_tgt.empty()) tv.assign(mid, vecs.end());
      }
      ds = build_knn(mono_src, mono_tgt, sv, tv, cfg.pairing);
      break;
    }
    case Origin::random:
      ds = build_random(mono_src, mono_tgt, cfg.pairing);
      break;
  }

  detail::ensure_out_dir(cfg);
  const std::string fname =
      "comparable_" + std::string(to_string(origin)) + ".jsonl";
  write_dataset(ds, cfg.out_dir / fname);
  if (origin == Origin::generated)
    write_skip_report(cfg.out_dir / "comparable_generated_skips.jsonl",
                      skipped);

  const StatsReport stats = corpus_stats(ds);
  out << "wrote " << (cfg.out_dir / fname).string() << " (" << stats.total
      << " pairs)\n";
  for (const auto& [name, count] : stats.by_origin)
    out << "origin " << name << ": " << count << "\n";
  for (const SkipEntry& s : skipped)
    out << "skipped " << s.program_id << ": " << s.reason << "\n";
  return skipped.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// gen-refs
// ---------------------------------------------------------------------------
inline std::string make_translation_prompt(const Program& src, Lang tgt_lang) {
  std::string p = "Translate the following ";
  p += to_string(src.lang);
  p += " function to ";
  p += to_string(tgt_lang);
  p += ".\n\n[";
  p += to_string(src.lang);
  p += " source]\n";
  p += src.code;
  p += "\n";
  return p;
}

inline std::map<std::string, std::vector<Candidate>> load_candidate_sets(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<Candidate>> out;
  detail::for_each_jsonl(path, [&](size_t, const json& j) {
    std::vector<Candidate> cands;
    for (const json& c : j.at("candidates"))
      cands.push_back(candidate_from_json(c));
    out[j.at("example_id").get<std::string>()] = std::move(cands);
  });
  return out;
}

inline int cmd_gen_refs(const PipelineConfig& cfg, std::ostream& out,
                        GenerationClient* client_override = nullptr) {
  const ParallelDataset ds = load_dataset<ParallelExample>(cfg.parallel);
  detail::ensure_out_dir(cfg);
  const std::filesystem::path cand_path =
      cfg.out_dir / std::string(kCandidatesFile);
  const std::filesystem::path progress_path =
      cfg.out_dir / std::string(kProgressFile);

  std::set<std::string> done;
  if (std::filesystem::exists(progress_path)) {
    detail::for_each_jsonl(progress_path, [&](size_t, const json& j) {
      done.insert(j.at("example_id").get<std::string>());
    });
  } else {
    // fresh start: make sure stale candidate files cannot leak through
    std::filesystem::remove(cand_path);
  }

  std::unique_ptr<HttpGenerationClient> owned;
  GenerationClient* client = client_override;
  if (!client) {
    owned = std::make_unique<HttpGenerationClient>(
        cfg.endpoint, cfg.auth_token_env, cfg.client_timeout_s,
        cfg.max_in_flight);
    client = owned.get();
  }

  std::vector<const ParallelExample*> pending;
  for (const ParallelExample& ex : ds.records)
    if (!done.count(ex.src.id)) pending.push_back(&ex);
  out << "gen-refs: " << pending.size() << " pending, " << done.size()
      << " already done\n";

  // chunked: requests within a chunk run in parallel, results are persisted
  // in dataset order, and the progress manifest only records examples whose
  // candidates are already on disk (so an abort never loses acknowledged
  // work and a resume never duplicates records)
  const size_t chunk = static_cast<size_t>(cfg.effective_workers());
  for (size_t base = 0; base < pending.size(); base += chunk) {
    const size_t n = std::min(chunk, pending.size() - base);
    std::vector<std::vector<Candidate>> results(n);
    std::vector<std::optional<std::string>> failures(n);
    run_parallel(n, cfg.effective_workers(), [&](size_t i) {
      const ParallelExample& ex = *pending[base + i];
      GenerationRequest req;
      req.prompt = make_translation_prompt(ex.src, ex.refs.front().lang);
      req.target_lang = ex.refs.front().lang;
      req.n = cfg.n_candidates;
      req.max_tokens = cfg.max_tokens;
      req.decode = cfg.decode;
      req.decode_param = cfg.decode_param;
      req.request_id = ex.src.id;
      try {
        results[i] = request_candidates(*client, req, cfg.retry);
      } catch (const ClientError& e) {
        failures[i] = std::string(to_string(e.kind)) + ": " + e.what();
      }
    });
    for (size_t i = 0; i < n; ++i) {
      const ParallelExample& ex = *pending[base + i];
      if (failures[i]) {
        throw ClientError(ClientErrorKind::transport,
                          "gen-refs aborted at example '" + ex.src.id +
                              "' (" + *failures[i] +
                              "); progress saved, rerun to resume");
      }
      json cands = json::array();
      for (const Candidate& c : results[i]) cands.push_back(candidate_to_json(c));
      json rec;
      rec["example_id"] = ex.src.id;
      rec["candidates"] = cands;
      append_file(cand_path, rec.dump() + "\n");
      json prog;
      prog["example_id"] = ex.src.id;
      prog["n_candidates"] = results[i].size();
      append_file(progress_path, prog.dump() + "\n");
      out << ex.src.id << ": " << results[i].size() << " candidates\n";
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// make-tests
// ---------------------------------------------------------------------------
inline int cmd_make_tests(const PipelineConfig& cfg, std::ostream& out) {
  const ParallelDataset ds = load_dataset<ParallelExample>(cfg.parallel);

  std::set<Lang> src_langs;
  for (const ParallelExample& ex : ds.records) src_langs.insert(ex.src.lang);
  for (Lang l : src_langs)
    if (!have_toolchain(l, cfg.toolchain))
      throw ToolchainError(std::string("no toolchain for ") + to_string(l) +
                           " (needed by source programs)");
  const HarnessTemplates templates =
      load_harness_templates(cfg.toolchain.templates_dir);

  struct Row {
    std::optional<TestSuite> suite;
    FilterReport report;
    std::string untestable_reason;
  };
  std::vector<Row> rows(ds.records.size());
  run_parallel(ds.records.size(), cfg.effective_workers(), [&](size_t i) {
    const ParallelExample& ex = ds.records[i];
    Signature sig;
    try {
      sig = extract_signature(ex.src);
    } catch (const Error& e) {
      rows[i].untestable_reason = std::string("signature: ") + e.what();
      return;
    }
    GenRanges gen = cfg.gen;
    gen.seed = cfg.gen.seed ^ fnv1a64(ex.src.id);
    const std::vector<TestInput> inputs = gen_inputs(sig, gen);
    ToolchainConfig tc = cfg.toolchain;
    tc.workers = 1;  // outer loop already saturates the pool
    auto [suite, report] =
        build_test_suite(ex.src, sig, inputs, tc, templates);
    rows[i].report = report;
    if (suite.usable())
      rows[i].suite = std::move(suite);
    else
      rows[i].untestable_reason =
          report.reason.empty() ? "no surviving inputs" : report.reason;
  });

  detail::ensure_out_dir(cfg);
  std::string suites_buf, untestable_buf, reports_buf;
  int testable = 0, untestable = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string& id = ds.records[i].src.id;
    json rep;
    rep["source_id"] = id;
    rep["kept"] = rows[i].report.kept;
    rep["dropped_runtime_error"] = rows[i].report.dropped_runtime_error;
    rep["dropped_timeout"] = rows[i].report.dropped_timeout;
    rep["compile_error"] = rows[i].report.compile_error;
    rep["reason"] = rows[i].report.reason;
    reports_buf += rep.dump() + "\n";
    if (rows[i].suite) {
      suites_buf += suite_to_json(*rows[i].suite).dump() + "\n";
      ++testable;
    } else {
      json u;
      u["source_id"] = id;
      u["reason"] = rows[i].untestable_reason;
      untestable_buf += u.dump() + "\n";
      out << "untestable " << id << ": " << rows[i].untestable_reason << "\n";
      ++untestable;
    }
  }
  write_file_atomic(cfg.out_dir / std::string(kSuitesFile), suites_buf);
  write_file_atomic(cfg.out_dir / std::string(kUntestableFile),
                    untestable_buf);
  write_file_atomic(cfg.out_dir / std::string(kFilterReportsFile),
                    reports_buf);
  out << "make-tests: " << testable << " suites, " << untestable
      << " untestable\n";
  return untestable == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// judge-select
// ---------------------------------------------------------------------------
inline std::map<std::string, TestSuite> load_suites(
    const std::filesystem::path& path) {
  std::map<std::string, TestSuite> out;
  detail::for_each_jsonl(path, [&](size_t, const json& j) {
    TestSuite s = suite_from_json(j);
    out[s.source_id] = std::move(s);
  });
  return out;
}

inline int cmd_judge_select(const PipelineConfig& cfg, std::ostream& out) {
  const ParallelDataset ds = load_dataset<ParallelExample>(cfg.parallel);
  const auto suites = load_suites(cfg.out_dir / std::string(kSuitesFile));
  const auto cand_sets =
      load_candidate_sets(cfg.out_dir / std::string(kCandidatesFile));

  std::set<Lang> ref_langs;
  for (const ParallelExample& ex : ds.records)
    ref_langs.insert(ex.refs.front().lang);
  for (Lang l : ref_langs)
    if (!have_toolchain(l, cfg.toolchain))
      throw ToolchainError(std::string("no toolchain for ") + to_string(l) +
                           " (needed to judge candidates)");
  const HarnessTemplates templates =
      load_harness_templates(cfg.toolchain.templates_dir);

  detail::ensure_out_dir(cfg);
  std::string verdicts_buf, selections_buf;
  std::map<std::string, std::vector<Candidate>> selections;
  int skipped = 0;
  for (const ParallelExample& ex : ds.records) {
    const auto suite_it = suites.find(ex.src.id);
    const auto cand_it = cand_sets.find(ex.src.id);
    if (suite_it == suites.end() || cand_it == cand_sets.end() ||
        cand_it->second.empty()) {
      out << ex.src.id << ": skipped ("
          << (suite_it == suites.end() ? "no suite" : "no candidates")
          << "), passes through unaugmented\n";
      ++skipped;
      continue;
    }
    const Lang cand_lang = ex.refs.front().lang;
    const FilterOutcome fo =
        filter_candidates(cand_it->second, cand_lang, suite_it->second,
                          cfg.toolchain, templates);
    std::vector<std::string> anchors;
    for (const Program& r : ex.refs) anchors.push_back(r.code);
    const std::vector<Candidate> picked =
        select_diverse(fo.correct, anchors, cfg.selection);
    selections[ex.src.id] = picked;

    json vrec;
    vrec["example_id"] = ex.src.id;
    json varr = json::array();
    for (const Verdict& v : fo.verdicts) varr.push_back(verdict_to_json(v));
    vrec["verdicts"] = varr;
    verdicts_buf += vrec.dump() + "\n";
    for (const Candidate& c : picked) {
      json srec;
      srec["example_id"] = ex.src.id;
      srec["candidate_rank"] = c.rank;
      srec["text"] = c.text;
      selections_buf += srec.dump() + "\n";
    }
    out << ex.src.id << ": " << cand_it->second.size() << " candidates, "
        << fo.correct.size() << " correct, " << picked.size()
        << " selected\n";
  }

  const ParallelDataset augmented = augment_parallel(ds, selections);
  write_file_atomic(cfg.out_dir / std::string(kVerdictsFile), verdicts_buf);
  write_file_atomic(cfg.out_dir / std::string(kSelectionsFile),
                    selections_buf);
  write_dataset(augmented, cfg.out_dir / std::string(kAugmentedFile));
  out << "judge-select: " << ds.records.size() - skipped << " judged, "
      << skipped << " skipped\n";
  return skipped == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------
inline std::map<std::string, std::vector<Verdict>> load_verdict_sets(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<Verdict>> out;
  detail::for_each_jsonl(path, [&](size_t, const json& j) {
    std::vector<Verdict> vs;
    for (const json& vj : j.at("verdicts")) {
      Verdict v;
      v.candidate_rank = vj.at("candidate_rank").get<int>();
      v.passed = vj.at("passed").get<bool>();
      for (const json& s : vj.at("per_case")) {
        const std::string t = s.get<std::string>();
        if (t == "match") v.per_case.push_back(CaseStatus::match);
        else if (t == "mismatch") v.per_case.push_back(CaseStatus::mismatch);
        else if (t == "timeout") v.per_case.push_back(CaseStatus::timeout);
        else v.per_case.push_back(CaseStatus::error);
      }
      vs.push_back(std::move(v));
    }
    out[j.at("example_id").get<std::string>()] = std::move(vs);
  });
  return out;
}

inline int cmd_eval(const PipelineConfig& cfg, std::ostream& out) {
  const ParallelDataset ds = load_dataset<ParallelExample>(cfg.parallel);
  const auto cand_sets =
      load_candidate_sets(cfg.out_dir / std::string(kCandidatesFile));

  std::map<std::string, std::vector<Verdict>> verdict_sets;
  const std::filesystem::path vpath =
      cfg.out_dir / std::string(kVerdictsFile);
  const HarnessTemplates templates =
      load_harness_templates(cfg.toolchain.templates_dir);
  if (std::filesystem::exists(vpath)) {
    verdict_sets = load_verdict_sets(vpath);
  } else {
    const auto suites = load_suites(cfg.out_dir / std::string(kSuitesFile));
    for (const ParallelExample& ex : ds.records) {
      const auto s = suites.find(ex.src.id);
      const auto c = cand_sets.find(ex.src.id);
      if (s == suites.end() || c == cand_sets.end()) continue;
      verdict_sets[ex.src.id] =
          filter_candidates(c->second, ex.refs.front().lang, s->second,
                            cfg.toolchain, templates)
              .verdicts;
    }
  }

  std::vector<JudgedExample> judged;
  std::vector<std::string> top1, ref_texts;
  std::vector<std::vector<std::string>> all_refs;
  std::vector<Lang> langs;
  int missing = 0;
  for (const ParallelExample& ex : ds.records) {
    JudgedExample je;
    je.example_id = ex.src.id;
    const auto vit = verdict_sets.find(ex.src.id);
    if (vit == verdict_sets.end() || vit->second.empty()) {
      je.verdicts = {false};
      ++missing;
      out << ex.src.id << ": no judged candidates, counted as incorrect\n";
    } else {
      for (const Verdict& v : vit->second) je.verdicts.push_back(v.passed);
    }
    judged.push_back(std::move(je));

    const auto cit = cand_sets.find(ex.src.id);
    top1.push_back(cit != cand_sets.end() && !cit->second.empty()
                       ? cit->second.front().text
                       : std::string());
    ref_texts.push_back(ex.refs.front().code);
    std::vector<std::string> refs;
    for (const Program& r : ex.refs) refs.push_back(r.code);
    all_refs.push_back(std::move(refs));
    langs.push_back(ex.refs.front().lang);
  }

  EvalReport report;
  report.pair_key = lang_pair_key(cfg.src_lang, cfg.tgt_lang);
  for (int k : cfg.ca_ks) report.ca_at.emplace_back(k, ca_at_k(judged, k));
  report.bleu = bleu(top1, all_refs);
  std::vector<std::pair<std::string, Lang>> syntax_in;
  for (size_t i = 0; i < top1.size(); ++i)
    syntax_in.emplace_back(top1[i], langs[i]);
  report.syntax_acc = syntax_accuracy(syntax_in, cfg.toolchain);
  report.construct_prf = construct_match(top1, ref_texts, langs);
  report.histogram =
      unique_correct_histogram(judged, cfg.histogram_n, default_buckets());

  detail::ensure_out_dir(cfg);
  write_file_atomic(cfg.out_dir / std::string(kEvalReportFile),
                    report.to_json().dump(2) + "\n");
  out << report.summary_text() << "\n";
  return missing == 0 ? kExitOk : kExitPartial;
}

}  // namespace xlat
