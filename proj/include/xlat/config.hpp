#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xlat/builders.hpp"
#include "xlat/refselect.hpp"
#include "xlat/sandbox.hpp"
#include "xlat/testgen.hpp"

namespace xlat {

struct PipelineConfig {
  Lang src_lang = Lang::java;
  Lang tgt_lang = Lang::python;

  std::filesystem::path mono_src;
  std::filesystem::path mono_tgt;
  std::filesystem::path parallel;
  std::filesystem::path out_dir = "out";
  std::filesystem::path emb_src;  // empty = built-in TF-IDF
  std::filesystem::path emb_tgt;

  PairingConfig pairing;
  GenRanges gen;
  SelectionConfig selection;
  ToolchainConfig toolchain = ToolchainConfig::defaults();

  std::string endpoint = "http://127.0.0.1:8080";
  std::string auth_token_env;
  int n_candidates = 50;
  int max_tokens = 1024;
  std::string decode = "beam";
  double decode_param = 1.0;
  bool include_source_in_prompt = true;
  int max_in_flight = 4;
  int client_timeout_s = 120;
  RetryPolicy retry;

  std::vector<int> ca_ks = {1, 5, 10, 20};
  int histogram_n = 20;

  std::uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const {
    if (src_lang == tgt_lang)
      throw ValidationError("language pair members must be distinct");
    pairing.validate();
    gen.validate();
    selection.validate();
    if (n_candidates < 1) throw ValidationError("n_candidates must be >= 1");
    if (histogram_n < 1) throw ValidationError("histogram_n must be >= 1");
    for (int k : ca_ks)
      if (k < 1) throw ValidationError("ca_ks entries must be >= 1");
    if (decode != "beam" && decode != "sample")
      throw ValidationError("decode must be 'beam' or 'sample'");
  }

  int effective_workers() const {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
  }
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline void load_lang_tool(const json& j, LangTool& t) {
  if (j.contains("compile"))
    t.compile = j.at("compile").get<std::vector<std::string>>();
  if (j.contains("run")) t.run = j.at("run").get<std::vector<std::string>>();
  if (j.contains("check"))
    t.check = j.at("check").get<std::vector<std::string>>();
  if (j.contains("extension"))
    t.extension = j.at("extension").get<std::string>();
  if (j.contains("source_name"))
    t.source_name = j.at("source_name").get<std::string>();
}

}  // namespace detail

inline PipelineConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const std::filesystem::path base =
      std::filesystem::absolute(path).parent_path();

  PipelineConfig c;
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("workers")) c.workers = j.at("workers").get<int>();

  if (j.contains("pair")) {
    const json& p = j.at("pair");
    c.src_lang = lang_from_string(p.at("src").get<std::string>());
    c.tgt_lang = lang_from_string(p.at("tgt").get<std::string>());
  }
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    auto get = [&](const char* key) {
      return p.contains(key)
                 ? detail::resolve(base, p.at(key).get<std::string>())
                 : std::filesystem::path();
    };
    if (p.contains("mono_src")) c.mono_src = get("mono_src");
    if (p.contains("mono_tgt")) c.mono_tgt = get("mono_tgt");
    if (p.contains("parallel")) c.parallel = get("parallel");
    if (p.contains("out_dir")) c.out_dir = get("out_dir");
    if (p.contains("emb_src")) c.emb_src = get("emb_src");
    if (p.contains("emb_tgt")) c.emb_tgt = get("emb_tgt");
  }
  if (j.contains("pairing")) {
    const json& p = j.at("pairing");
    if (p.contains("max_per_problem"))
      c.pairing.max_per_problem = p.at("max_per_problem").get<int>();
    if (p.contains("knn_k")) c.pairing.knn_k = p.at("knn_k").get<int>();
    c.pairing.seed =
        p.contains("seed") ? p.at("seed").get<std::uint64_t>() : c.seed;
  } else {
    c.pairing.seed = c.seed;
  }
  if (j.contains("gen_ranges")) {
    c.gen = gen_ranges_from_json(j.at("gen_ranges"));
    if (!j.at("gen_ranges").contains("seed")) c.gen.seed = c.seed;
  } else {
    c.gen.seed = c.seed;
  }
  if (j.contains("selection")) {
    const json& s = j.at("selection");
    if (s.contains("k")) c.selection.k = s.at("k").get<int>();
    if (s.contains("normalize_ws"))
      c.selection.normalize_ws = s.at("normalize_ws").get<bool>();
  }
  if (j.contains("toolchain")) {
    const json& t = j.at("toolchain");
    if (t.contains("timeout_ms"))
      c.toolchain.timeout_ms = t.at("timeout_ms").get<int>();
    if (t.contains("compile_timeout_ms"))
      c.toolchain.compile_timeout_ms = t.at("compile_timeout_ms").get<int>();
    if (t.contains("output_cap"))
      c.toolchain.output_cap = t.at("output_cap").get<std::size_t>();
    if (t.contains("fail_fast"))
      c.toolchain.fail_fast = t.at("fail_fast").get<bool>();
    if (t.contains("work_root"))
      c.toolchain.work_root =
          detail::resolve(base, t.at("work_root").get<std::string>());
    if (t.contains("templates_dir"))
      c.toolchain.templates_dir =
          detail::resolve(base, t.at("templates_dir").get<std::string>());
    if (t.contains("python")) detail::load_lang_tool(t.at("python"), c.toolchain.python);
    if (t.contains("java")) detail::load_lang_tool(t.at("java"), c.toolchain.java);
    if (t.contains("cpp")) detail::load_lang_tool(t.at("cpp"), c.toolchain.cpp);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.contains("endpoint")) c.endpoint = m.at("endpoint").get<std::string>();
    if (m.contains("auth_token_env"))
      c.auth_token_env = m.at("auth_token_env").get<std::string>();
    if (m.contains("n_candidates"))
      c.n_candidates = m.at("n_candidates").get<int>();
    if (m.contains("max_tokens")) c.max_tokens = m.at("max_tokens").get<int>();
    if (m.contains("decode")) c.decode = m.at("decode").get<std::string>();
    if (m.contains("decode_param"))
      c.decode_param = m.at("decode_param").get<double>();
    if (m.contains("include_source_in_prompt"))
      c.include_source_in_prompt =
          m.at("include_source_in_prompt").get<bool>();
    if (m.contains("max_in_flight"))
      c.max_in_flight = m.at("max_in_flight").get<int>();
    if (m.contains("timeout_s"))
      c.client_timeout_s = m.at("timeout_s").get<int>();
    if (m.contains("retry")) {
      const json& r = m.at("retry");
      if (r.contains("max_retries"))
        c.retry.max_retries = r.at("max_retries").get<int>();
      if (r.contains("base_delay_ms"))
        c.retry.base_delay_ms = r.at("base_delay_ms").get<int>();
      if (r.contains("multiplier"))
        c.retry.multiplier = r.at("multiplier").get<double>();
      if (r.contains("max_delay_ms"))
        c.retry.max_delay_ms = r.at("max_delay_ms").get<int>();
    }
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    if (e.contains("ca_ks")) c.ca_ks = e.at("ca_ks").get<std::vector<int>>();
    if (e.contains("histogram_n"))
      c.histogram_n = e.at("histogram_n").get<int>();
  }
  if (c.toolchain.templates_dir.empty())
    c.toolchain.templates_dir =
        std::filesystem::path(XLAT_REPO_ROOT) / "templates";
  c.toolchain.workers = c.effective_workers();
  c.validate();
  return c;
}

}  // namespace xlat
