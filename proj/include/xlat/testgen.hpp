#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xlat/util.hpp"
#include "xlat/value.hpp"

namespace xlat {

struct GenRanges {
  std::int64_t int_lo = -100;
  std::int64_t int_hi = 100;
  double float_lo = -100.0;
  double float_hi = 100.0;
  int str_len_lo = 0;
  int str_len_hi = 12;
  int list_len_lo = 0;
  int list_len_hi = 8;
  int n_inputs = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (int_lo > int_hi) throw ValidationError("int_range: lo > hi");
    if (float_lo > float_hi) throw ValidationError("float_range: lo > hi");
    if (str_len_lo > str_len_hi || str_len_lo < 0)
      throw ValidationError("str_len: bad range");
    if (list_len_lo > list_len_hi || list_len_lo < 0)
      throw ValidationError("list_len: bad range");
    if (n_inputs < 1) throw ValidationError("n_inputs must be >= 1");
  }
};

inline json gen_ranges_to_json(const GenRanges& g) {
  json j;
  j["int_range"] = {g.int_lo, g.int_hi};
  j["float_range"] = {g.float_lo, g.float_hi};
  j["str_len"] = {g.str_len_lo, g.str_len_hi};
  j["list_len"] = {g.list_len_lo, g.list_len_hi};
  j["n_inputs"] = g.n_inputs;
  j["seed"] = g.seed;
  return j;
}

inline GenRanges gen_ranges_from_json(const json& j) {
  GenRanges g;
  auto pair_of = [&](const char* key, auto& lo, auto& hi) {
    if (!j.contains(key)) return;
    const json& p = j.at(key);
    if (!p.is_array() || p.size() != 2)
      throw ValidationError(std::string(key) + " must be a [lo, hi] pair");
    lo = p[0].get<std::decay_t<decltype(lo)>>();
    hi = p[1].get<std::decay_t<decltype(hi)>>();
  };
  pair_of("int_range", g.int_lo, g.int_hi);
  pair_of("float_range", g.float_lo, g.float_hi);
  pair_of("str_len", g.str_len_lo, g.str_len_hi);
  pair_of("list_len", g.list_len_lo, g.list_len_hi);
  if (j.contains("n_inputs")) g.n_inputs = j.at("n_inputs").get<int>();
  if (j.contains("seed")) g.seed = j.at("seed").get<std::uint64_t>();
  g.validate();
  return g;
}

struct TestInput {
  std::vector<Value> args;
  bool operator==(const TestInput&) const = default;
};

inline constexpr std::string_view kStrCharset =
    "abcdefghijklmnopqrstuvwxyz0123456789 ";

inline Value gen_value(const TypeTag& tag, const GenRanges& cfg, Rng& rng) {
  switch (tag.kind) {
    case TypeTag::Kind::Int:
      return Value(rng.range_int(cfg.int_lo, cfg.int_hi));
    case TypeTag::Kind::Float:
      return Value(rng.range_real(cfg.float_lo, cfg.float_hi));
    case TypeTag::Kind::Bool:
      return Value(rng.coin());
    case TypeTag::Kind::Str: {
      const int len = static_cast<int>(
          rng.range_int(cfg.str_len_lo, cfg.str_len_hi));
      std::string s;
      s.reserve(len);
      for (int i = 0; i < len; ++i)
        s += kStrCharset[rng.below(kStrCharset.size())];
      return Value(std::move(s));
    }
    case TypeTag::Kind::List: {
      const int len = static_cast<int>(
          rng.range_int(cfg.list_len_lo, cfg.list_len_hi));
      Value::List xs;
      xs.reserve(len);
      for (int i = 0; i < len; ++i)
        xs.push_back(gen_value(tag.element(), cfg, rng));
      return Value(std::move(xs));
    }
  }
  throw InternalError("bad type tag");
}

inline std::vector<TestInput> gen_inputs(const Signature& sig,
                                         const GenRanges& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<TestInput> out;
  out.reserve(cfg.n_inputs);
  for (int i = 0; i < cfg.n_inputs; ++i) {
    TestInput in;
    for (const Param& p : sig.params) in.args.push_back(gen_value(p.type, cfg, rng));
    out.push_back(std::move(in));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Harness emission. Templates are plain text files with two placeholders,
// {{CODE}} and {{PRINT_STMT}}; the print statement we substitute in carries
// a third, {{CALL_ARGS}}, resolved in a second pass.
// ---------------------------------------------------------------------------
struct HarnessTemplates {
  std::string python;
  std::string java;
  std::string cpp;

  const std::string& for_lang(Lang lang) const {
    switch (lang) {
      case Lang::python: return python;
      case Lang::java: return java;
      case Lang::cpp: return cpp;
    }
    throw InternalError("bad lang");
  }
};

inline HarnessTemplates load_harness_templates(
    const std::filesystem::path& dir) {
  HarnessTemplates t;
  t.python = read_file(dir / "harness_python.txt");
  t.java = read_file(dir / "harness_java.txt");
  t.cpp = read_file(dir / "harness_cpp.txt");
  return t;
}

namespace detail {

// Bare java methods get wrapped in a holder class; import/package lines at
// the top of the snippet must stay outside the wrapper to keep javac happy.
inline std::string java_code_block(const Program& p, const Signature& sig) {
  if (sig.container.has_value()) return p.code;
  std::vector<std::string> lines = split_lines(p.code);
  size_t split = 0;
  while (split < lines.size()) {
    const std::string t = trim(lines[split]);
    if (t.empty() || t.rfind("import ", 0) == 0 || t.rfind("package ", 0) == 0)
      ++split;
    else
      break;
  }
  std::string out;
  for (size_t i = 0; i < split; ++i) out += lines[i] + "\n";
  out += "class XlatEntry {\n";
  for (size_t i = split; i < lines.size(); ++i) out += lines[i] + "\n";
  out += "}";
  return out;
}

inline std::string print_stmt(const Program& p, const Signature& sig) {
  const std::string& name = sig.function_name;
  switch (p.lang) {
    case Lang::python:
      if (sig.return_present)
        return "sys.stdout.write(__xlat_canon(" + name +
               "({{CALL_ARGS}})) + \"\\n\")";
      return name + "({{CALL_ARGS}})\nsys.stdout.write(\"\\n\")";
    case Lang::java: {
      const std::string target =
          sig.container ? *sig.container : std::string("XlatEntry");
      if (sig.return_present)
        return "System.out.print(xlatCanon(" + target + "." + name +
               "({{CALL_ARGS}})) + \"\\n\");";
      return target + "." + name +
             "({{CALL_ARGS}});\n        System.out.print(\"\\n\");";
    }
    case Lang::cpp:
      if (sig.return_present)
        return "std::fputs((xlat_canon_value(" + name +
               "({{CALL_ARGS}})) + \"\\n\").c_str(), stdout);";
      return name + "({{CALL_ARGS}});\n    std::fputs(\"\\n\", stdout);";
  }
  throw InternalError("bad lang");
}

}  // namespace detail

inline std::string emit_harness(const HarnessTemplates& templates,
                                const Program& p, const Signature& sig,
                                const std::vector<TestInput>& inputs,
                                size_t case_index) {
  if (case_index >= inputs.size())
    throw InternalError("emit_harness: case_index out of range");
  const TestInput& in = inputs[case_index];
  if (in.args.size() != sig.params.size())
    throw InternalError("emit_harness: input arity does not match signature");

  std::string call_args;
  for (size_t i = 0; i < in.args.size(); ++i) {
    if (i) call_args += ", ";
    call_args += render_literal(in.args[i], p.lang, sig.params[i].raw);
  }

  const std::string code_block =
      p.lang == Lang::java ? detail::java_code_block(p, sig) : p.code;

  std::string text = templates.for_lang(p.lang);
  text = replace_all(text, "{{CODE}}", code_block);
  text = replace_all(text, "{{PRINT_STMT}}", detail::print_stmt(p, sig));
  text = replace_all(text, "{{CALL_ARGS}}", call_args);
  return text;
}

}  // namespace xlat
