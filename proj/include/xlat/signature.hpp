#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlat/corpus.hpp"
#include "xlat/tokenize.hpp"

namespace xlat {

// ---------------------------------------------------------------------------
// Type tags. The closed world of argument types the test generator can
// produce values for: int, float, bool, str and lists thereof, nested at
// most kMaxTypeDepth deep.
// ---------------------------------------------------------------------------

inline constexpr int kMaxTypeDepth = 3;

struct TypeTag {
  enum class Kind { Int, Float, Bool, Str, List };
  Kind kind = Kind::Int;
  std::vector<TypeTag> elem;  // exactly one entry when kind == List

  bool operator==(const TypeTag&) const = default;

  static TypeTag of(Kind k) { return TypeTag{k, {}}; }
  static TypeTag list_of(TypeTag inner) {
    TypeTag t{Kind::List, {}};
    t.elem.push_back(std::move(inner));
    return t;
  }
  const TypeTag& element() const {
    if (kind != Kind::List || elem.empty())
      throw InternalError("element() on non-list type tag");
    return elem.front();
  }

  int depth() const {
    return kind == Kind::List ? 1 + element().depth() : 1;
  }

  std::string str() const {
    switch (kind) {
      case Kind::Int: return "int";
      case Kind::Float: return "float";
      case Kind::Bool: return "bool";
      case Kind::Str: return "str";
      case Kind::List: return "list<" + element().str() + ">";
    }
    return "?";
  }

  static TypeTag parse(std::string_view s) {
    const std::string t = trim(s);
    if (t == "int") return of(Kind::Int);
    if (t == "float") return of(Kind::Float);
    if (t == "bool") return of(Kind::Bool);
    if (t == "str") return of(Kind::Str);
    if (t.size() > 6 && t.substr(0, 5) == "list<" && t.back() == '>')
      return list_of(parse(t.substr(5, t.size() - 6)));
    throw ValidationError("bad type tag string: '" + t + "'");
  }
};

struct Param {
  std::string name;
  TypeTag type;
  std::string raw;  // source-language type text, kept for diagnostics and
                    // for rendering call literals (java arrays vs lists)
};

struct Signature {
  std::string function_name;
  std::vector<Param> params;
  bool return_present = true;
  std::optional<std::string> container;  // java: enclosing class, if any
};

inline json signature_to_json(const Signature& sig) {
  json j;
  j["function_name"] = sig.function_name;
  json ps = json::array();
  for (const Param& p : sig.params) {
    json pj;
    pj["name"] = p.name;
    pj["type"] = p.type.str();
    pj["raw"] = p.raw;
    ps.push_back(std::move(pj));
  }
  j["params"] = std::move(ps);
  j["return_present"] = sig.return_present;
  if (sig.container) j["container"] = *sig.container;
  return j;
}

inline Signature signature_from_json(const json& j) {
  Signature sig;
  sig.function_name = j.at("function_name").get<std::string>();
  for (const json& pj : j.at("params")) {
    Param p;
    p.name = pj.at("name").get<std::string>();
    p.type = TypeTag::parse(pj.at("type").get<std::string>());
    if (pj.contains("raw")) p.raw = pj.at("raw").get<std::string>();
    sig.params.push_back(std::move(p));
  }
  sig.return_present = j.at("return_present").get<bool>();
  if (j.contains("container")) sig.container = j.at("container").get<std::string>();
  return sig;
}

// ---------------------------------------------------------------------------
// Extraction internals.
// ---------------------------------------------------------------------------
namespace detail {

inline void check_depth(const TypeTag& t, const std::string& raw) {
  if (t.depth() > kMaxTypeDepth)
    throw ValidationError("unmappable parameter type '" + raw +
                          "': nesting deeper than " +
                          std::to_string(kMaxTypeDepth));
}

[[noreturn]] inline void unmappable(const std::string& raw) {
  throw ValidationError("unmappable parameter type '" + trim(raw) + "'");
}

// --- python ---------------------------------------------------------------

inline TypeTag parse_python_type(const std::string& raw) {
  const std::string t = trim(raw);
  if (t == "int") return TypeTag::of(TypeTag::Kind::Int);
  if (t == "float") return TypeTag::of(TypeTag::Kind::Float);
  if (t == "bool") return TypeTag::of(TypeTag::Kind::Bool);
  if (t == "str") return TypeTag::of(TypeTag::Kind::Str);
  for (std::string_view head : {"list[", "List[", "typing.List["}) {
    if (t.size() > head.size() + 1 && t.compare(0, head.size(), head) == 0 &&
        t.back() == ']') {
      TypeTag tag = TypeTag::list_of(
          parse_python_type(t.substr(head.size(), t.size() - head.size() - 1)));
      check_depth(tag, t);
      return tag;
    }
  }
  unmappable(t);
}

// Splits a parameter list on commas that sit at bracket depth zero.
// Offsets are relative to `text` start.
inline std::vector<std::pair<size_t, size_t>> split_top_level(
    std::string_view text, std::string_view open, std::string_view close) {
  std::vector<std::pair<size_t, size_t>> pieces;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (open.find(c) != std::string_view::npos) ++depth;
    else if (close.find(c) != std::string_view::npos) --depth;
    else if (c == ',' && depth == 0) {
      pieces.emplace_back(start, i);
      start = i + 1;
    }
  }
  pieces.emplace_back(start, text.size());
  return pieces;
}

inline Signature extract_python(const std::string& code) {
  const std::string masked = mask_code(code, Lang::python);
  // first top-level def: the keyword at column zero
  size_t pos = std::string::npos;
  for (size_t i = 0; i + 3 < masked.size(); ++i) {
    if ((i == 0 || masked[i - 1] == '\n') && masked.compare(i, 4, "def ") == 0) {
      pos = i;
      break;
    }
  }
  if (pos == std::string::npos)
    throw ValidationError("no function found (no top-level def)");

  size_t i = pos + 4;
  while (i < masked.size() && std::isspace(static_cast<unsigned char>(masked[i]))) ++i;
  size_t name_end = i;
  while (name_end < masked.size() && ident_char(masked[name_end])) ++name_end;
  const std::string name = code.substr(i, name_end - i);
  if (name.empty()) throw ValidationError("no function found (malformed def)");

  size_t open = masked.find('(', name_end);
  if (open == std::string::npos)
    throw ValidationError("no function found (def without parameter list)");
  int depth = 0;
  size_t close = open;
  for (; close < masked.size(); ++close) {
    if (masked[close] == '(' || masked[close] == '[') ++depth;
    else if (masked[close] == ')' || masked[close] == ']') {
      --depth;
      if (depth == 0) break;
    }
  }
  if (depth != 0) throw ValidationError("no function found (unbalanced parens)");

  Signature sig;
  sig.function_name = name;

  const std::string_view params_m =
      std::string_view(masked).substr(open + 1, close - open - 1);
  if (!trim(params_m).empty()) {
    for (auto [b, e] : split_top_level(params_m, "([", ")]")) {
      // slice from raw code; offsets line up because masking is same-length
      const std::string piece = code.substr(open + 1 + b, e - b);
      std::string ptxt = trim(piece);
      if (ptxt.empty()) continue;
      if (ptxt == "*" || ptxt == "/" || ptxt[0] == '*')
        throw ValidationError("unsupported parameter syntax '" + ptxt + "'");
      // drop default value
      const std::string piece_m(params_m.substr(b, e - b));
      size_t eq = std::string::npos;
      {
        int d = 0;
        for (size_t k = 0; k < piece_m.size(); ++k) {
          const char c = piece_m[k];
          if (c == '(' || c == '[') ++d;
          else if (c == ')' || c == ']') --d;
          else if (c == '=' && d == 0) { eq = k; break; }
        }
      }
      const std::string head = trim(piece.substr(0, eq));
      const size_t colon = head.find(':');
      Param p;
      if (colon == std::string::npos) {
        p.name = trim(head);
        throw ValidationError("missing type hint for " + p.name);
      }
      p.name = trim(head.substr(0, colon));
      p.raw = trim(head.substr(colon + 1));
      if (p.raw.empty()) throw ValidationError("missing type hint for " + p.name);
      p.type = parse_python_type(p.raw);
      sig.params.push_back(std::move(p));
    }
  }
  if (sig.params.empty())
    throw ValidationError("function '" + name + "' takes zero parameters");

  // return annotation, between ')' and ':'
  size_t colon = masked.find(':', close);
  sig.return_present = true;
  if (colon != std::string::npos) {
    const std::string between = trim(code.substr(close + 1, colon - close - 1));
    if (between.size() >= 2 && between.substr(0, 2) == "->") {
      const std::string ann = trim(between.substr(2));
      sig.return_present = ann != "None";
    }
  }
  return sig;
}

// --- token stream helpers (java / cpp) ------------------------------------

struct TokCursor {
  const std::vector<Token>* toks;
  size_t i = 0;
  bool done() const { return i >= toks->size(); }
  const Token& at(size_t k) const { return (*toks)[k]; }
  const Token& cur() const { return (*toks)[i]; }
  bool is_ident(std::string_view s) const {
    return !done() && cur().kind == Token::Kind::ident && cur().text == s;
  }
  bool is_punct(std::string_view s) const {
    return !done() && cur().kind == Token::Kind::punct && cur().text == s;
  }
};

// Generic-argument depth bookkeeping: ">>" closes two levels.
inline int close_levels(const Token& t) {
  if (t.text == ">") return 1;
  if (t.text == ">>") return 2;
  return 0;
}

// --- java ------------------------------------------------------------------

inline bool java_modifier(const std::string& s) {
  static const std::set<std::string> mods = {
      "public", "private",      "protected", "final",   "abstract",
      "static", "synchronized", "native",    "strictfp"};
  return mods.count(s) > 0;
}

// Normalized textual form of a type token span, e.g. "List<List<Integer>>".
inline std::string span_text(const std::vector<Token>& toks, size_t b, size_t e) {
  std::string out;
  for (size_t k = b; k < e; ++k) {
    const std::string& t = toks[k].text;
    if (!out.empty() && toks[k].kind == Token::Kind::ident &&
        (toks[k - 1].kind == Token::Kind::ident)) {
      out += ' ';
    }
    out += t;
  }
  return out;
}

inline TypeTag parse_java_type(const std::string& raw) {
  std::string t = trim(raw);
  // arrays: unwrap one [] per recursion step
  if (t.size() > 2 && t.substr(t.size() - 2) == "[]") {
    TypeTag tag = TypeTag::list_of(parse_java_type(t.substr(0, t.size() - 2)));
    check_depth(tag, raw);
    return tag;
  }
  if (t == "int" || t == "long" || t == "Integer" || t == "Long")
    return TypeTag::of(TypeTag::Kind::Int);
  if (t == "double" || t == "float" || t == "Double" || t == "Float")
    return TypeTag::of(TypeTag::Kind::Float);
  if (t == "boolean" || t == "Boolean") return TypeTag::of(TypeTag::Kind::Bool);
  if (t == "String") return TypeTag::of(TypeTag::Kind::Str);
  for (std::string_view head : {"List<", "ArrayList<", "java.util.List<",
                                "java.util.ArrayList<"}) {
    if (t.size() > head.size() + 1 && t.compare(0, head.size(), head) == 0 &&
        t.back() == '>') {
      TypeTag tag = TypeTag::list_of(
          parse_java_type(t.substr(head.size(), t.size() - head.size() - 1)));
      check_depth(tag, raw);
      return tag;
    }
  }
  unmappable(raw);
}

// Parses one parameter: [final] Type name ([] suffix allowed on either).
inline Param parse_java_param(const std::vector<Token>& toks, size_t b, size_t e) {
  while (b < e && (toks[b].text == "final" || toks[b].text == "@" ||
                   (b + 1 < e && toks[b].text == "@")))
    b += toks[b].text == "@" ? 2 : 1;
  if (b >= e) throw ValidationError("empty parameter");
  // name = last identifier; [] tokens after it are C-style array dims
  size_t name_idx = e;
  size_t k = e;
  while (k > b) {
    --k;
    if (toks[k].kind == Token::Kind::punct &&
        (toks[k].text == "]" || toks[k].text == "[")) {
      continue;
    }
    if (toks[k].kind == Token::Kind::ident) {
      name_idx = k;
      break;
    }
    throw ValidationError("cannot parse parameter near '" + toks[k].text + "'");
  }
  if (name_idx == e) throw ValidationError("parameter without a name");
  // [] tokens after the name belong to the type (C-style arrays)
  size_t dims_after = 0;
  for (size_t q = name_idx + 1; q + 1 < e + 1 && q < e; ++q)
    if (toks[q].text == "[") ++dims_after;
  Param p;
  p.name = toks[name_idx].text;
  std::string type_text = span_text(toks, b, name_idx);
  for (size_t q = 0; q < dims_after; ++q) type_text += "[]";
  p.raw = type_text;
  p.type = parse_java_type(type_text);
  return p;
}

inline Signature extract_java(const std::string& code) {
  const std::string masked = mask_code(code, Lang::java);
  const std::vector<Token> toks = lex(masked);

  // track the enclosing class stack while scanning for `static`
  std::vector<std::string> class_stack;
  std::vector<int> class_depth;
  int depth = 0;
  std::string pending_class;

  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == Token::Kind::punct) {
      if (t.text == "{") {
        ++depth;
        if (!pending_class.empty()) {
          class_stack.push_back(pending_class);
          class_depth.push_back(depth);
          pending_class.clear();
        }
      } else if (t.text == "}") {
        if (!class_depth.empty() && class_depth.back() == depth) {
          class_stack.pop_back();
          class_depth.pop_back();
        }
        --depth;
      }
      continue;
    }
    if ((t.text == "class" || t.text == "interface") && i + 1 < toks.size() &&
        toks[i + 1].kind == Token::Kind::ident) {
      pending_class = toks[i + 1].text;
      continue;
    }
    if (t.text != "static") continue;

    // rewind to the first modifier of this declaration
    size_t b = i;
    while (b > 0 && toks[b - 1].kind == Token::Kind::ident &&
           java_modifier(toks[b - 1].text))
      --b;
    // skip modifiers forward
    size_t k = b;
    while (k < toks.size() && toks[k].kind == Token::Kind::ident &&
           java_modifier(toks[k].text))
      ++k;
    // return type: ident chain with optional generics and []
    if (k >= toks.size() || toks[k].kind != Token::Kind::ident) continue;
    const size_t ret_b = k;
    ++k;
    if (k < toks.size() && toks[k].text == "<") {
      int g = 1;
      ++k;
      while (k < toks.size() && g > 0) {
        if (toks[k].text == "<") ++g;
        g -= close_levels(toks[k]);
        ++k;
      }
    }
    while (k + 1 < toks.size() && toks[k].text == "[" && toks[k + 1].text == "]")
      k += 2;
    const size_t ret_e = k;
    // method name + '('
    if (k >= toks.size() || toks[k].kind != Token::Kind::ident) continue;
    const std::string name = toks[k].text;
    ++k;
    if (k >= toks.size() || toks[k].text != "(") continue;
    const size_t open = k;
    int pd = 1;
    ++k;
    while (k < toks.size() && pd > 0) {
      if (toks[k].text == "(") ++pd;
      else if (toks[k].text == ")") --pd;
      ++k;
    }
    if (pd != 0) continue;
    const size_t close = k - 1;
    // allow `throws A, B` before the body
    size_t after = k;
    if (after < toks.size() && toks[after].kind == Token::Kind::ident &&
        toks[after].text == "throws") {
      ++after;
      while (after < toks.size() && toks[after].text != "{" &&
             toks[after].text != ";")
        ++after;
    }
    if (after >= toks.size() || toks[after].text != "{") continue;  // abstract

    Signature sig;
    sig.function_name = name;
    if (!class_stack.empty()) sig.container = class_stack.back();
    sig.return_present = span_text(toks, ret_b, ret_e) != "void";

    // split parameters on top-level commas
    size_t pb = open + 1;
    int gd = 0, bd = 0;  // generic depth, bracket/paren depth
    std::vector<std::pair<size_t, size_t>> pieces;
    for (size_t q = open + 1; q <= close; ++q) {
      const Token& tq = toks[q];
      if (q == close || (tq.text == "," && gd == 0 && bd == 0)) {
        if (q > pb) pieces.emplace_back(pb, q);
        pb = q + 1;
        continue;
      }
      if (tq.text == "<") ++gd;
      gd -= close_levels(tq) * (gd > 0 ? 1 : 0);
      if (tq.text == "(" || tq.text == "[") ++bd;
      if (tq.text == ")" || tq.text == "]") --bd;
    }
    for (auto [qb, qe] : pieces) sig.params.push_back(parse_java_param(toks, qb, qe));
    if (sig.params.empty())
      throw ValidationError("function '" + name + "' takes zero parameters");
    return sig;
  }
  throw ValidationError("no function found (no static method)");
}

// --- cpp -------------------------------------------------------------------

// Blank out preprocessor lines so includes/defines cannot look like code.
inline std::string strip_preprocessor(std::string masked) {
  size_t i = 0;
  while (i < masked.size()) {
    size_t ls = i;
    while (ls < masked.size() && (masked[ls] == ' ' || masked[ls] == '\t')) ++ls;
    size_t le = i;
    while (le < masked.size() && masked[le] != '\n') ++le;
    if (ls < masked.size() && masked[ls] == '#')
      for (size_t k = i; k < le; ++k) masked[k] = ' ';
    i = le + 1;
  }
  return masked;
}

inline TypeTag parse_cpp_type(const std::string& raw) {
  std::string t = trim(raw);
  // strip const and reference qualifiers
  t = replace_all(t, "&", " ");
  std::vector<std::string> words;
  for (const std::string& w : split_lines(replace_all(t, " ", "\n")))
    if (!w.empty() && w != "const") words.push_back(w);
  t = join(words, " ");
  if (t == "int" || t == "long" || t == "long long" || t == "long int" ||
      t == "long long int")
    return TypeTag::of(TypeTag::Kind::Int);
  if (t == "double" || t == "float") return TypeTag::of(TypeTag::Kind::Float);
  if (t == "bool") return TypeTag::of(TypeTag::Kind::Bool);
  if (t == "string" || t == "std::string") return TypeTag::of(TypeTag::Kind::Str);
  for (std::string_view head : {"vector<", "std::vector<"}) {
    if (t.size() > head.size() + 1 && t.compare(0, head.size(), head) == 0 &&
        t.back() == '>') {
      TypeTag tag = TypeTag::list_of(
          parse_cpp_type(t.substr(head.size(), t.size() - head.size() - 1)));
      check_depth(tag, raw);
      return tag;
    }
  }
  unmappable(raw);
}

// Textual form of a cpp type span: no spaces around :: < >, single spaces
// between word tokens ("long long", "unsigned int").
inline std::string cpp_span_text(const std::vector<Token>& toks, size_t b,
                                 size_t e) {
  std::string out;
  for (size_t k = b; k < e; ++k) {
    const Token& t = toks[k];
    if (!out.empty() && t.kind == Token::Kind::ident &&
        toks[k - 1].kind == Token::Kind::ident)
      out += ' ';
    out += t.text == ">>" ? std::string(">>") : t.text;
  }
  return out;
}

inline Param parse_cpp_param(const std::vector<Token>& toks, size_t b, size_t e) {
  if (b >= e) throw ValidationError("empty parameter");
  Param p;
  // If the whole span parses as a type the parameter is unnamed.
  const std::string whole = cpp_span_text(toks, b, e);
  try {
    p.type = parse_cpp_type(whole);
    p.raw = whole;
    p.name = "";
    return p;
  } catch (const ValidationError&) {
  }
  // find trailing identifier = the name
  if (toks[e - 1].kind != Token::Kind::ident)
    throw ValidationError("cannot parse parameter '" + whole + "'");
  p.name = toks[e - 1].text;
  p.raw = cpp_span_text(toks, b, e - 1);
  p.type = parse_cpp_type(p.raw);
  return p;
}

inline Signature extract_cpp(const std::string& code) {
  const std::string masked = strip_preprocessor(mask_code(code, Lang::cpp));
  const std::vector<Token> toks = lex(masked);

  int depth = 0;
  size_t stmt_start = 0;  // token index where the current declaration begins
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == Token::Kind::punct) {
      if (t.text == "{") {
        ++depth;
        continue;
      }
      if (t.text == "}") {
        --depth;
        stmt_start = i + 1;
        continue;
      }
      if (t.text == ";" && depth == 0) {
        stmt_start = i + 1;
        continue;
      }
    }
    if (depth != 0) continue;
    if (t.text != "(" || i == 0) continue;
    const Token& prev = toks[i - 1];
    if (prev.kind != Token::Kind::ident) continue;
    const std::string& name = prev.text;
    if (name == "main") {
      // skip main entirely: jump past its parameter list
      continue;
    }
    // need at least one return-type token before the name
    if (i < 2 || static_cast<size_t>(i - 1) <= stmt_start) continue;
    // find matching ')'
    int pd = 1;
    size_t k = i + 1;
    while (k < toks.size() && pd > 0) {
      if (toks[k].text == "(") ++pd;
      else if (toks[k].text == ")") --pd;
      ++k;
    }
    if (pd != 0) break;
    const size_t close = k - 1;
    size_t after = k;
    while (after < toks.size() &&
           (toks[after].text == "const" || toks[after].text == "noexcept"))
      ++after;
    if (after >= toks.size() || toks[after].text != "{") continue;

    // return type tokens: [stmt_start, i-1) minus leading specifiers
    size_t rb = stmt_start;
    while (rb < i - 1 && toks[rb].kind == Token::Kind::ident &&
           (toks[rb].text == "inline" || toks[rb].text == "static" ||
            toks[rb].text == "constexpr" || toks[rb].text == "extern"))
      ++rb;
    if (rb >= i - 1) continue;  // no return type: constructor-ish, skip
    const std::string ret = cpp_span_text(toks, rb, i - 1);

    Signature sig;
    sig.function_name = name;
    sig.return_present = ret != "void";

    // split params on top-level commas
    size_t pb = i + 1;
    int gd = 0, bd = 0;
    std::vector<std::pair<size_t, size_t>> pieces;
    for (size_t q = i + 1; q <= close; ++q) {
      const Token& tq = toks[q];
      if (q == close || (tq.text == "," && gd == 0 && bd == 0)) {
        if (q > pb) pieces.emplace_back(pb, q);
        pb = q + 1;
        continue;
      }
      if (tq.text == "<") ++gd;
      gd -= close_levels(tq) * (gd > 0 ? 1 : 0);
      if (tq.text == "(" || tq.text == "[" || tq.text == "{") ++bd;
      if (tq.text == ")" || tq.text == "]" || tq.text == "}") --bd;
    }
    for (auto [qb, qe] : pieces) sig.params.push_back(parse_cpp_param(toks, qb, qe));
    if (sig.params.empty())
      throw ValidationError("function '" + name + "' takes zero parameters");
    // synthesize names for unnamed parameters
    for (size_t q = 0; q < sig.params.size(); ++q)
      if (sig.params[q].name.empty())
        sig.params[q].name = "arg" + std::to_string(q);
    return sig;
  }
  throw ValidationError("no function found (no free function)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry point: signature of the first top-level function of a program.
//   python: first def at column zero (complete type hints required)
//   java:   first static method (enclosing class recorded, if any)
//   cpp:    first free function with a body, `main` excluded
// ---------------------------------------------------------------------------
inline Signature extract_signature(const Program& p) {
  switch (p.lang) {
    case Lang::python: return detail::extract_python(p.code);
    case Lang::java: return detail::extract_java(p.code);
    case Lang::cpp: return detail::extract_cpp(p.code);
  }
  throw InternalError("bad lang");
}

}  // namespace xlat
