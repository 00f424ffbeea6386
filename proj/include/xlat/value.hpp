#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "xlat/lang.hpp"
#include "xlat/signature.hpp"

namespace xlat {

// ---------------------------------------------------------------------------
// Runtime mirror of TypeTag: the argument values fed to harness programs.
// ---------------------------------------------------------------------------
struct Value {
  using List = std::vector<Value>;
  std::variant<std::int64_t, double, bool, std::string, List> v;

  Value() : v(std::int64_t{0}) {}
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(static_cast<std::int64_t>(i)) {}
  Value(double d) : v(d) {}
  Value(bool b) : v(b) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}
  Value(List l) : v(std::move(l)) {}

  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_str() const { return std::holds_alternative<std::string>(v); }
  bool is_list() const { return std::holds_alternative<List>(v); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  double as_float() const { return std::get<double>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const std::string& as_str() const { return std::get<std::string>(v); }
  const List& as_list() const { return std::get<List>(v); }

  bool operator==(const Value&) const = default;

  bool conforms(const TypeTag& tag) const {
    switch (tag.kind) {
      case TypeTag::Kind::Int: return is_int();
      case TypeTag::Kind::Float: return is_float();
      case TypeTag::Kind::Bool: return is_bool();
      case TypeTag::Kind::Str: return is_str();
      case TypeTag::Kind::List: {
        if (!is_list()) return false;
        for (const Value& e : as_list())
          if (!e.conforms(tag.element())) return false;
        return true;
      }
    }
    return false;
  }
};

inline json value_to_json(const Value& val) {
  if (val.is_int()) return json(val.as_int());
  if (val.is_float()) return json(val.as_float());
  if (val.is_bool()) return json(val.as_bool());
  if (val.is_str()) return json(val.as_str());
  json arr = json::array();
  for (const Value& e : val.as_list()) arr.push_back(value_to_json(e));
  return arr;
}

// Reads a value back using the type tag to disambiguate ints from floats
// (JSON "5" for a float parameter means 5.0).
inline Value value_from_json(const json& j, const TypeTag& tag) {
  switch (tag.kind) {
    case TypeTag::Kind::Int: return Value(j.get<std::int64_t>());
    case TypeTag::Kind::Float: return Value(j.get<double>());
    case TypeTag::Kind::Bool: return Value(j.get<bool>());
    case TypeTag::Kind::Str: return Value(j.get<std::string>());
    case TypeTag::Kind::List: {
      Value::List out;
      for (const json& e : j) out.push_back(value_from_json(e, tag.element()));
      return Value(std::move(out));
    }
  }
  throw InternalError("bad type tag");
}

// ---------------------------------------------------------------------------
// Canonical output form. All three harness printers must agree byte-for-byte
// with this reference:
//   bool           -> true / false
//   int            -> decimal
//   float          -> C "%.6g", with "-0" normalized to "0"
//   str            -> verbatim, no quotes
//   list           -> [v1, v2] with ", " separator
// ---------------------------------------------------------------------------

inline std::string canon_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

inline std::string canon(const Value& val) {
  if (val.is_bool()) return val.as_bool() ? "true" : "false";
  if (val.is_int()) return std::to_string(val.as_int());
  if (val.is_float()) return canon_double(val.as_float());
  if (val.is_str()) return val.as_str();
  std::string out = "[";
  const Value::List& xs = val.as_list();
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += canon(xs[i]);
  }
  out += "]";
  return out;
}

// ---------------------------------------------------------------------------
// Source literals. Floats are rendered with 17 significant digits so they
// parse back to the identical double in every language.
// ---------------------------------------------------------------------------
namespace detail {

inline std::string float_literal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // make sure it reads as a float, not an int
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

inline std::string escape_common(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

// java helpers: strip one generic/array level off a raw type string
inline std::string java_list_elem_raw(const std::string& raw) {
  std::string t = trim(raw);
  if (t.size() > 2 && t.substr(t.size() - 2) == "[]")
    return t.substr(0, t.size() - 2);
  const size_t lt = t.find('<');
  if (lt != std::string::npos && t.back() == '>')
    return trim(t.substr(lt + 1, t.size() - lt - 2));
  return "";
}

inline bool java_is_array(const std::string& raw) {
  const std::string t = trim(raw);
  return t.size() > 2 && t.substr(t.size() - 2) == "[]";
}

inline std::string render_java(const Value& v, const std::string& raw);

inline std::string render_java_array_inner(const Value& v,
                                           const std::string& elem_raw) {
  std::string out = "{";
  const Value::List& xs = v.as_list();
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += java_is_array(elem_raw)
               ? render_java_array_inner(xs[i], java_list_elem_raw(elem_raw))
               : render_java(xs[i], elem_raw);
  }
  return out + "}";
}

inline std::string render_java(const Value& v, const std::string& raw) {
  const std::string t = trim(raw);
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_int()) {
    std::string s = std::to_string(v.as_int());
    if (t == "long" || t == "Long") s += "L";
    return s;
  }
  if (v.is_float()) {
    std::string s = float_literal(v.as_float());
    if (t == "float" || t == "Float") s += "f";
    return s;
  }
  if (v.is_str()) return "\"" + escape_common(v.as_str()) + "\"";
  // list
  const std::string elem = java_list_elem_raw(t);
  if (java_is_array(t)) {
    return "new " + t + render_java_array_inner(v, elem);
  }
  const std::string elem_t = elem.empty() ? "Object" : elem;
  const Value::List& xs = v.as_list();
  if (xs.empty()) return "new java.util.ArrayList<" + elem_t + ">()";
  std::string out = "new java.util.ArrayList<" + elem_t +
                    ">(java.util.Arrays.asList(";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += render_java(xs[i], elem);
  }
  return out + "))";
}

inline std::string render_python(const Value& v) {
  if (v.is_bool()) return v.as_bool() ? "True" : "False";
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_float()) return float_literal(v.as_float());
  if (v.is_str()) return "\"" + escape_common(v.as_str()) + "\"";
  std::string out = "[";
  const Value::List& xs = v.as_list();
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += render_python(xs[i]);
  }
  return out + "]";
}

// drop const/& qualifiers so the remaining text can prefix a braced literal
inline std::string cpp_clean_type(const std::string& raw) {
  const std::string t = replace_all(raw, "&", " ");
  std::vector<std::string> words;
  std::string cur;
  for (char c : t) {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty() && cur != "const") words.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() && cur != "const") words.push_back(cur);
  return join(words, " ");
}

inline std::string render_cpp(const Value& v, const std::string& raw,
                              bool top_level) {
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_float()) return float_literal(v.as_float());
  if (v.is_str()) {
    const std::string lit = "\"" + escape_common(v.as_str()) + "\"";
    // bare string literals are const char*; spell the type at call sites
    return top_level ? "std::string(" + lit + ")" : lit;
  }
  // list: spell the full vector type at the top level so overload
  // resolution cannot go astray; inner levels use plain braces
  std::string inner;
  const Value::List& xs = v.as_list();
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) inner += ", ";
    inner += render_cpp(xs[i], "", false);
  }
  if (top_level) {
    std::string t = cpp_clean_type(raw);
    if (t.empty()) t = "std::vector<long long>";
    return t + "{" + inner + "}";
  }
  return "{" + inner + "}";
}

}  // namespace detail

// Renders a value as a call-site literal in the given language. `raw` is the
// parameter's source type text (needed by java to pick arrays vs lists and
// the float suffix; used by cpp to spell the vector type).
inline std::string render_literal(const Value& v, Lang lang,
                                  const std::string& raw) {
  switch (lang) {
    case Lang::python: return detail::render_python(v);
    case Lang::java: return detail::render_java(v, raw);
    case Lang::cpp: return detail::render_cpp(v, raw, true);
  }
  throw InternalError("bad lang");
}

}  // namespace xlat
