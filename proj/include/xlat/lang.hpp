#pragma once

#include <string>
#include <string_view>

#include "xlat/error.hpp"

namespace xlat {

enum class Lang { java, python, cpp };

inline const char* to_string(Lang l) {
  switch (l) {
    case Lang::java: return "java";
    case Lang::python: return "python";
    case Lang::cpp: return "cpp";
  }
  return "?";
}

inline Lang lang_from_string(std::string_view s) {
  if (s == "java") return Lang::java;
  if (s == "python") return Lang::python;
  if (s == "cpp" || s == "c++") return Lang::cpp;
  throw ValidationError("unknown language: '" + std::string(s) +
                        "' (expected java, python or cpp)");
}

inline std::string lang_pair_key(Lang src, Lang tgt) {
  return std::string(to_string(src)) + "->" + to_string(tgt);
}

}  // namespace xlat
