#pragma once

#include <string>

#include "xlat/corpus.hpp"

namespace xlat {

// One model-produced translation, best-first by score.
struct Candidate {
  int rank = 0;
  double score = 0.0;
  std::string text;

  bool operator==(const Candidate&) const = default;
};

inline json candidate_to_json(const Candidate& c) {
  json j;
  j["rank"] = c.rank;
  j["score"] = c.score;
  j["text"] = c.text;
  return j;
}

inline Candidate candidate_from_json(const json& j) {
  Candidate c;
  c.rank = j.at("rank").get<int>();
  c.score = j.at("score").get<double>();
  c.text = j.at("text").get<std::string>();
  return c;
}

}  // namespace xlat
