#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "xlat/candidate.hpp"
#include "xlat/corpus.hpp"
#include "xlat/util.hpp"

namespace xlat {

// Unit-cost edit distance over Unicode scalar values, two-row DP.
inline int levenshtein(std::string_view a, std::string_view b) {
  const std::vector<char32_t> x = utf8_decode(a);
  const std::vector<char32_t> y = utf8_decode(b);
  if (x.empty()) return static_cast<int>(y.size());
  if (y.empty()) return static_cast<int>(x.size());
  std::vector<int> prev(y.size() + 1), cur(y.size() + 1);
  for (size_t j = 0; j <= y.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= x.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= y.size(); ++j) {
      const int sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

// Collapses runs of spaces/tabs and strips trailing blanks per line, so
// formatting noise does not count as diversity.
inline std::string normalize_ws(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::string line;
  auto flush = [&] {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    out += line;
    line.clear();
  };
  bool in_run = false;
  for (char c : text) {
    if (c == '\n') {
      flush();
      out += '\n';
      in_run = false;
    } else if (c == ' ' || c == '\t') {
      if (!in_run) line += ' ';
      in_run = true;
    } else {
      line += c;
      in_run = false;
    }
  }
  flush();
  return out;
}

struct SelectionConfig {
  int k = 5;
  bool normalize_ws = true;

  void validate() const {
    if (k < 1) throw ValidationError("selection k must be >= 1");
  }
};

// Greedy farthest-point selection: each pick maximizes the minimum edit
// distance to the anchors plus everything already selected. Ties go to the
// higher score, then the lexicographically smaller text. Candidates at
// distance 0 from the set are never added.
inline std::vector<Candidate> select_diverse(
    const std::vector<Candidate>& correct,
    const std::vector<std::string>& anchors, const SelectionConfig& cfg) {
  cfg.validate();
  if (anchors.empty())
    throw ValidationError("select_diverse: anchors must be non-empty");
  if (correct.empty()) return {};

  auto norm = [&](std::string_view s) {
    return cfg.normalize_ws ? normalize_ws(s) : std::string(s);
  };
  std::vector<std::string> cand_text(correct.size());
  for (size_t i = 0; i < correct.size(); ++i)
    cand_text[i] = norm(correct[i].text);

  std::vector<int> dmin(correct.size(), INT32_MAX);
  for (const std::string& a : anchors) {
    const std::string an = norm(a);
    for (size_t i = 0; i < correct.size(); ++i)
      dmin[i] = std::min(dmin[i], levenshtein(cand_text[i], an));
  }

  std::vector<bool> taken(correct.size(), false);
  std::vector<Candidate> out;
  const size_t want = std::min<size_t>(cfg.k, correct.size());
  while (out.size() < want) {
    int best = -1;
    for (size_t i = 0; i < correct.size(); ++i) {
      if (taken[i] || dmin[i] == 0) continue;
      if (best < 0) {
        best = static_cast<int>(i);
        continue;
      }
      const size_t b = static_cast<size_t>(best);
      if (dmin[i] != dmin[b]) {
        if (dmin[i] > dmin[b]) best = static_cast<int>(i);
      } else if (correct[i].score != correct[b].score) {
        if (correct[i].score > correct[b].score) best = static_cast<int>(i);
      } else if (correct[i].text < correct[b].text) {
        best = static_cast<int>(i);
      }
    }
    if (best < 0) break;
    taken[best] = true;
    out.push_back(correct[best]);
    for (size_t i = 0; i < correct.size(); ++i) {
      if (taken[i]) continue;
      dmin[i] = std::min(dmin[i],
                         levenshtein(cand_text[i], cand_text[best]));
    }
  }
  return out;
}

// Appends selected candidate texts to each example's reference list.
inline ParallelDataset augment_parallel(
    const ParallelDataset& ds,
    const std::map<std::string, std::vector<Candidate>>& selections) {
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < ds.records.size(); ++i)
    index[ds.records[i].src.id] = i;
  for (const auto& [id, _] : selections)
    if (!index.count(id))
      throw ValidationError("augment_parallel: unknown example id '" + id +
                            "'");

  ParallelDataset out;
  out.name = ds.name;
  out.records = ds.records;
  for (auto& ex : out.records) {
    const auto it = selections.find(ex.src.id);
    if (it == selections.end()) continue;
    const Lang ref_lang = ex.refs.front().lang;
    size_t n = ex.refs.size();
    for (const Candidate& c : it->second) {
      Program p;
      p.id = ex.src.id + "#ref" + std::to_string(n++);
      p.lang = ref_lang;
      p.code = c.text;
      ex.refs.push_back(std::move(p));
    }
    try {
      validate_record(ex);
    } catch (const ValidationError& e) {
      throw ValidationError("augment_parallel: example '" + ex.src.id +
                            "': " + e.what());
    }
  }
  return out;
}

}  // namespace xlat
