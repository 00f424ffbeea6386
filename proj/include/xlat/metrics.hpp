#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "xlat/sandbox.hpp"
#include "xlat/tokenize.hpp"

namespace xlat {

struct JudgedExample {
  std::string example_id;
  std::vector<bool> verdicts;  // model-score order, best first
};

inline json judged_to_json(const JudgedExample& e) {
  json j;
  j["example_id"] = e.example_id;
  j["verdicts"] = e.verdicts;
  return j;
}

inline JudgedExample judged_from_json(const json& j) {
  JudgedExample e;
  e.example_id = j.at("example_id").get<std::string>();
  e.verdicts = j.at("verdicts").get<std::vector<bool>>();
  if (e.verdicts.empty())
    throw ValidationError("judged example '" + e.example_id +
                          "' has no verdicts");
  return e;
}

// ---------------------------------------------------------------------------
// CA@k: fraction of examples with at least one pass in the first k verdicts.
// ---------------------------------------------------------------------------
inline double ca_at_k(const std::vector<JudgedExample>& examples, int k) {
  if (k < 1) throw ValidationError("ca_at_k: k must be >= 1");
  if (examples.empty()) throw ValidationError("ca_at_k: empty example list");
  size_t hits = 0;
  for (const JudgedExample& e : examples) {
    const size_t upto = std::min<size_t>(k, e.verdicts.size());
    for (size_t i = 0; i < upto; ++i) {
      if (e.verdicts[i]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

// ---------------------------------------------------------------------------
// Corpus BLEU over code tokens. Modified n-gram precisions for n=1..4 with
// floor smoothing (a zero numerator becomes 1/(2*denominator)); orders whose
// candidate n-gram count is zero are left out of the geometric mean entirely,
// so a one-token candidate equal to its reference still scores 100. Brevity
// penalty uses the closest reference length (ties to the shorter).
// ---------------------------------------------------------------------------
inline double bleu(const std::vector<std::string>& candidates,
                   const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size())
    throw ValidationError("bleu: candidate/reference length mismatch");
  for (const auto& refs : references)
    if (refs.empty()) throw ValidationError("bleu: empty reference list");

  constexpr int kMaxOrder = 4;
  std::array<std::int64_t, kMaxOrder> num{}, den{};
  std::int64_t cand_len = 0, ref_len = 0;

  using Counts = std::map<std::vector<std::string>, std::int64_t>;
  auto ngram_counts = [](const std::vector<std::string>& toks, int n) {
    Counts c;
    if (static_cast<int>(toks.size()) >= n)
      for (size_t i = 0; i + n <= toks.size(); ++i)
        ++c[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    return c;
  };

  for (size_t e = 0; e < candidates.size(); ++e) {
    const std::vector<std::string> cand = code_tokens(candidates[e]);
    std::vector<std::vector<std::string>> refs;
    refs.reserve(references[e].size());
    for (const std::string& r : references[e]) refs.push_back(code_tokens(r));

    cand_len += static_cast<std::int64_t>(cand.size());
    std::int64_t best_ref = static_cast<std::int64_t>(refs[0].size());
    for (const auto& r : refs) {
      const auto len = static_cast<std::int64_t>(r.size());
      const auto diff = [&](std::int64_t l) {
        return std::llabs(l - static_cast<std::int64_t>(cand.size()));
      };
      if (diff(len) < diff(best_ref) || (diff(len) == diff(best_ref) && len < best_ref))
        best_ref = len;
    }
    ref_len += best_ref;

    for (int n = 1; n <= kMaxOrder; ++n) {
      const Counts cc = ngram_counts(cand, n);
      Counts max_ref;
      for (const auto& r : refs)
        for (const auto& [gram, cnt] : ngram_counts(r, n))
          max_ref[gram] = std::max(max_ref[gram], cnt);
      for (const auto& [gram, cnt] : cc) {
        den[n - 1] += cnt;
        const auto it = max_ref.find(gram);
        if (it != max_ref.end()) num[n - 1] += std::min(cnt, it->second);
      }
    }
  }

  if (cand_len == 0) return 0.0;

  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (den[n] == 0) continue;
    const double p =
        num[n] > 0 ? static_cast<double>(num[n]) / static_cast<double>(den[n])
                   : 1.0 / (2.0 * static_cast<double>(den[n]));
    log_sum += std::log(p);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double geo = std::exp(log_sum / orders);
  const double bp =
      cand_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(cand_len));
  return 100.0 * bp * geo;
}

// ---------------------------------------------------------------------------
// Syntax accuracy: fraction of outputs passing a compile/parse-only check.
// ---------------------------------------------------------------------------
inline double syntax_accuracy(
    const std::vector<std::pair<std::string, Lang>>& outputs,
    const ToolchainConfig& tc) {
  if (outputs.empty()) throw ValidationError("syntax_accuracy: empty input");
  std::vector<char> ok(outputs.size(), 0);
  run_parallel(outputs.size(), tc.workers, [&](size_t i) {
    ok[i] = check_syntax(outputs[i].first, outputs[i].second, tc).status ==
                    ExecResult::Status::ok
                ? 1
                : 0;
  });
  const auto hits = std::count(ok.begin(), ok.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(outputs.size());
}

// ---------------------------------------------------------------------------
// Construct detection: lexical, outside strings and comments.
// ---------------------------------------------------------------------------
enum class Construct { LOOP, IF, ELSE_IF };

inline std::string to_string(Construct c) {
  switch (c) {
    case Construct::LOOP: return "LOOP";
    case Construct::IF: return "IF";
    case Construct::ELSE_IF: return "ELSE_IF";
  }
  return "?";
}

inline constexpr std::array<Construct, 3> kAllConstructs = {
    Construct::LOOP, Construct::IF, Construct::ELSE_IF};

inline std::set<Construct> detect_constructs(const std::string& code,
                                             Lang lang) {
  std::set<Construct> out;
  const std::vector<Token> toks = lex(mask_code(code, lang));
  for (size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != Token::Kind::ident) continue;
    const std::string& w = toks[i].text;
    if (w == "for" || w == "while") out.insert(Construct::LOOP);
    if (w == "if") out.insert(Construct::IF);
    if (lang == Lang::python) {
      if (w == "elif") out.insert(Construct::ELSE_IF);
    } else if (w == "else" && i + 1 < toks.size() &&
               toks[i + 1].kind == Token::Kind::ident &&
               toks[i + 1].text == "if") {
      // comments are masked to spaces, so token adjacency is all we need
      out.insert(Construct::ELSE_IF);
    }
  }
  return out;
}

struct Prf {
  double precision = 0.0;  // all on the 0..100 scale
  double recall = 0.0;
  double f1 = 0.0;
};

inline std::map<Construct, Prf> construct_match(
    const std::vector<std::string>& outputs,
    const std::vector<std::string>& references,
    const std::vector<Lang>& langs) {
  if (outputs.size() != references.size() || outputs.size() != langs.size())
    throw ValidationError("construct_match: length mismatch");
  std::map<Construct, std::array<std::int64_t, 3>> conf;  // tp, fp, fn
  for (Construct c : kAllConstructs) conf[c] = {0, 0, 0};
  for (size_t i = 0; i < outputs.size(); ++i) {
    const std::set<Construct> pred = detect_constructs(outputs[i], langs[i]);
    const std::set<Construct> truth = detect_constructs(references[i], langs[i]);
    for (Construct c : kAllConstructs) {
      const bool p = pred.count(c) > 0, t = truth.count(c) > 0;
      if (p && t) ++conf[c][0];
      else if (p) ++conf[c][1];
      else if (t) ++conf[c][2];
    }
  }
  std::map<Construct, Prf> out;
  for (Construct c : kAllConstructs) {
    const auto [tp, fp, fn] = std::tuple{conf[c][0], conf[c][1], conf[c][2]};
    Prf m;
    if (tp + fp > 0) m.precision = 100.0 * tp / static_cast<double>(tp + fp);
    if (tp + fn > 0) m.recall = 100.0 * tp / static_cast<double>(tp + fn);
    if (m.precision + m.recall > 0)
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    out[c] = m;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unique-correct histogram.
// ---------------------------------------------------------------------------
struct HistBucket {
  int lo = 0;
  int hi = 0;  // INT_MAX = open-ended
  std::int64_t count = 0;

  std::string label() const {
    if (hi == std::numeric_limits<int>::max())
      return ">=" + std::to_string(lo);
    if (lo == hi) return std::to_string(lo);
    return std::to_string(lo) + "-" + std::to_string(hi);
  }
};

inline std::vector<HistBucket> default_buckets() {
  const int open = std::numeric_limits<int>::max();
  return {{0, 0, 0}, {1, 5, 0}, {6, 10, 0}, {11, 15, 0}, {16, open, 0}};
}

inline std::vector<HistBucket> unique_correct_histogram(
    const std::vector<JudgedExample>& examples, int n,
    std::vector<HistBucket> buckets) {
  for (HistBucket& b : buckets) b.count = 0;
  for (const JudgedExample& e : examples) {
    const size_t upto = std::min<size_t>(n, e.verdicts.size());
    int correct = 0;
    for (size_t i = 0; i < upto; ++i)
      if (e.verdicts[i]) ++correct;
    for (HistBucket& b : buckets) {
      if (correct >= b.lo && correct <= b.hi) {
        ++b.count;
        break;
      }
    }
  }
  return buckets;
}

// ---------------------------------------------------------------------------
// Welch's two-sample t-test, two-tailed.
// ---------------------------------------------------------------------------
struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

inline TTestResult t_test(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw ValidationError("t_test: each sample needs at least 2 values");
  auto mean = [](const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  auto var = [&](const std::vector<double>& xs, double m) {
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
  };
  const double ma = mean(a), mb = mean(b);
  const double va = var(a, ma), vb = var(b, mb);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  TTestResult r;
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) {
    // both samples constant: equal means are indistinguishable, different
    // means are infinitely separated
    r.t = 0.0;
    r.df = na + nb - 2;
    r.p = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  const double qa = va / na, qb = vb / nb;
  r.df = se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1));
  boost::math::students_t dist(r.df);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

// ---------------------------------------------------------------------------
// Aggregate report.
// ---------------------------------------------------------------------------
struct EvalReport {
  std::vector<std::pair<int, double>> ca_at;  // (k, rate), k ascending
  double bleu = 0.0;
  double syntax_acc = 0.0;
  std::map<Construct, Prf> construct_prf;
  std::vector<HistBucket> histogram;
  std::string pair_key;  // e.g. "java->cpp"

  json to_json() const {
    json j;
    json ca = json::object();
    for (const auto& [k, rate] : ca_at) ca[std::to_string(k)] = rate;
    j["pair"] = pair_key;
    j["ca_at"] = ca;
    j["bleu"] = bleu;
    j["syntax_accuracy"] = syntax_acc;
    json prf = json::object();
    for (const auto& [c, m] : construct_prf) {
      prf[to_string(c)] = {{"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1}};
    }
    j["construct_prf"] = prf;
    json hist = json::object();
    for (const HistBucket& b : histogram) hist[b.label()] = b.count;
    j["unique_histogram"] = hist;
    return j;
  }

  // flat text summary in table layout: pair | BLEU | CA@1
  std::string summary_text() const {
    char buf[160];
    double ca1 = 0.0;
    for (const auto& [k, rate] : ca_at)
      if (k == 1) ca1 = rate;
    std::snprintf(buf, sizeof buf, "%-14s  BLEU %6.2f  CA@1 %5.1f%%",
                  pair_key.c_str(), bleu, 100.0 * ca1);
    return buf;
  }
};

}  // namespace xlat
