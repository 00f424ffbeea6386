#include "xlat/metrics.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "test_util.hpp"

namespace xlat {
namespace {

JudgedExample je(std::string id, std::vector<bool> v) {
  return JudgedExample{std::move(id), std::move(v)};
}

TEST(JudgedJson, RoundTripAndValidation) {
  const JudgedExample e = je("ex1", {true, false, true});
  const JudgedExample back = judged_from_json(judged_to_json(e));
  EXPECT_EQ(back.example_id, "ex1");
  EXPECT_EQ(back.verdicts, e.verdicts);
  json bad;
  bad["example_id"] = "ex2";
  bad["verdicts"] = json::array();
  EXPECT_THROW(judged_from_json(bad), ValidationError);
}

TEST(CaAtK, HandValues) {
  const std::vector<JudgedExample> ex = {
      je("a", {false, true, false}),   // hit at 2
      je("b", {true}),                 // hit at 1
      je("c", {false, false, false}),  // never
      je("d", {false, false, true}),   // hit at 3
  };
  EXPECT_DOUBLE_EQ(ca_at_k(ex, 1), 0.25);
  EXPECT_DOUBLE_EQ(ca_at_k(ex, 2), 0.5);
  EXPECT_DOUBLE_EQ(ca_at_k(ex, 3), 0.75);
  EXPECT_DOUBLE_EQ(ca_at_k(ex, 10), 0.75);  // k beyond list length
}

TEST(CaAtK, MonotoneInK) {
  Rng rng(31);
  std::vector<JudgedExample> ex;
  for (int i = 0; i < 40; ++i) {
    std::vector<bool> v;
    for (int k = 0; k < 20; ++k) v.push_back(rng.unit() < 0.1);
    ex.push_back(je("e" + std::to_string(i), std::move(v)));
  }
  double prev = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double cur = ca_at_k(ex, k);
    EXPECT_GE(cur, prev);
    prev = cur;
  }
}

TEST(CaAtK, Validation) {
  EXPECT_THROW(ca_at_k({}, 1), ValidationError);
  EXPECT_THROW(ca_at_k({je("a", {true})}, 0), ValidationError);
}

// Frozen corpus values, computed independently from the same tokenizer and
// smoothing definition before this implementation existed.
TEST(Bleu, FrozenMiniCorpus) {
  EXPECT_NEAR(bleu({"return a * 2"}, {{"return 2 * a", "return a + a"}}),
              45.180100180492, 1e-6);
  EXPECT_NEAR(bleu({"while i < n : i += 1"}, {{"while i < n : i = i + 1"}}),
              55.069531490318, 1e-6);
  EXPECT_NEAR(bleu({"x = a + b", "return a * 2", "while i < n : i += 1"},
                   {{"x = a + b"},
                    {"return 2 * a", "return a + a"},
                    {"while i < n : i = i + 1"}}),
              63.927633964394, 1e-6);
}

TEST(Bleu, IdentityIsHundred) {
  const std::vector<std::string> programs = {
      "x",
      "a + b",
      "def f(x):\n    return x * 2\n",
      "while i < n : i += 1",
  };
  for (const std::string& p : programs)
    EXPECT_NEAR(bleu({p}, {{p}}), 100.0, 1e-9) << p;
  // and as one corpus
  EXPECT_NEAR(bleu(programs, {{programs[0]}, {programs[1]}, {programs[2]},
                              {programs[3]}}),
              100.0, 1e-9);
}

TEST(Bleu, ClippingAgainstMultipleRefs) {
  EXPECT_NEAR(bleu({"a a b"}, {{"a a", "b b"}}), 62.996052494744, 1e-6);
}

TEST(Bleu, BrevityPenalty) {
  // shorter candidate with perfect precisions: BP = exp(1 - 4/2)
  EXPECT_NEAR(bleu({"a b"}, {{"a b c d"}}), 36.787944117144, 1e-6);
  // equidistant reference lengths resolve to the shorter: BP = 1
  EXPECT_NEAR(bleu({"a b c"}, {{"a b", "a b c d"}}), 100.0, 1e-9);
}

TEST(Bleu, DisjointLongCandidateNearZero) {
  std::string cand, ref;
  for (int i = 0; i < 64; ++i) {
    cand += "c" + std::to_string(i) + " ";
    ref += "r" + std::to_string(i) + " ";
  }
  const double s = bleu({cand}, {{ref}});
  EXPECT_NEAR(s, 0.800128043846, 1e-6);
  EXPECT_LT(s, 1.0);
}

TEST(Bleu, EmptyCandidateScoresZero) {
  EXPECT_DOUBLE_EQ(bleu({""}, {{"a b c"}}), 0.0);
}

TEST(Bleu, Validation) {
  EXPECT_THROW(bleu({"a", "b"}, {{"a"}}), ValidationError);
  EXPECT_THROW(bleu({"a"}, {{}}), ValidationError);
}

TEST(SyntaxAccuracy, PythonFraction) {
  testing::TempTestDir dir;
  ToolchainConfig tc = ToolchainConfig::defaults();
  tc.work_root = dir.path();
  tc.workers = 2;
  const std::vector<std::pair<std::string, Lang>> outs = {
      {"def f(x):\n    return x\n", Lang::python},
      {"def g(:\n", Lang::python},
      {"y = [1, 2]\n", Lang::python},
  };
  EXPECT_NEAR(syntax_accuracy(outs, tc), 2.0 / 3.0, 1e-12);
  EXPECT_THROW(syntax_accuracy({}, tc), ValidationError);
}

TEST(DetectConstructs, Python) {
  const auto all = detect_constructs(
      "def f(x):\n"
      "    for i in range(x):\n"
      "        if i > 2:\n"
      "            pass\n"
      "        elif i:\n"
      "            pass\n",
      Lang::python);
  EXPECT_TRUE(all.count(Construct::LOOP));
  EXPECT_TRUE(all.count(Construct::IF));
  EXPECT_TRUE(all.count(Construct::ELSE_IF));

  const auto none = detect_constructs(
      "s = 'if for while elif'\n# if for\nx = 1\n", Lang::python);
  EXPECT_TRUE(none.empty());

  const auto loop_only = detect_constructs("while x:\n    x -= 1\n",
                                           Lang::python);
  EXPECT_EQ(loop_only, (std::set<Construct>{Construct::LOOP}));
}

TEST(DetectConstructs, JavaElseIfAdjacency) {
  EXPECT_TRUE(detect_constructs("if (a) {} else if (b) {}", Lang::java)
                  .count(Construct::ELSE_IF));
  // comments and newlines between else and if do not break adjacency
  EXPECT_TRUE(detect_constructs("if (a) {} else /* x */ if (b) {}", Lang::java)
                  .count(Construct::ELSE_IF));
  EXPECT_TRUE(detect_constructs("if (a) {}\nelse\nif (b) {}", Lang::cpp)
                  .count(Construct::ELSE_IF));
  // a bare else is not ELSE_IF
  EXPECT_FALSE(detect_constructs("if (a) {} else {}", Lang::java)
                   .count(Construct::ELSE_IF));
  // strings and comments are masked
  EXPECT_TRUE(
      detect_constructs("String s = \"for while\"; // if\nint x = 1;", Lang::java)
          .empty());
  EXPECT_TRUE(detect_constructs("for (;;) {}", Lang::cpp).count(Construct::LOOP));
}

TEST(ConstructMatch, HandConfusion) {
  // example 1: pred {LOOP, IF}, truth {LOOP}         -> IF false positive
  // example 2: pred {IF},       truth {IF, ELSE_IF}  -> ELSE_IF false negative
  // example 3: pred {LOOP},     truth {LOOP}         -> clean
  const std::vector<std::string> outputs = {
      "while (a) { if (b) {} }",
      "if (a) {}",
      "for (;;) {}",
  };
  const std::vector<std::string> refs = {
      "while (a) {}",
      "if (a) {} else if (b) {}",
      "while (true) {}",
  };
  const std::vector<Lang> langs = {Lang::java, Lang::java, Lang::java};
  const auto prf = construct_match(outputs, refs, langs);

  // LOOP: tp=2 fp=0 fn=0
  EXPECT_DOUBLE_EQ(prf.at(Construct::LOOP).precision, 100.0);
  EXPECT_DOUBLE_EQ(prf.at(Construct::LOOP).recall, 100.0);
  EXPECT_DOUBLE_EQ(prf.at(Construct::LOOP).f1, 100.0);
  // IF: tp=1 fp=1 fn=0
  EXPECT_DOUBLE_EQ(prf.at(Construct::IF).precision, 50.0);
  EXPECT_DOUBLE_EQ(prf.at(Construct::IF).recall, 100.0);
  EXPECT_NEAR(prf.at(Construct::IF).f1, 200.0 / 3.0, 1e-9);
  // ELSE_IF: tp=0 fp=0 fn=1
  EXPECT_DOUBLE_EQ(prf.at(Construct::ELSE_IF).precision, 0.0);
  EXPECT_DOUBLE_EQ(prf.at(Construct::ELSE_IF).recall, 0.0);
  EXPECT_DOUBLE_EQ(prf.at(Construct::ELSE_IF).f1, 0.0);
}

TEST(ConstructMatch, AbsentEverywhereIsZeroNotNan) {
  const auto prf = construct_match({"x = 1"}, {"y = 2"}, {Lang::python});
  for (Construct c : kAllConstructs) {
    EXPECT_DOUBLE_EQ(prf.at(c).precision, 0.0);
    EXPECT_DOUBLE_EQ(prf.at(c).recall, 0.0);
    EXPECT_DOUBLE_EQ(prf.at(c).f1, 0.0);
  }
  EXPECT_THROW(construct_match({"a"}, {}, {}), ValidationError);
}

TEST(Histogram, BucketsAndLabels) {
  const auto buckets = default_buckets();
  ASSERT_EQ(buckets.size(), 5u);
  EXPECT_EQ(buckets[0].label(), "0");
  EXPECT_EQ(buckets[1].label(), "1-5");
  EXPECT_EQ(buckets[4].label(), ">=16");

  std::vector<JudgedExample> ex;
  auto with_hits = [](int hits) {
    std::vector<bool> v(20, false);
    for (int i = 0; i < hits; ++i) v[i] = true;
    return v;
  };
  ex.push_back(je("a", with_hits(0)));
  ex.push_back(je("b", with_hits(3)));
  ex.push_back(je("c", with_hits(5)));
  ex.push_back(je("d", with_hits(8)));
  ex.push_back(je("e", with_hits(15)));
  ex.push_back(je("f", with_hits(20)));
  const auto out = unique_correct_histogram(ex, 20, default_buckets());
  EXPECT_EQ(out[0].count, 1);  // 0
  EXPECT_EQ(out[1].count, 2);  // 3, 5
  EXPECT_EQ(out[2].count, 1);  // 8
  EXPECT_EQ(out[3].count, 1);  // 15
  EXPECT_EQ(out[4].count, 1);  // 20
  std::int64_t sum = 0;
  for (const auto& b : out) sum += b.count;
  EXPECT_EQ(sum, static_cast<std::int64_t>(ex.size()));
}

TEST(Histogram, NLimitsCountedPrefix) {
  std::vector<JudgedExample> ex = {je("a", std::vector<bool>(20, true))};
  const auto out = unique_correct_histogram(ex, 5, default_buckets());
  EXPECT_EQ(out[1].count, 1);  // only first 5 verdicts counted -> bucket 1-5
}

// Frozen against an independent Welch implementation.
TEST(TTest, FrozenExample) {
  const std::vector<double> a = {14.3, 16.1, 15.7, 15.2, 14.8};
  const std::vector<double> b = {13.9, 14.5, 14.2, 14.0};
  const TTestResult r = t_test(a, b);
  EXPECT_NEAR(r.t, 3.1030791295, 1e-6);
  EXPECT_NEAR(r.df, 5.2897369826, 1e-6);
  EXPECT_NEAR(r.p, 0.0248275545, 1e-6);

  const TTestResult rev = t_test(b, a);
  EXPECT_NEAR(rev.t, -r.t, 1e-12);
  EXPECT_NEAR(rev.p, r.p, 1e-12);
}

TEST(TTest, WellSeparatedSamplesAreSignificant) {
  const TTestResult r =
      t_test({70.1, 70.4, 69.8}, {62.6, 62.9, 62.4});
  EXPECT_NEAR(r.t, 33.0269981787, 1e-6);
  EXPECT_NEAR(r.p, 0.0000066643, 1e-7);
  EXPECT_LT(r.p, 0.01);
}

TEST(TTest, ZeroVarianceConventions) {
  const TTestResult same = t_test({5.0, 5.0, 5.0}, {5.0, 5.0});
  EXPECT_DOUBLE_EQ(same.t, 0.0);
  EXPECT_DOUBLE_EQ(same.p, 1.0);
  const TTestResult diff = t_test({5.0, 5.0}, {6.0, 6.0, 6.0});
  EXPECT_DOUBLE_EQ(diff.p, 0.0);
}

TEST(TTest, SampleSizeValidation) {
  EXPECT_THROW(t_test({1.0}, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(t_test({1.0, 2.0}, {}), ValidationError);
}

TEST(EvalReport, JsonAndSummaryShape) {
  EvalReport r;
  r.pair_key = "java->python";
  r.ca_at = {{1, 0.553}, {5, 0.7}};
  r.bleu = 42.5;
  r.syntax_acc = 0.9;
  r.histogram = default_buckets();
  r.construct_prf[Construct::LOOP] = {100.0, 50.0, 200.0 / 3.0};

  const json j = r.to_json();
  EXPECT_EQ(j["pair"], "java->python");
  EXPECT_DOUBLE_EQ(j["ca_at"]["1"].get<double>(), 0.553);
  EXPECT_DOUBLE_EQ(j["bleu"].get<double>(), 42.5);
  EXPECT_EQ(j["unique_histogram"].size(), 5u);
  EXPECT_DOUBLE_EQ(j["construct_prf"]["LOOP"]["recall"].get<double>(), 50.0);

  const std::string line = r.summary_text();
  EXPECT_TRUE(contains(line, "java->python"));
  EXPECT_TRUE(contains(line, "BLEU  42.50"));
  EXPECT_TRUE(contains(line, "CA@1  55.3%"));
}

}  // namespace
}  // namespace xlat
