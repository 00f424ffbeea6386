#include "xlat/corpus.hpp"

#include <gtest/gtest.h>

#include <string>

#include "test_util.hpp"

namespace xlat {
namespace {

Program prog(std::string id, Lang lang, std::string code) {
  Program p;
  p.id = std::move(id);
  p.lang = lang;
  p.code = std::move(code);
  return p;
}

std::string comparable_line(const std::string& src_id, Lang src_lang,
                            const std::string& tgt_id, Lang tgt_lang,
                            Origin origin) {
  ComparableExample ex;
  ex.src = prog(src_id, src_lang, "def f(x: int) -> int:\n    return x");
  ex.tgt = prog(tgt_id, tgt_lang, "int f(int x) { return x; }");
  ex.origin = origin;
  return record_to_json(ex).dump();
}

TEST(LoadDataset, EmptyFileGivesEmptyDataset) {
  testing::TempTestDir dir;
  const auto p = dir.file("empty.jsonl", "");
  const MonoDataset ds = load_dataset<Program>(p);
  EXPECT_EQ(ds.size(), 0u);
  EXPECT_EQ(ds.name, "empty");
}

TEST(LoadDataset, SingleParallelRecord) {
  testing::TempTestDir dir;
  ParallelExample ex;
  ex.src = prog("s1", Lang::java, "static int f(int x) { return x; }");
  ex.refs.push_back(prog("r1", Lang::python, "def f(x: int) -> int:\n    return x"));
  const auto p = dir.file("one.jsonl", record_to_json(ex).dump() + "\n");
  const ParallelDataset ds = load_dataset<ParallelExample>(p);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.records[0].refs.size(), 1u);
  EXPECT_EQ(ds.records[0], ex);
}

TEST(LoadDataset, BadLineThreeNamedInError) {
  testing::TempTestDir dir;
  std::string text;
  text += comparable_line("a1", Lang::java, "b1", Lang::python, Origin::natural) + "\n";
  text += comparable_line("a2", Lang::java, "b2", Lang::python, Origin::natural) + "\n";
  text += comparable_line("a3", Lang::java, "b3", Lang::java, Origin::natural) + "\n";
  text += comparable_line("a4", Lang::java, "b4", Lang::python, Origin::knn) + "\n";
  text += comparable_line("a5", Lang::python, "b5", Lang::cpp, Origin::random) + "\n";
  const auto p = dir.file("five.jsonl", text);

  const auto report = load_dataset_lenient<ComparableExample>(p);
  EXPECT_EQ(report.dataset.size(), 4u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].line, 3u);
  EXPECT_TRUE(contains(report.errors[0].message, "src.lang == tgt.lang"));
  EXPECT_EQ(report.dataset.size() + report.errors.size(), report.lines);

  try {
    load_dataset<ComparableExample>(p);
    FAIL() << "strict load must throw";
  } catch (const ParseError& e) {
    EXPECT_TRUE(contains(e.what(), ":3:"));
    EXPECT_TRUE(contains(e.what(), p.string()));
  }
}

TEST(LoadDataset, MalformedJsonReportsLine) {
  testing::TempTestDir dir;
  std::string text = comparable_line("a1", Lang::java, "b1", Lang::python,
                                     Origin::natural) + "\n";
  text += "{not json\n";
  const auto p = dir.file("bad.jsonl", text);
  const auto report = load_dataset_lenient<ComparableExample>(p);
  EXPECT_EQ(report.dataset.size(), 1u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].line, 2u);
  EXPECT_TRUE(contains(report.errors[0].message, "malformed record"));
}

TEST(LoadDataset, BlankLinesSkippedAndAccounted) {
  testing::TempTestDir dir;
  std::string text = "\n";
  text += record_to_json(prog("p1", Lang::python, "def f(x: int) -> int:\n    return x")).dump() + "\n";
  text += "   \n";
  text += record_to_json(prog("p2", Lang::cpp, "int g(int x) { return x; }")).dump() + "\n";
  const auto p = dir.file("blanks.jsonl", text);
  const auto report = load_dataset_lenient<Program>(p);
  EXPECT_EQ(report.lines, 2u);
  EXPECT_EQ(report.dataset.size(), 2u);
  EXPECT_TRUE(report.errors.empty());
}

TEST(LoadDataset, DuplicateIdRejected) {
  testing::TempTestDir dir;
  std::string text = record_to_json(prog("p1", Lang::python, "x = 1")).dump() + "\n";
  text += record_to_json(prog("p1", Lang::java, "int x;")).dump() + "\n";
  const auto p = dir.file("dup.jsonl", text);
  const auto report = load_dataset_lenient<Program>(p);
  EXPECT_EQ(report.dataset.size(), 1u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].line, 2u);
  EXPECT_TRUE(contains(report.errors[0].message, "duplicate id"));
}

TEST(LoadDataset, DuplicateComparablePairRejectedButReuseAllowed) {
  testing::TempTestDir dir;
  std::string text;
  text += comparable_line("a1", Lang::java, "b1", Lang::python, Origin::knn) + "\n";
  // the same src paired with another tgt is fine (KNN neighbors)
  text += comparable_line("a1", Lang::java, "b2", Lang::python, Origin::knn) + "\n";
  // the identical pairing twice is a bug
  text += comparable_line("a1", Lang::java, "b1", Lang::python, Origin::knn) + "\n";
  const auto p = dir.file("pairs.jsonl", text);
  const auto report = load_dataset_lenient<ComparableExample>(p);
  EXPECT_EQ(report.dataset.size(), 2u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].line, 3u);
}

TEST(LoadDataset, ParallelInvariantsEnforced) {
  testing::TempTestDir dir;
  ParallelExample dup_refs;
  dup_refs.src = prog("s1", Lang::java, "static int f(int x) { return x; }");
  dup_refs.refs.push_back(prog("r1", Lang::python, "def f(x: int) -> int:\n    return x"));
  dup_refs.refs.push_back(prog("r2", Lang::python, "def f(x: int) -> int:\n    return x"));

  ParallelExample mixed;
  mixed.src = prog("s2", Lang::java, "static int f(int x) { return x; }");
  mixed.refs.push_back(prog("r3", Lang::python, "def f(x: int) -> int:\n    return x"));
  mixed.refs.push_back(prog("r4", Lang::cpp, "int f(int x) { return x; }"));

  ParallelExample same_lang;
  same_lang.src = prog("s3", Lang::python, "def g(x: int) -> int:\n    return x");
  same_lang.refs.push_back(prog("r5", Lang::python, "def f(x: int) -> int:\n    return x"));

  std::string text = record_to_json(dup_refs).dump() + "\n" +
                     record_to_json(mixed).dump() + "\n" +
                     record_to_json(same_lang).dump() + "\n";
  const auto p = dir.file("par.jsonl", text);
  const auto report = load_dataset_lenient<ParallelExample>(p);
  EXPECT_EQ(report.dataset.size(), 0u);
  ASSERT_EQ(report.errors.size(), 3u);
  EXPECT_TRUE(contains(report.errors[0].message, "duplicate refs"));
  EXPECT_TRUE(contains(report.errors[1].message, "mixes ref languages"));
  EXPECT_TRUE(contains(report.errors[2].message, "refs in the source language"));
}

TEST(LoadDataset, MissingIdsBackfilledFromNameAndLine) {
  testing::TempTestDir dir;
  json j;
  j["lang"] = "python";
  j["code"] = "def f(x: int) -> int:\n    return x";
  const auto p = dir.file("noid.jsonl", "\n" + j.dump() + "\n");
  const MonoDataset ds = load_dataset<Program>(p);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.records[0].id, "noid:2");

  ParallelExample ex;
  ex.src = prog("", Lang::java, "static int f(int x) { return x; }");
  ex.refs.push_back(prog("", Lang::python, "def f(x: int) -> int:\n    return x"));
  ex.refs.push_back(prog("", Lang::python, "def f(x: int) -> int:\n    return x + 0"));
  const auto p2 = dir.file("noid2.jsonl", record_to_json(ex).dump() + "\n");
  const ParallelDataset ds2 = load_dataset<ParallelExample>(p2);
  ASSERT_EQ(ds2.size(), 1u);
  EXPECT_EQ(ds2.records[0].src.id, "noid2:1");
  EXPECT_EQ(ds2.records[0].refs[0].id, "noid2:1#ref0");
  EXPECT_EQ(ds2.records[0].refs[1].id, "noid2:1#ref1");
}

TEST(WriteDataset, RoundTripAndByteStable) {
  testing::TempTestDir dir;
  ComparableDataset ds;
  ds.name = "rt";
  for (int i = 0; i < 5; ++i) {
    ComparableExample ex;
    ex.src = prog("s" + std::to_string(i), Lang::java,
                  "static int f(int x) { return x + " + std::to_string(i) + "; }");
    ex.src.problem_id = "prob" + std::to_string(i % 2);
    ex.tgt = prog("t" + std::to_string(i), Lang::python,
                  "def f(x: int) -> int:\n    return x + " + std::to_string(i));
    ex.origin = i % 2 ? Origin::generated : Origin::natural;
    ds.records.push_back(std::move(ex));
  }
  const auto p = dir.path() / "rt.jsonl";
  write_dataset(ds, p);
  const ComparableDataset back = load_dataset<ComparableExample>(p, "rt");
  ASSERT_EQ(back.size(), ds.size());
  for (size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back.records[i], ds.records[i]);

  const std::string first = read_file(p);
  write_dataset(back, p);
  EXPECT_EQ(read_file(p), first);
}

TEST(WriteDataset, UnicodeAndNewlinesSurvive) {
  testing::TempTestDir dir;
  MonoDataset ds;
  ds.name = "uni";
  Program p1 = prog("u1", Lang::python,
                    "def f(x: int) -> str:\n    return \"caf\xc3\xa9 \xe2\x98\x83\"\n");
  p1.docstring = "returns caf\xc3\xa9\nwith a newline";
  ds.records.push_back(p1);
  const auto p = dir.path() / "uni.jsonl";
  write_dataset(ds, p);
  // one record, one line
  EXPECT_EQ(split_lines(read_file(p)).size(), 1u);
  const MonoDataset back = load_dataset<Program>(p, "uni");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back.records[0], p1);
}

TEST(Stats, EmptyDatasetAllZero) {
  const StatsReport r = corpus_stats(MonoDataset{"e", {}});
  EXPECT_EQ(r.total, 0u);
  EXPECT_TRUE(r.by_language.empty());
  EXPECT_TRUE(r.per_problem.empty());
  EXPECT_EQ(r.distinct_problems, 0u);
}

TEST(Stats, OriginHistogram) {
  ComparableDataset ds;
  ds.name = "h";
  for (int i = 0; i < 10; ++i) {
    ComparableExample ex;
    ex.src = prog("s" + std::to_string(i), Lang::java, "class A {}");
    ex.tgt = prog("t" + std::to_string(i), Lang::python, "pass");
    ex.origin = i < 4 ? Origin::natural : Origin::generated;
    ds.records.push_back(std::move(ex));
  }
  const StatsReport r = corpus_stats(ds);
  EXPECT_EQ(r.total, 10u);
  EXPECT_EQ(r.by_origin.at("natural"), 4u);
  EXPECT_EQ(r.by_origin.at("generated"), 6u);
  EXPECT_EQ(r.by_pair.at("java->python"), 10u);
  size_t sum = 0;
  for (const auto& [k, v] : r.by_origin) sum += v;
  EXPECT_EQ(sum, r.total);
}

TEST(Stats, MonoLanguagesAndProblems) {
  MonoDataset ds;
  ds.name = "m";
  Program a = prog("a", Lang::java, "class A {}");
  a.problem_id = "p1";
  Program b = prog("b", Lang::java, "class B {}");
  b.problem_id = "p1";
  Program c = prog("c", Lang::python, "pass");
  c.problem_id = "p2";
  Program d = prog("d", Lang::cpp, "int x;");
  ds.records = {a, b, c, d};
  const StatsReport r = corpus_stats(ds);
  EXPECT_EQ(r.by_language.at("java"), 2u);
  EXPECT_EQ(r.by_language.at("python"), 1u);
  EXPECT_EQ(r.by_language.at("cpp"), 1u);
  EXPECT_EQ(r.per_problem.at("p1"), 2u);
  EXPECT_EQ(r.per_problem.at("<none>"), 1u);
  EXPECT_EQ(r.distinct_problems, 2u);
  size_t sum = 0;
  for (const auto& [k, v] : r.by_language) sum += v;
  EXPECT_EQ(sum, r.total);
}

TEST(Stats, ParallelRefsHistogram) {
  ParallelDataset ds;
  ds.name = "pr";
  for (int i = 0; i < 3; ++i) {
    ParallelExample ex;
    ex.src = prog("s" + std::to_string(i), Lang::java, "class A {}");
    const int refs = i == 0 ? 1 : 3;
    for (int k = 0; k < refs; ++k)
      ex.refs.push_back(prog("r" + std::to_string(i) + "_" + std::to_string(k),
                             Lang::python, "pass  # " + std::to_string(k)));
    ds.records.push_back(std::move(ex));
  }
  const StatsReport r = corpus_stats(ds);
  EXPECT_EQ(r.refs_histogram.at(1), 1u);
  EXPECT_EQ(r.refs_histogram.at(3), 2u);
  const json j = r.to_json();
  EXPECT_EQ(j["refs_histogram"]["3"], 2);
  EXPECT_EQ(j["kind"], "parallel");
}

TEST(DatasetKindNames, RoundTrip) {
  EXPECT_EQ(dataset_kind_from_string("comparable"), DatasetKind::comparable);
  EXPECT_EQ(dataset_kind_from_string("mono"), DatasetKind::monolingual);
  EXPECT_THROW(dataset_kind_from_string("nope"), ValidationError);
  EXPECT_STREQ(to_string(DatasetKind::parallel), "parallel");
}

}  // namespace
}  // namespace xlat
