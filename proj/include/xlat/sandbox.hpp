#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "xlat/candidate.hpp"
#include "xlat/corpus.hpp"
#include "xlat/testgen.hpp"

namespace xlat {

// ---------------------------------------------------------------------------
// Toolchain configuration. Command templates are argv vectors with three
// placeholders: {src} source file, {bin} compiled binary, {dir} work dir.
// ---------------------------------------------------------------------------
struct LangTool {
  std::vector<std::string> compile;  // empty = no compile step
  std::vector<std::string> run;
  std::vector<std::string> check;  // parse/compile only, for syntax accuracy
  std::string extension;
  std::string source_name;  // fixed file name when the language demands one
};

struct ToolchainConfig {
  LangTool python;
  LangTool java;
  LangTool cpp;
  int timeout_ms = 10000;
  int compile_timeout_ms = 30000;
  std::size_t output_cap = 1 << 20;
  int workers = 1;
  bool fail_fast = false;
  std::filesystem::path work_root;
  std::filesystem::path templates_dir;

  static ToolchainConfig defaults() {
    ToolchainConfig tc;
    tc.python.run = {"python3", "{src}"};
    tc.python.check = {"python3", "-m", "py_compile", "{src}"};
    tc.python.extension = "py";
    tc.java.compile = {"javac", "-d", "{dir}", "{src}"};
    tc.java.run = {"java", "-cp", "{dir}", "Main"};
    tc.java.check = {"javac", "-d", "{dir}", "{src}"};
    tc.java.extension = "java";
    tc.java.source_name = "Main.java";
    tc.cpp.compile = {"g++", "-std=c++17", "-O0", "-o", "{bin}", "{src}"};
    tc.cpp.run = {"{bin}"};
    tc.cpp.check = {"g++", "-std=c++17", "-fsyntax-only", "{src}"};
    tc.cpp.extension = "cpp";
    const unsigned hw = std::thread::hardware_concurrency();
    tc.workers = hw ? static_cast<int>(hw) : 1;
    tc.work_root = std::filesystem::temp_directory_path();
    return tc;
  }

  const LangTool& tool(Lang lang) const {
    switch (lang) {
      case Lang::python: return python;
      case Lang::java: return java;
      case Lang::cpp: return cpp;
    }
    throw InternalError("bad lang");
  }
};

struct ExecResult {
  enum class Status { ok, compile_error, runtime_error, timeout };
  Status status = Status::ok;
  std::string out;
  std::string err;
  std::int64_t duration_ms = 0;
};

inline std::string to_string(ExecResult::Status s) {
  switch (s) {
    case ExecResult::Status::ok: return "ok";
    case ExecResult::Status::compile_error: return "compile_error";
    case ExecResult::Status::runtime_error: return "runtime_error";
    case ExecResult::Status::timeout: return "timeout";
  }
  return "?";
}

namespace detail {

inline bool file_executable(const std::filesystem::path& p) {
  return ::access(p.c_str(), X_OK) == 0 &&
         std::filesystem::is_regular_file(p);
}

inline bool resolve_on_path(const std::string& name) {
  if (name.find('/') != std::string::npos)
    return file_executable(name);
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::string entry;
  for (const char* c = path;; ++c) {
    if (*c == ':' || *c == '\0') {
      if (!entry.empty() && file_executable(std::filesystem::path(entry) / name))
        return true;
      entry.clear();
      if (*c == '\0') break;
    } else {
      entry += *c;
    }
  }
  return false;
}

struct RawRun {
  int exit_code = 0;
  bool timed_out = false;
  std::string out;
  std::string err;
  std::int64_t duration_ms = 0;
};

// fork/exec with stdout+stderr capture and a wall-clock deadline enforced by
// killing the child's process group. An O_CLOEXEC pipe reports exec failure
// so a missing interpreter is distinguishable from a failing program.
inline RawRun spawn_capture(const std::vector<std::string>& argv,
                            const std::filesystem::path& cwd, int timeout_ms,
                            std::size_t output_cap) {
  if (argv.empty()) throw InternalError("spawn_capture: empty argv");

  int out_pipe[2], err_pipe[2], exec_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0 || pipe2(exec_pipe, O_CLOEXEC) != 0)
    throw Error("pipe() failed: " + std::string(std::strerror(errno)));

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = fork();
  if (pid < 0) throw Error("fork() failed: " + std::string(std::strerror(errno)));

  if (pid == 0) {
    setpgid(0, 0);
    const int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    close(exec_pipe[0]);
    if (chdir(cwd.c_str()) != 0) _exit(126);
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    const int e = errno;
    ssize_t ignored = write(exec_pipe[1], &e, sizeof e);
    (void)ignored;
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);
  close(exec_pipe[1]);

  RawRun r;
  struct Sink {
    int fd;
    std::string* dst;
    bool open = true;
  };
  Sink sinks[2] = {{out_pipe[0], &r.out}, {err_pipe[0], &r.err}};

  const auto deadline = start + std::chrono::milliseconds(timeout_ms);
  char buf[8192];
  bool killed = false;
  while (sinks[0].open || sinks[1].open) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    for (Sink& s : sinks)
      if (s.open) fds[nfds++] = {s.fd, POLLIN, 0};
    const auto now = std::chrono::steady_clock::now();
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
            .count());
    if (wait_ms < 0) wait_ms = 0;
    const int rc = poll(fds, nfds, killed ? -1 : wait_ms);
    if (rc == 0 && !killed) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      killed = true;
      r.timed_out = true;
      continue;
    }
    for (nfds_t i = 0; i < nfds; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      Sink& s = fds[i].fd == sinks[0].fd ? sinks[0] : sinks[1];
      const ssize_t n = read(s.fd, buf, sizeof buf);
      if (n > 0) {
        if (s.dst->size() < output_cap)
          s.dst->append(buf, std::min<std::size_t>(n, output_cap - s.dst->size()));
      } else {
        close(s.fd);
        s.open = false;
      }
    }
  }

  int exec_errno = 0;
  const ssize_t got = read(exec_pipe[0], &exec_errno, sizeof exec_errno);
  close(exec_pipe[0]);

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!killed) kill(-pid, SIGKILL);  // reap any stray grandchildren
  r.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  if (got == sizeof exec_errno)
    throw ToolchainError("cannot execute '" + argv[0] +
                         "': " + std::strerror(exec_errno));
  if (WIFEXITED(status))
    r.exit_code = WEXITSTATUS(status);
  else
    r.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  return r;
}

inline std::vector<std::string> fill_template(
    const std::vector<std::string>& tmpl, const std::filesystem::path& src,
    const std::filesystem::path& bin, const std::filesystem::path& dir) {
  std::vector<std::string> argv;
  argv.reserve(tmpl.size());
  for (const std::string& a : tmpl) {
    std::string x = replace_all(a, "{src}", src.string());
    x = replace_all(x, "{bin}", bin.string());
    x = replace_all(x, "{dir}", dir.string());
    argv.push_back(std::move(x));
  }
  return argv;
}

class TempDir {
 public:
  explicit TempDir(const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    std::string tmpl = (root / "xlat-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data()))
      throw Error("mkdtemp failed: " + std::string(std::strerror(errno)));
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace detail

inline bool have_toolchain(Lang lang, const ToolchainConfig& tc) {
  const LangTool& t = tc.tool(lang);
  if (!t.compile.empty() && !detail::resolve_on_path(t.compile[0]))
    return false;
  if (t.run.empty()) return false;
  if (t.run[0] != "{bin}" && !detail::resolve_on_path(t.run[0])) return false;
  return true;
}

inline ExecResult run_program(const std::string& src_text, Lang lang,
                              int timeout_ms, const ToolchainConfig& tc) {
  const LangTool& t = tc.tool(lang);
  detail::TempDir dir(tc.work_root);
  const std::string fname =
      t.source_name.empty() ? "prog." + t.extension : t.source_name;
  const std::filesystem::path src = dir.path() / fname;
  const std::filesystem::path bin = dir.path() / "prog_bin";
  write_file_atomic(src, src_text);

  ExecResult res;
  if (!t.compile.empty()) {
    const detail::RawRun c = detail::spawn_capture(
        detail::fill_template(t.compile, src, bin, dir.path()),
        dir.path(), tc.compile_timeout_ms, tc.output_cap);
    res.duration_ms += c.duration_ms;
    if (c.timed_out) {
      res.status = ExecResult::Status::timeout;
      res.err = c.err;
      return res;
    }
    if (c.exit_code != 0) {
      res.status = ExecResult::Status::compile_error;
      res.out = c.out;
      res.err = c.err;
      return res;
    }
  }
  const detail::RawRun r = detail::spawn_capture(
      detail::fill_template(t.run, src, bin, dir.path()), dir.path(),
      timeout_ms, tc.output_cap);
  res.duration_ms += r.duration_ms;
  res.out = r.out;
  res.err = r.err;
  if (r.timed_out)
    res.status = ExecResult::Status::timeout;
  else if (r.exit_code != 0)
    res.status = ExecResult::Status::runtime_error;
  else
    res.status = ExecResult::Status::ok;
  return res;
}

// Compile/parse check only; blank text never reaches the toolchain.
inline ExecResult check_syntax(const std::string& src_text, Lang lang,
                               const ToolchainConfig& tc) {
  ExecResult res;
  if (is_blank(src_text)) {
    res.status = ExecResult::Status::compile_error;
    res.err = "empty program text";
    return res;
  }
  const LangTool& t = tc.tool(lang);
  if (t.check.empty()) throw ToolchainError("no syntax check command for " +
                                            std::string(to_string(lang)));
  detail::TempDir dir(tc.work_root);
  const std::string fname =
      t.source_name.empty() ? "prog." + t.extension : t.source_name;
  const std::filesystem::path src = dir.path() / fname;
  write_file_atomic(src, src_text);
  const detail::RawRun c = detail::spawn_capture(
      detail::fill_template(t.check, src, dir.path() / "prog_bin", dir.path()),
      dir.path(), tc.compile_timeout_ms, tc.output_cap);
  res.duration_ms = c.duration_ms;
  res.err = c.err;
  if (c.timed_out || c.exit_code != 0)
    res.status = ExecResult::Status::compile_error;
  return res;
}

// ---------------------------------------------------------------------------
// Test suites and verdicts.
// ---------------------------------------------------------------------------
struct TestCase {
  TestInput input;
  std::string expected;  // canonical stdout bytes of the source program
};

struct TestSuite {
  std::string source_id;
  Lang source_lang = Lang::python;
  Signature sig;
  std::vector<TestCase> cases;
  bool usable() const { return !cases.empty(); }
};

struct FilterReport {
  int kept = 0;
  int dropped_runtime_error = 0;
  int dropped_timeout = 0;
  bool compile_error = false;
  std::string reason;
};

inline json suite_to_json(const TestSuite& s) {
  json j;
  j["source_id"] = s.source_id;
  j["lang"] = to_string(s.source_lang);
  j["signature"] = signature_to_json(s.sig);
  json cases = json::array();
  for (const TestCase& c : s.cases) {
    json args = json::array();
    for (const Value& v : c.input.args) args.push_back(value_to_json(v));
    cases.push_back({{"args", args}, {"expected", c.expected}});
  }
  j["cases"] = cases;
  return j;
}

inline TestSuite suite_from_json(const json& j) {
  TestSuite s;
  s.source_id = j.at("source_id").get<std::string>();
  s.source_lang = lang_from_string(j.at("lang").get<std::string>());
  s.sig = signature_from_json(j.at("signature"));
  for (const json& c : j.at("cases")) {
    TestCase tc;
    const json& args = c.at("args");
    if (args.size() != s.sig.params.size())
      throw ValidationError("suite for '" + s.source_id +
                            "': case arity does not match signature");
    for (size_t i = 0; i < args.size(); ++i)
      tc.input.args.push_back(
          value_from_json(args[i], s.sig.params[i].type));
    tc.expected = c.at("expected").get<std::string>();
    s.cases.push_back(std::move(tc));
  }
  return s;
}

enum class CaseStatus { match, mismatch, error, timeout };

inline std::string to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::match: return "match";
    case CaseStatus::mismatch: return "mismatch";
    case CaseStatus::error: return "error";
    case CaseStatus::timeout: return "timeout";
  }
  return "?";
}

struct Verdict {
  int candidate_rank = 0;
  bool passed = false;
  std::vector<CaseStatus> per_case;
};

namespace detail {

// "exactly the same output" modulo one trailing newline.
inline std::string strip_one_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

inline std::pair<TestSuite, FilterReport> build_test_suite(
    const Program& p, const Signature& sig,
    const std::vector<TestInput>& inputs, const ToolchainConfig& tc,
    const HarnessTemplates& templates) {
  TestSuite suite;
  suite.source_id = p.id;
  suite.source_lang = p.lang;
  suite.sig = sig;
  FilterReport report;

  std::vector<ExecResult> results(inputs.size());
  std::atomic<bool> compile_failed{false};
  run_parallel(inputs.size(), tc.workers, [&](size_t i) {
    if (compile_failed.load()) {
      results[i].status = ExecResult::Status::compile_error;
      return;
    }
    const std::string harness = emit_harness(templates, p, sig, inputs, i);
    results[i] = run_program(harness, p.lang, tc.timeout_ms, tc);
    if (results[i].status == ExecResult::Status::compile_error)
      compile_failed.store(true);
  });

  for (size_t i = 0; i < inputs.size(); ++i) {
    switch (results[i].status) {
      case ExecResult::Status::ok:
        suite.cases.push_back({inputs[i], results[i].out});
        ++report.kept;
        break;
      case ExecResult::Status::runtime_error:
        ++report.dropped_runtime_error;
        break;
      case ExecResult::Status::timeout:
        ++report.dropped_timeout;
        break;
      case ExecResult::Status::compile_error:
        report.compile_error = true;
        if (report.reason.empty())
          report.reason = "compile_error: " + results[i].err;
        break;
    }
  }
  if (report.compile_error) {
    suite.cases.clear();
    report.kept = 0;
    if (report.reason.empty()) report.reason = "compile_error";
  } else if (suite.cases.empty() && report.reason.empty()) {
    report.reason = "no surviving inputs";
  }
  return {std::move(suite), std::move(report)};
}

// Judges one candidate against a suite. The harness is emitted from the
// CANDIDATE's own signature, so a candidate whose arity or parameter types
// do not line up with the suite gets an all-error verdict instead of a
// nonsense call.
inline Verdict judge_candidate(const std::string& cand_text, Lang cand_lang,
                               const TestSuite& suite,
                               const ToolchainConfig& tc,
                               const HarnessTemplates& templates,
                               int rank = 0) {
  Verdict v;
  v.candidate_rank = rank;
  if (!suite.usable()) throw ValidationError("judge_candidate: unusable suite");
  v.per_case.assign(suite.cases.size(), CaseStatus::error);

  Program cand;
  cand.id = "candidate";
  cand.lang = cand_lang;
  cand.code = cand_text;

  Signature cand_sig;
  try {
    cand_sig = extract_signature(cand);
  } catch (const Error&) {
    return v;  // unextractable candidate: all error
  }
  if (cand_sig.params.size() != suite.sig.params.size()) return v;
  for (size_t i = 0; i < cand_sig.params.size(); ++i)
    if (!(cand_sig.params[i].type == suite.sig.params[i].type)) return v;

  std::vector<TestInput> inputs;
  inputs.reserve(suite.cases.size());
  for (const TestCase& c : suite.cases) inputs.push_back(c.input);

  bool all_match = true;
  for (size_t i = 0; i < suite.cases.size(); ++i) {
    const std::string harness =
        emit_harness(templates, cand, cand_sig, inputs, i);
    const ExecResult r = run_program(harness, cand_lang, tc.timeout_ms, tc);
    CaseStatus cs;
    switch (r.status) {
      case ExecResult::Status::ok:
        cs = detail::strip_one_newline(r.out) ==
                     detail::strip_one_newline(suite.cases[i].expected)
                 ? CaseStatus::match
                 : CaseStatus::mismatch;
        break;
      case ExecResult::Status::timeout:
        cs = CaseStatus::timeout;
        break;
      default:
        cs = CaseStatus::error;
        break;
    }
    v.per_case[i] = cs;
    if (cs != CaseStatus::match) {
      all_match = false;
      if (tc.fail_fast) {
        v.per_case.resize(i + 1);  // unrun cases are not reported
        break;
      }
      if (cs == CaseStatus::error && r.status == ExecResult::Status::compile_error) {
        // same code compiles identically for every case; don't redo it
        for (size_t k = i + 1; k < suite.cases.size(); ++k)
          v.per_case[k] = CaseStatus::error;
        break;
      }
    }
  }
  v.passed = all_match &&
             std::all_of(v.per_case.begin(), v.per_case.end(),
                         [](CaseStatus s) { return s == CaseStatus::match; });
  return v;
}

inline json verdict_to_json(const Verdict& v) {
  json j;
  j["candidate_rank"] = v.candidate_rank;
  j["passed"] = v.passed;
  json pc = json::array();
  for (CaseStatus s : v.per_case) pc.push_back(to_string(s));
  j["per_case"] = pc;
  return j;
}

struct FilterOutcome {
  std::vector<Candidate> correct;  // score order preserved
  std::vector<Verdict> verdicts;   // one per input candidate, by rank
};

inline FilterOutcome filter_candidates(const std::vector<Candidate>& cands,
                                       Lang cand_lang, const TestSuite& suite,
                                       const ToolchainConfig& tc,
                                       const HarnessTemplates& templates) {
  if (!suite.usable())
    throw ValidationError("filter_candidates: unusable suite");
  FilterOutcome out;
  out.verdicts.resize(cands.size());
  run_parallel(cands.size(), tc.workers, [&](size_t i) {
    out.verdicts[i] = judge_candidate(cands[i].text, cand_lang, suite, tc,
                                      templates, cands[i].rank);
  });
  for (size_t i = 0; i < cands.size(); ++i)
    if (out.verdicts[i].passed) out.correct.push_back(cands[i]);
  return out;
}

}  // namespace xlat
