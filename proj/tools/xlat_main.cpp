#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xlat/commands.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  bool dry_run = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config file")
      ->envname("XLAT_CONFIG");
  cmd->add_flag("--dry-run", opts.dry_run,
                "validate config and print the plan, no side effects");
  cmd->add_option("--seed", opts.seed, "override the global seed");
  cmd->add_option("--out-dir", opts.out_dir, "override the output directory");
  cmd->add_option("--workers", opts.workers, "override the worker count");
}

xlat::PipelineConfig load_with_overrides(const CommonOpts& opts) {
  if (opts.config_path.empty())
    throw xlat::ValidationError(
        "missing --config (or XLAT_CONFIG environment variable)");
  xlat::PipelineConfig cfg = xlat::load_config(opts.config_path);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.pairing.seed = *opts.seed;
    cfg.gen.seed = *opts.seed;
  }
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.workers) {
    cfg.workers = *opts.workers;
    cfg.toolchain.workers = *opts.workers;
  }
  return cfg;
}

void print_plan(const xlat::PipelineConfig& cfg, const std::string& action) {
  std::cout << "dry-run: config ok\n"
            << "  pair: " << xlat::lang_pair_key(cfg.src_lang, cfg.tgt_lang)
            << "\n"
            << "  seed: " << cfg.seed << "\n"
            << "  out_dir: " << cfg.out_dir.string() << "\n"
            << "  would: " << action << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"data augmentation and evaluation toolkit for code translation"};
  app.require_subcommand(1);

  // stats
  auto* stats = app.add_subcommand("stats", "summarize a dataset file");
  std::string stats_file, stats_kind = "mono";
  stats->add_option("--file", stats_file, "dataset file (line-delimited)")
      ->required();
  stats->add_option("--kind", stats_kind, "mono | comparable | parallel");

  // build-comp
  CommonOpts bc_opts;
  auto* build_comp =
      app.add_subcommand("build-comp", "build a comparable-corpus dataset");
  std::string origin_name;
  build_comp
      ->add_option("--origin", origin_name,
                   "natural | generated | knn | random")
      ->required();
  add_common(build_comp, bc_opts);

  // gen-refs
  CommonOpts gr_opts;
  auto* gen_refs = app.add_subcommand(
      "gen-refs", "generate translation candidates per parallel example");
  add_common(gen_refs, gr_opts);

  // make-tests
  CommonOpts mt_opts;
  auto* make_tests = app.add_subcommand(
      "make-tests", "build execution-verified test suites from sources");
  add_common(make_tests, mt_opts);

  // judge-select
  CommonOpts js_opts;
  auto* judge_select = app.add_subcommand(
      "judge-select", "judge candidates and select diverse references");
  add_common(judge_select, js_opts);

  // eval
  CommonOpts ev_opts;
  auto* eval = app.add_subcommand("eval", "compute the evaluation report");
  add_common(eval, ev_opts);

  CLI11_PARSE(app, argc, argv);

  if (stats->parsed())
    return xlat::cmd_stats(stats_file, xlat::dataset_kind_from_string(stats_kind),
                           std::cout);
  if (build_comp->parsed()) {
    const xlat::Origin origin = xlat::origin_from_string(origin_name);
    const xlat::PipelineConfig cfg = load_with_overrides(bc_opts);
    if (bc_opts.dry_run) {
      print_plan(cfg, "build origin '" + origin_name + "' from " +
                          cfg.mono_src.string() + " and " +
                          cfg.mono_tgt.string());
      return xlat::kExitOk;
    }
    return xlat::cmd_build_comp(cfg, origin, std::cout);
  }
  if (gen_refs->parsed()) {
    const xlat::PipelineConfig cfg = load_with_overrides(gr_opts);
    if (gr_opts.dry_run) {
      print_plan(cfg, "request " + std::to_string(cfg.n_candidates) +
                          " candidates per example from " + cfg.endpoint);
      return xlat::kExitOk;
    }
    return xlat::cmd_gen_refs(cfg, std::cout);
  }
  if (make_tests->parsed()) {
    const xlat::PipelineConfig cfg = load_with_overrides(mt_opts);
    if (mt_opts.dry_run) {
      print_plan(cfg, "build test suites for " + cfg.parallel.string());
      return xlat::kExitOk;
    }
    return xlat::cmd_make_tests(cfg, std::cout);
  }
  if (judge_select->parsed()) {
    const xlat::PipelineConfig cfg = load_with_overrides(js_opts);
    if (js_opts.dry_run) {
      print_plan(cfg, "judge candidates and augment " + cfg.parallel.string());
      return xlat::kExitOk;
    }
    return xlat::cmd_judge_select(cfg, std::cout);
  }
  if (eval->parsed()) {
    const xlat::PipelineConfig cfg = load_with_overrides(ev_opts);
    if (ev_opts.dry_run) {
      print_plan(cfg, "evaluate candidates against " + cfg.parallel.string());
      return xlat::kExitOk;
    }
    return xlat::cmd_eval(cfg, std::cout);
  }
  return xlat::kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const xlat::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return xlat::kExitValidation;
  } catch (const xlat::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return xlat::kExitValidation;
  } catch (const xlat::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return xlat::kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return xlat::kExitRuntime;
  }
}
