#include <iostream>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "stokesdtn/driver.hpp"

using namespace stokesdtn;

int main(int argc, char** argv) {
  CLI::App app{
      "stokesdtn: boundary symbol engine for the transformed Stokes system.\n"
      "Computes the full boundary symbol of the associated first-order\n"
      "factorization and reconstructs the boundary jets of the metric from it."};
  app.require_subcommand(1);

  CommandOptions opts;
  int jobs = 0;
  std::string out_dir, dump_path;
  uint64_t seed = 0;
  bool have_seed = false;
  int depth = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "scenario config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) { have_seed = true; });
    cmd->add_option("--depth", depth, "depth override");
    cmd->add_option("--jobs", jobs, "worker threads (0 = runtime default)");
    cmd->add_option("--mutate", opts.mutate, "fault injection, e.g. C0:1,2 (test only)");
    cmd->add_flag("--quiet", opts.quiet, "suppress status lines");
  };

  auto* fwd = app.add_subcommand("forward", "compute boundary symbols and write the dump");
  add_common(fwd);
  auto* rec = app.add_subcommand("recover", "reconstruct boundary metric jets from a dump");
  add_common(rec);
  rec->add_option("--dump", dump_path, "symbol dump path (default <out>/symbols.json)");
  auto* rt = app.add_subcommand("roundtrip", "forward + recover + ground-truth comparison");
  add_common(rt);
  auto* ver = app.add_subcommand("verify", "run the identity, homogeneity and residual suites");
  add_common(ver);

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#endif
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (!dump_path.empty()) opts.dump_path = dump_path;
  if (have_seed) opts.seed = seed;
  if (depth >= 0) opts.depth = depth;

  try {
    if (fwd->parsed()) return cmd_forward(opts);
    if (rec->parsed()) return cmd_recover(opts);
    if (rt->parsed()) return cmd_roundtrip(opts);
    if (ver->parsed()) return cmd_verify(opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
