#include <cstdio>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "dgl/dgl.hpp"
#include "config_schema.inc"

int main(int argc, char** argv) {
  CLI::App app{"Local and non-local discrete Ginzburg-Landau lattice simulator"};
  app.require_subcommand(1);

  std::string config_path;
  dgl::RunOptions opts;
  opts.threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the config file")->required();
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides config and $DGL_OUTPUT_DIR)");
  run->add_option("--threads", opts.threads, "Worker threads for grid cells")->check(CLI::Range(1u, 1024u));
  auto* seed_opt = run->add_option("--seed", seed, "Seed for randomized checks (overrides config)");

  app.add_subcommand("schema", "Print the config JSON schema");
  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dgl::kExitConfig;
  }

  if (app.got_subcommand("schema")) {
    std::fputs(dgl_config_schema, stdout);
    return 0;
  }
  if (app.got_subcommand("version")) {
    std::printf("dgl %s\n", dgl::kCodeVersion);
    return 0;
  }
  if (*out_opt) opts.out_dir = out_dir;
  if (*seed_opt) opts.seed = seed;
  return dgl::run_config(config_path, opts);
}
