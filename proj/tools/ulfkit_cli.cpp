// ulfkit: batch pipeline over CSV inputs and a JSON config.
//
//   ulfkit psd --config run.json --out results/
//   ulfkit selftest

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "commands.hpp"
#include "ulfkit/parallel.hpp"
#include "ulfkit/selftest.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ulfkit;
using namespace ulfkit::cli;

enum Exit { ok = 0, selftest_failed = 1, invalid = 2, degenerate = 3, numerical = 4 };

int fail(int code, const std::string& kind, const std::string& msg) {
  std::cerr << "ulfkit: " << kind << ": " << msg << '\n';
  return code;
}

int run_selftest_command(std::uint64_t seed) {
  const auto checks = run_selftest(seed == 0 ? 1 : seed);
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  std::vector<std::string> failed;
  std::printf("%-*s  %-6s  %s\n", static_cast<int>(width), "check", "result", "detail");
  for (const auto& c : checks) {
    std::printf("%-*s  %-6s  %s\n", static_cast<int>(width), c.name.c_str(), c.pass ? "PASS" : "FAIL",
                c.detail.c_str());
    if (!c.pass) failed.push_back(c.name);
  }
  if (failed.empty()) {
    std::printf("all %zu checks passed\n", checks.size());
    return ok;
  }
  std::printf("FAILED:");
  for (const auto& f : failed) std::printf(" %s", f.c_str());
  std::printf("\n");
  return selftest_failed;
}

void write_outputs(const fs::path& dir, const Outputs& outputs) {
  fs::create_directories(dir);
  for (const auto& [name, content] : outputs.files) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + (dir / name).string() + "'");
    f << content;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ulfkit: ultra-low-frequency multichannel spectral analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool verbose = false;

  const std::map<std::string, std::function<Outputs(const RunContext&)>> commands = {
      {"psd", cmd_psd},           {"coherence", cmd_coherence}, {"features", cmd_features},
      {"minimize", cmd_minimize}, {"classify", cmd_classify},   {"fit", cmd_fit},
      {"harmonics", cmd_harmonics}};
  const std::map<std::string, std::string> help = {
      {"psd", "power spectral densities of every input channel"},
      {"coherence", "ordinary, partial and multiple coherence"},
      {"features", "statistical and band descriptions per realization"},
      {"minimize", "description minimization and the separating model"},
      {"classify", "label descriptions with a separating model"},
      {"fit", "MNK / MVVKP model fits with residual spectra"},
      {"harmonics", "event-series spectrum, null threshold and harmonic series"}};

  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON pipeline config")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config 'out')");
    sub->add_option("--seed", seed, "random seed (overrides config 'seed')");
    sub->add_option("--threads", threads, "worker threads (default: ULFKIT_THREADS or 1)")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "progress on stderr");
  }
  auto* st = app.add_subcommand("selftest", "fast invariant suite");
  st->add_option("--seed", seed, "random seed");
  st->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  st->add_flag("--verbose", verbose, "progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : invalid;
  }

  if (threads) set_thread_count(*threads);
  if (st->parsed()) return run_selftest_command(seed.value_or(1));

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    RunContext ctx;
    ctx.command = name;
    ctx.verbose = verbose;
    ctx.config = load_config(config_path);
    ctx.seed = seed.value_or(ctx.config.seed);
    fs::path dir = !out_dir.empty() ? fs::path(out_dir) : ctx.config.out.value_or(fs::path("ulfkit_out"));
    const auto outputs = commands.at(name)(ctx);
    write_outputs(dir, outputs);
    if (verbose) std::cerr << "[" << name << "] wrote " << outputs.files.size() << " files to " << dir << '\n';
    return ok;
  } catch (const ConfigError& e) {
    return fail(invalid, "config error", e.what());
  } catch (const FormatError& e) {
    return fail(invalid, "format error", e.what());
  } catch (const InvalidArgument& e) {
    return fail(invalid, "invalid argument", e.what());
  } catch (const DegenerateInput& e) {
    return fail(degenerate, "degenerate input", e.what());
  } catch (const NumericalError& e) {
    return fail(numerical, "numerical failure", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(invalid, "filesystem", e.what());
  }
}
