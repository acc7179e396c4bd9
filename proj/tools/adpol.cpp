#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "adpol/cli.hpp"

namespace {

struct Args {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--scenario", args.scenario, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output CSV path, '-' for stdout (default: scenario output or stdout)");
  cmd->add_option("--seed", args.seed, "seed for random sample points (overrides the scenario)");
  cmd->add_option("--tol-scale", args.tol_scale, "multiply every tolerance by this factor")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", args.threads, "worker threads (0: one per core)");
}

adpol::RunOptions options(const CLI::App* cmd, const Args& args) {
  adpol::RunOptions opt;
  if (cmd->count("--out")) opt.out = args.out;
  if (cmd->count("--seed")) opt.seed = args.seed;
  opt.tol_scale = args.tol_scale;
  opt.threads = args.threads;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adapted polarizations on the manifold of geodesics: batch front-end"};
  app.set_version_flag("--version", std::string(adpol::kVersion));
  app.require_subcommand(1);

  Args args;
  auto* phi = app.add_subcommand("phi", "tabulate phi, Im(phi) eigenvalues and domain status");
  auto* verify = app.add_subcommand("verify", "run the verification checks; exit 1 if any fails");
  auto* sweep = app.add_subcommand("sweep", "domain map over an s-grid");
  for (auto* cmd : {phi, verify, sweep}) add_common(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? adpol::kSuccess : adpol::kConfigFailure;
  }

  try {
    if (phi->parsed()) {
      const auto opt = options(phi, args);
      const auto sc = adpol::load_scenario(args.scenario);
      adpol::emit_table(adpol::run_phi(sc, opt), adpol::output_path(sc, opt), std::cout);
      return adpol::kSuccess;
    }
    if (verify->parsed()) {
      const auto opt = options(verify, args);
      const auto sc = adpol::load_scenario(args.scenario);
      const auto res = adpol::run_verify(sc, opt);
      adpol::emit_table(res.table, adpol::output_path(sc, opt), std::cout);
      std::cerr << res.table.comments.back() << "\n";
      return res.exit_code();
    }
    const auto opt = options(sweep, args);
    const auto sc = adpol::load_scenario(args.scenario);
    adpol::emit_table(adpol::run_sweep(sc, opt), adpol::output_path(sc, opt), std::cout);
    return adpol::kSuccess;
  } catch (const adpol::ConfigError& e) {
    std::cerr << "adpol: " << e.what() << "\n";
    return adpol::kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "adpol: " << e.what() << "\n";
    return adpol::kConfigFailure;
  }
}
