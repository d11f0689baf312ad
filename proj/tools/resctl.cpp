#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "resctl/resctl.hpp"

namespace {

enum Exit { kOk = 0, kOther = 1, kValidation = 2, kNumerical = 3 };

int run(const std::string& command, const std::string& config, const std::optional<std::string>& out,
        const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& threads) {
  const auto cfg = resctl::read_config_file(config, command, out, seed, threads);
  resctl::RunContext ctx;
  if (command == "generate") {
    ctx = resctl::run_generate(cfg);
  } else if (command == "propagate") {
    ctx = resctl::run_uncontrolled(cfg);
  } else if (command == "optimize") {
    ctx = resctl::run_optimize(cfg);
  } else if (command == "diagnose") {
    ctx = resctl::run_diagnose(cfg);
  } else {
    ctx = resctl::run_simplify(cfg);
  }
  for (const auto& w : ctx.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << command << ": wrote " << ctx.outputs.size() + 1 << " files to " << cfg.out_dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance-mediated coherent control toolkit"};
  app.set_version_flag("--version", resctl::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  for (const char* name : {"generate", "propagate", "optimize", "diagnose", "simplify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "scenario JSON")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "generator seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
  }
  app.get_subcommand("generate")->description("generate a synthetic system archive");
  app.get_subcommand("propagate")->description("propagate uncontrolled Gaussian drives");
  app.get_subcommand("optimize")->description("solve relative control and verify by propagation");
  app.get_subcommand("diagnose")->description("non-diagonality and controllability report");
  app.get_subcommand("simplify")->description("simplified fields and amplitude retention");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, config, out, seed, threads);
  } catch (const resctl::ArchiveError& e) {
    std::cerr << "archive error: " << e.what() << '\n';
    return kValidation;
  } catch (const resctl::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const resctl::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
