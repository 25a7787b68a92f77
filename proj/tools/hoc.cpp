#include <iostream>

#include <CLI11.hpp>

#include "hoc/cli.hpp"

int main(int argc, char** argv) {
  hoc::cli::RunConfig cfg;
  CLI::App app{"Higher-order concentration toolkit"};
  app.set_version_flag("--version", hoc::cli::kVersion);
  app.add_option("command", cfg.command,
                 "decompose | tensor | verify-identities | certify | smooth-certify | mc-validate | report")
      ->required();
  app.add_option("--input", cfg.input, "JSON input file");
  app.add_option("--out", cfg.output, "JSON report path (default: stdout)");
  app.add_option("--order", cfg.order, "order d (0 = lowest nonvanishing degree)");
  app.add_option("--statement", cfg.statement, "exp | tail | sup | ustat, or a certificate file for mc-validate");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--samples", cfg.samples, "Monte Carlo sample count");
  app.add_option("--budget", cfg.budget, "max function evaluations per tensor");
  app.add_option("--tolerance", cfg.tolerance, "identity residual tolerance");
  app.add_option("--kind", cfg.kind, "difference operator for tensor: h h+ h- v D d d+ d-");
  app.add_option("--t", cfg.t, "deviation level for tail reports");
  app.add_option("--sigma2", cfg.sigma2, "log-Sobolev constant");
  app.add_option("--variant", cfg.variant, "op | hs");
  app.add_option("--setting", cfg.setting, "lsi | sphere");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hoc::cli::kUsageError;
  }
  return hoc::cli::run(cfg, std::cout, std::cerr);
}
