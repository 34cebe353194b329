#include <CLI11.hpp>

#include "minlor/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Minimal Lorentz surfaces in neutral four-space"};
  app.require_subcommand(1);
  minlor::cli::Options opt;
  std::string format = "csv";
  std::optional<double> threshold, fd_step;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", opt.config, "JSON job document")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--format", format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threshold", threshold, "override the command's pass threshold");
  };
  for (const char* name : {"analyze", "synthesize", "verify", "null-curve"}) {
    add_common(app.add_subcommand(name), true);
  }
  CLI::App* ex = app.add_subcommand("example", "run the reference pipeline end to end");
  add_common(ex, false);
  ex->add_option("--fd-step", fd_step, "finite-difference step for the invariant fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : minlor::cli::kInvalid;
  }
  opt.command = app.get_subcommands().front()->get_name();
  opt.format = format == "json" ? minlor::cli::Format::json : minlor::cli::Format::csv;
  opt.threshold = threshold;
  opt.fd_step = fd_step;
  return minlor::cli::run(opt);
}
