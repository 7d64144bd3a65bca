#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qtele/cli/cli.hpp"

namespace {

struct ParameterFlags {
  std::map<std::string, std::string> values;

  void add_to(CLI::App* app) {
    static const std::pair<const char*, const char*> flags[] = {
        {"alpha2", "--alpha2"}, {"mu", "--mu"},   {"zeta", "--zeta"},   {"eta_i", "--eta-i"},      {"eta_s", "--eta-s"},
        {"phi", "--phi"},       {"basis", "--basis"}, {"epsilon", "--epsilon"}, {"theta_in", "--theta-in"}};
    for (const auto& [key, flag] : flags) {
      app->add_option_function<std::string>(
          flag, [this, k = std::string(key)](const std::string& v) { values[k] = v; }, "override " + std::string(key));
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-state models of HOM interference and time-bin teleportation"};
  app.set_version_flag("--version", qtele::cli::kVersion);
  app.require_subcommand(1);

  qtele::cli::Invocation inv;
  ParameterFlags params;
  std::string config, out, dataset;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key=value parameter file");
    sub->add_option("--seed", inv.seed, "random seed");
    sub->add_option("--out", out, "output CSV path (a manifest is written next to it)");
    params.add_to(sub);
  };

  auto* sweep = app.add_subcommand("sweep", "one quantity along one parameter axis");
  common(sweep);
  sweep->add_option_function<std::string>("--quantity", [&](const std::string& v) { inv.quantity = v; }, "v2|v3|fx|fz|p2|p3")
      ->required();
  sweep->add_option("--axis", inv.axes, "name:log|lin:min:max:count")->required();

  auto* heatmap = app.add_subcommand("heatmap", "V2 or V3 over an alpha2 x mu grid");
  common(heatmap);
  heatmap->add_option_function<std::string>("--quantity", [&](const std::string& v) { inv.quantity = v; }, "v2|v3");
  heatmap->add_option("--axis", inv.axes, "alpha2:... and/or mu:... (default log 1e-5..1e-2, 50 points)");

  auto* fit = app.add_subcommand("fit", "fit model parameters to a dataset CSV");
  common(fit);
  fit->add_option("dataset", dataset, "CSV with header alpha2,y,sigma,kind")->required();
  fit->add_option("--mode", inv.mode, "two_fold|joint");
  fit->add_flag("!--no-floor", inv.floor_sigma, "do not floor sigma at sqrt(y)");

  auto* optimal = app.add_subcommand("optimal-alpha", "alpha2 maximizing V2 or V3");
  common(optimal);
  optimal->add_option_function<std::string>("--quantity", [&](const std::string& v) { inv.quantity = v; }, "v2|v3");

  auto* oracle = app.add_subcommand("oracle-check", "compare the Gaussian pipeline with the Fock-space oracle");
  common(oracle);
  oracle->add_option_function<int>("--cutoff", [&](int v) { inv.cutoff = v; }, "per-source photon cutoff (default: automatic)");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset from the model");
  common(synth);
  synth->add_option_function<std::string>("--quantity", [&](const std::string& v) { inv.quantity = v; },
                                           "comma list of two_fold, three_fold, fidelity_x");
  synth->add_option("--axis", inv.axes, "alpha2:log:min:max:count");
  synth->add_option("--noise", inv.noise, "relative Gaussian noise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qtele::cli::kUsage;
  }

  inv.command = app.get_subcommands().front()->get_name();
  inv.overrides = params.values;
  if (!config.empty()) inv.config = config;
  if (!out.empty()) inv.out = out;
  if (!dataset.empty()) inv.dataset = dataset;
  return qtele::cli::run(inv, std::cout, std::cerr);
}
