#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "footcast/config.hpp"
#include "footcast/errors.hpp"
#include "footcast/harness.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> formulation;
  std::optional<int> threads;
};

footcast::ExperimentConfig load(const Options& o) {
  auto cfg = o.config.empty() ? footcast::ExperimentConfig{} : footcast::load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.seed) cfg.seeds = {*o.seed};
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"footcast: foothold prediction with epistemic uncertainty for terrain-aware planning"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment INI file (defaults built in when omitted)");
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    sub->add_option("--seed", o.seed, "run only this seed");
    sub->add_option("--threads", o.threads, "worker threads");
  };

  auto* collect = app.add_subcommand("collect", "roll out the gait oracle and write ID / OOD datasets");
  auto* train = app.add_subcommand("train", "train the full and terrain-only ensembles");
  auto* eval_ood = app.add_subcommand("eval-ood", "ID/OOD segmentation and region foothold errors");
  auto* eval_corr = app.add_subcommand("eval-corr", "uncertainty vs foothold error on OOD rollouts");
  auto* plan = app.add_subcommand("plan", "MPPI episodes per costmap formulation (first seed unless --seed)");
  auto* report = app.add_subcommand("report", "render SVG figures and a markdown index");
  for (auto* sub : {collect, train, eval_ood, eval_corr, plan}) add_common(sub);
  plan->add_option("--formulation", o.formulation, "obstacle | roughness | uncertainty")
      ->check(CLI::IsMember({"obstacle", "roughness", "uncertainty"}));
  report->add_option("--out", o.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  using namespace footcast;
  try {
    if (*report) {
      harness::cmd_report(o.out);
      return 0;
    }
    const auto cfg = load(o);
    if (*plan) {
      const std::optional<Formulation> only =
          o.formulation ? std::optional(parse_formulation(*o.formulation)) : std::nullopt;
      const auto outcome = harness::cmd_plan(cfg, cfg.seeds.front(), only);
      for (const auto& row : outcome.summary)
        std::cout << to_string(row.formulation) << ": feasibility error " << row.grand_mean_feasibility
                  << ", median progress " << row.median_progress << "\n";
      return 0;
    }
    for (auto seed : cfg.seeds) {
      if (*collect) harness::cmd_collect(cfg, seed);
      if (*train) harness::cmd_train(cfg, seed);
      if (*eval_ood) harness::cmd_eval_ood(cfg, seed);
      if (*eval_corr) {
        for (const auto& row : harness::cmd_eval_correlation(cfg, seed))
          std::cout << "seed " << seed << " " << row.model << ": rho " << row.rho << ", slope " << row.slope << "\n";
      }
    }
  } catch (const footcast::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
