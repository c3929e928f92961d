/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qgda/cli/commands.h"

int main(int argc, char** argv) {
  CLI::App app{"qgda: two-layer QG twin experiments with 3DVar, EnKF and UNetKF"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, manifest, out = ".";
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<std::string> sets;
  };
  Flags f;
  const char* help[] = {"simulate the nature run (truth.qgtr)",
                        "sample observations from the truth (obs.qgob)",
                        "cycle a DA method, write metrics.csv and optional training samples",
                        "build a patch dataset from stored forecast ensembles (dataset.qgpd)",
                        "train the covariance U-Net (unet.unwt, loss_history.csv)",
                        "covariance skill ratio maps against a reference dataset",
                        "summary table with significance flags over run directories"};
  std::vector<CLI::App*> subs;
  int k = 0;
  for (const char* name : qgda::cli::kCommands) {
    auto* sub = app.add_subcommand(name, help[k++]);
    sub->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--manifest", f.manifest, "rerun with the configuration recorded in a manifest")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "root seed (overrides experiment.seed)");
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--set", f.sets, "override: section.key=value (repeatable)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  qgda::cli::Invocation inv;
  for (auto* sub : subs) {
    if (!sub->parsed()) continue;
    inv.command = sub->get_name();
    if (!f.config.empty()) inv.config = f.config;
    if (!f.manifest.empty()) inv.manifest = f.manifest;
    if (sub->count("--seed")) inv.seed = f.seed;
    if (sub->count("--threads")) inv.threads = f.threads;
  }
  inv.out = f.out;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "qgda: --set expects section.key=value, got '" << s << "'\n";
      return 1;
    }
    inv.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return qgda::cli::run(inv, std::cout, std::cerr);
}
