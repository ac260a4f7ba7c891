/*
 * Copyright 2026 The corrcache Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corrcache/experiment.hpp"
#include "corrcache/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitIo = 4;

int exit_code_for(corrcache::Errc code) {
  switch (code) {
    case corrcache::Errc::ConfigParse:
      return kExitParse;
    case corrcache::Errc::IoFailure:
      return kExitIo;
    default:
      return kExitInvalid;  // validation and model errors
  }
}

int workers_from_env() {
  if (const char* env = std::getenv("CORRCACHE_WORKERS")) {
    const int value = std::atoi(env);
    if (value >= 1) return value;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache policy simulation under semi-Markov modulated "
               "request streams"};
  app.set_version_flag("--version", corrcache::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  corrcache::RunSettings settings;
  settings.workers = workers_from_env();

  const auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    if (with_out) {
      cmd->add_option("--out", settings.out_dir, "output directory")
          ->required();
      cmd->add_option("--workers", settings.workers,
                      "parallel worker count (env CORRCACHE_WORKERS)");
      cmd->add_option("--seed-override", settings.seed_override,
                      "replace the config seed list")
          ->delimiter(',');
    }
  };

  CLI::App* validate = app.add_subcommand("validate", "check a config only");
  add_common(validate, false);
  CLI::App* simulate =
      app.add_subcommand("simulate", "fault and cost estimates");
  add_common(simulate, true);
  CLI::App* curve =
      app.add_subcommand("curve", "policy-to-optimal ratio curves");
  add_common(curve, true);
  CLI::App* lemma1 =
      app.add_subcommand("lemma1", "regenerative first-request probes");
  add_common(lemma1, true);
  CLI::App* placement =
      app.add_subcommand("placement", "static placement optimizers");
  add_common(placement, true);
  CLI::App* export_trace =
      app.add_subcommand("export-trace", "write request traces");
  add_common(export_trace, true);

  CLI11_PARSE(app, argc, argv);

  try {
    settings.config_path = config_path;
    const corrcache::ExperimentConfig config =
        corrcache::load_config(config_path);
    if (validate->parsed()) {
      corrcache::run_validate(config, std::cout);
    } else if (simulate->parsed()) {
      corrcache::run_simulate(config, settings, std::cout);
    } else if (curve->parsed()) {
      corrcache::run_curve(config, settings, std::cout);
    } else if (lemma1->parsed()) {
      corrcache::run_lemma1(config, settings, std::cout);
    } else if (placement->parsed()) {
      corrcache::run_placement(config, settings, std::cout);
    } else if (export_trace->parsed()) {
      corrcache::run_export_trace(config, settings, std::cout);
    }
    return kExitOk;
  } catch (const corrcache::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
