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

#include "corrcache/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "corrcache/version.hpp"
#include "json.hpp"

namespace corrcache {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(Errc::ConfigInvalid, field + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) invalid(ctx + "." + key, "missing required field");
  return *it;
}

double as_double(const json& j, const std::string& field) {
  if (!j.is_number()) invalid(field, "expected a number");
  return j.get<double>();
}

std::int64_t as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) invalid(field, "expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) invalid(field, "expected a string");
  return j.get<std::string>();
}

SojournLaw parse_sojourn(const json& j, const std::string& ctx) {
  const std::string kind = as_string(require(j, "kind", ctx), ctx + ".kind");
  if (kind == "exponential") {
    return ExponentialSojourn{as_double(require(j, "mean", ctx), ctx + ".mean")};
  }
  if (kind == "deterministic") {
    return DeterministicSojourn{
        as_double(require(j, "value", ctx), ctx + ".value")};
  }
  if (kind == "pareto") {
    return ParetoSojourn{as_double(require(j, "shape", ctx), ctx + ".shape"),
                         as_double(require(j, "scale", ctx), ctx + ".scale")};
  }
  invalid(ctx + ".kind", "unknown sojourn kind '" + kind + "'");
}

PopularityLaw parse_popularity(const json& j, const std::string& ctx) {
  const std::string kind = as_string(require(j, "kind", ctx), ctx + ".kind");
  if (kind == "zipf") {
    return ZipfLaw{as_double(require(j, "alpha", ctx), ctx + ".alpha"),
                   static_cast<std::int32_t>(
                       as_int(require(j, "universe", ctx), ctx + ".universe"))};
  }
  if (kind == "explicit") {
    const json& w = require(j, "weights", ctx);
    if (!w.is_array()) invalid(ctx + ".weights", "expected an array");
    ExplicitLaw law;
    for (const auto& v : w) {
      law.weights.push_back(as_double(v, ctx + ".weights[]"));
    }
    return law;
  }
  if (kind == "permuted_zipf") {
    PermutedZipfLaw law;
    law.alpha = as_double(require(j, "alpha", ctx), ctx + ".alpha");
    law.universe = static_cast<std::int32_t>(
        as_int(require(j, "universe", ctx), ctx + ".universe"));
    const json& p = require(j, "permutation", ctx);
    if (!p.is_array()) invalid(ctx + ".permutation", "expected an array");
    for (const auto& v : p) {
      law.permutation.push_back(static_cast<std::int32_t>(
          as_int(v, ctx + ".permutation[]")));
    }
    return law;
  }
  invalid(ctx + ".kind", "unknown popularity kind '" + kind + "'");
}

StopRule parse_stop(const json& j) {
  const std::string kind = as_string(require(j, "kind", "stop"), "stop.kind");
  if (kind == "max_requests") {
    const auto n = as_int(require(j, "count", "stop"), "stop.count");
    if (n < 1) invalid("stop.count", "must be >= 1");
    return StopRule::max_requests(static_cast<std::uint64_t>(n));
  }
  if (kind == "max_time") {
    const double t = as_double(require(j, "time", "stop"), "stop.time");
    if (!(t > 0.0)) invalid("stop.time", "must be > 0");
    return StopRule::max_time(t);
  }
  if (kind == "max_cycles") {
    const auto k = as_int(require(j, "count", "stop"), "stop.count");
    if (k < 1) invalid("stop.count", "must be >= 1");
    return StopRule::max_cycles(static_cast<std::uint64_t>(k));
  }
  invalid("stop.kind", "unknown stop kind '" + kind + "'");
}

}  // namespace

std::vector<double> CostRule::materialize(std::int32_t universe) const {
  std::vector<double> f;
  if (kind == Kind::Explicit) {
    f = values;
    if (static_cast<std::int32_t>(f.size()) != universe) {
      invalid("costs.values", "length must equal universe_size");
    }
  } else {
    f.resize(static_cast<std::size_t>(universe));
    for (std::int32_t i = 0; i < universe; ++i) {
      f[static_cast<std::size_t>(i)] =
          scale * std::pow(static_cast<double>(i + 1), -exponent);
    }
  }
  for (double v : f) {
    if (!(v > 0.0) || v > bound) {
      invalid("costs", "cost values must lie in (0, bound]");
    }
  }
  return f;
}

std::vector<double> SizeRule::materialize(std::int32_t universe) const {
  if (kind == Kind::Explicit) {
    if (static_cast<std::int32_t>(values.size()) != universe) {
      invalid("sizes.values", "length must equal universe_size");
    }
    for (double s : values) {
      if (!(s > 0.0)) invalid("sizes.values", "sizes must be positive");
    }
    return values;
  }
  if (values.empty() || values.size() != weights.size()) {
    invalid("sizes", "finite_set needs matching values and weights");
  }
  for (double s : values) {
    if (!(s > 0.0)) invalid("sizes.values", "sizes must be positive");
  }
  const AliasTable table{std::span<const double>(weights)};
  SplitMix64 rng = named_stream(seed_tag, "sizes");
  std::vector<double> out(static_cast<std::size_t>(universe));
  for (auto& s : out) {
    s = values[static_cast<std::size_t>(table.sample(rng))];
  }
  return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigParse, e.what());
  }
  if (!j.is_object()) {
    throw Error(Errc::ConfigParse, "top level must be an object");
  }

  ExperimentConfig config;
  try {
    if (j.contains("id")) config.id = as_string(j["id"], "id");

    const json& s = require(j, "spec", "config");
    config.spec.num_states = static_cast<std::int32_t>(
        as_int(require(s, "num_states", "spec"), "spec.num_states"));
    config.spec.universe_size = static_cast<std::int32_t>(
        as_int(require(s, "universe_size", "spec"), "spec.universe_size"));
    const json& t = require(s, "transition", "spec");
    if (!t.is_array()) invalid("spec.transition", "expected an array of rows");
    for (const auto& row : t) {
      if (!row.is_array()) invalid("spec.transition", "expected rows");
      std::vector<double> r;
      for (const auto& v : row) r.push_back(as_double(v, "spec.transition[]"));
      config.spec.transition.push_back(std::move(r));
    }
    const json& so = require(s, "sojourn", "spec");
    if (!so.is_array()) invalid("spec.sojourn", "expected an array");
    for (std::size_t i = 0; i < so.size(); ++i) {
      config.spec.sojourn.push_back(
          parse_sojourn(so[i], "spec.sojourn[" + std::to_string(i) + "]"));
    }
    const json& po = require(s, "popularity", "spec");
    if (!po.is_array()) invalid("spec.popularity", "expected an array");
    for (std::size_t i = 0; i < po.size(); ++i) {
      config.spec.popularity.push_back(parse_popularity(
          po[i], "spec.popularity[" + std::to_string(i) + "]"));
    }

    const json& pol = require(j, "policies", "config");
    if (!pol.is_array() || pol.empty()) {
      invalid("policies", "need at least one policy");
    }
    for (std::size_t i = 0; i < pol.size(); ++i) {
      const std::string ctx = "policies[" + std::to_string(i) + "]";
      PolicySpec ps;
      const std::string name =
          as_string(require(pol[i], "kind", ctx), ctx + ".kind");
      const auto kind = policy_from_name(name);
      if (!kind) invalid(ctx + ".kind", "unknown policy '" + name + "'");
      ps.kind = *kind;
      if (pol[i].contains("set")) {
        std::vector<DocId> set;
        for (const auto& v : pol[i]["set"]) {
          set.push_back(static_cast<DocId>(as_int(v, ctx + ".set[]")));
        }
        ps.given_set = std::move(set);
      }
      config.policies.push_back(std::move(ps));
    }

    const json& sizes_j = require(j, "cache_sizes", "config");
    if (!sizes_j.is_array() || sizes_j.empty()) {
      invalid("cache_sizes", "need at least one cache size");
    }
    for (const auto& v : sizes_j) {
      const auto x = as_int(v, "cache_sizes[]");
      if (x < 0) invalid("cache_sizes[]", "must be >= 0");
      config.cache_sizes.push_back(x);
    }

    config.stop = parse_stop(require(j, "stop", "config"));

    const json& seeds_j = require(j, "seeds", "config");
    if (!seeds_j.is_array() || seeds_j.empty()) {
      invalid("seeds", "need at least one seed");
    }
    for (const auto& v : seeds_j) {
      config.seeds.push_back(
          static_cast<std::uint64_t>(as_int(v, "seeds[]")));
    }

    if (j.contains("warmup_fraction")) {
      config.warmup_fraction = as_double(j["warmup_fraction"],
                                         "warmup_fraction");
      if (config.warmup_fraction < 0.0 || config.warmup_fraction > 0.5) {
        invalid("warmup_fraction", "must lie in [0, 0.5]");
      }
    }
    if (j.contains("probes")) {
      for (const auto& v : j["probes"]) {
        config.probes.push_back(static_cast<DocId>(as_int(v, "probes[]")));
      }
    }
    if (j.contains("lemma1_cycles")) {
      config.lemma1_cycles = static_cast<std::uint64_t>(
          as_int(j["lemma1_cycles"], "lemma1_cycles"));
    }
    if (j.contains("request_cap")) {
      config.request_cap = static_cast<std::uint64_t>(
          as_int(j["request_cap"], "request_cap"));
    }
    if (j.contains("placement_budget")) {
      config.placement_budget = as_double(j["placement_budget"],
                                          "placement_budget");
    }

    if (j.contains("costs")) {
      const json& c = j["costs"];
      CostRule rule;
      const std::string kind =
          as_string(require(c, "kind", "costs"), "costs.kind");
      rule.bound = as_double(require(c, "bound", "costs"), "costs.bound");
      if (kind == "explicit") {
        rule.kind = CostRule::Kind::Explicit;
        for (const auto& v : require(c, "values", "costs")) {
          rule.values.push_back(as_double(v, "costs.values[]"));
        }
      } else if (kind == "power") {
        rule.kind = CostRule::Kind::Power;
        rule.scale = as_double(require(c, "scale", "costs"), "costs.scale");
        rule.exponent =
            as_double(require(c, "exponent", "costs"), "costs.exponent");
      } else {
        invalid("costs.kind", "unknown cost rule '" + kind + "'");
      }
      config.costs = std::move(rule);
    }

    if (j.contains("sizes")) {
      const json& c = j["sizes"];
      SizeRule rule;
      const std::string kind =
          as_string(require(c, "kind", "sizes"), "sizes.kind");
      if (kind == "explicit") {
        rule.kind = SizeRule::Kind::Explicit;
        for (const auto& v : require(c, "values", "sizes")) {
          rule.values.push_back(as_double(v, "sizes.values[]"));
        }
      } else if (kind == "finite_set") {
        rule.kind = SizeRule::Kind::FiniteSet;
        for (const auto& v : require(c, "values", "sizes")) {
          rule.values.push_back(as_double(v, "sizes.values[]"));
        }
        for (const auto& v : require(c, "weights", "sizes")) {
          rule.weights.push_back(as_double(v, "sizes.weights[]"));
        }
        if (c.contains("seed_tag")) {
          rule.seed_tag = static_cast<std::uint64_t>(
              as_int(c["seed_tag"], "sizes.seed_tag"));
        }
      } else {
        invalid("sizes.kind", "unknown size rule '" + kind + "'");
      }
      config.sizes = std::move(rule);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigParse, e.what());
  }

  // cheap cross-checks that do not need a validated spec
  for (DocId p : config.probes) {
    if (p < 1 || p > config.spec.universe_size) {
      invalid("probes[]", "probe document outside 1..universe_size");
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::IoFailure, "cannot open config '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) {
    throw Error(Errc::IoFailure, "cannot read config '" + path + "'");
  }
  return parse_config_text(text.str());
}

std::string spec_hash_hex(const ValidatedSpec& spec) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(spec.hash()));
  return buf;
}

namespace {

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::IoFailure, "cannot open '" + path.string() + "'");
  }
  out << content;
  out.flush();
  if (!out.good()) {
    throw Error(Errc::IoFailure, "cannot write '" + path.string() + "'");
  }
}

fs::path prepare_out_dir(const RunSettings& settings) {
  std::error_code ec;
  fs::create_directories(settings.out_dir, ec);
  if (ec) {
    throw Error(Errc::IoFailure,
                "cannot create output directory '" + settings.out_dir + "'");
  }
  return settings.out_dir;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& config,
                    const ValidatedSpec& spec, const RunSettings& settings,
                    const std::string& command) {
  json m;
  m["tool"] = "corrcache";
  m["version"] = kVersion;
  m["rng_algorithm"] = kRngAlgorithmId;
  m["command"] = command;
  m["experiment"] = config.id;
  m["spec_hash"] = spec_hash_hex(spec);
  m["config_path"] = settings.config_path;
  m["generated_at"] = timestamp_utc();  // the only nondeterministic field
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<std::uint64_t> effective_seeds(const ExperimentConfig& config,
                                           const RunSettings& settings) {
  return settings.seed_override.empty() ? config.seeds
                                        : settings.seed_override;
}

void warn_small_universe(const ExperimentConfig& config, std::ostream& log) {
  const std::int64_t x_max =
      *std::max_element(config.cache_sizes.begin(), config.cache_sizes.end());
  if (static_cast<std::int64_t>(config.spec.universe_size) < 10 * x_max) {
    log << "warning: universe_size < 10 * max cache size; tail asymptotics "
           "will be distorted\n";
  }
}

struct CellEstimate {
  FaultEstimate fault;
  std::uint64_t cycles = 0;
};

CellEstimate estimate_cell(const ValidatedSpec& spec, const PolicySpec& policy,
                           std::int64_t x, std::uint64_t seed,
                           const ExperimentConfig& config,
                           std::span<const double> cost) {
  PolicyContext context;
  context.popularity = spec.marginal_popularity();
  context.given_set = policy.given_set;
  auto cache = make_policy(policy.kind, x, context, seed);
  RunOptions options;
  options.warmup_fraction = config.warmup_fraction;
  options.cost = cost;
  options.request_cap = config.request_cap;
  const PolicyRunReport report =
      run_policy(spec, *cache, config.stop, seed, options);
  CellEstimate cell;
  cell.cycles = report.cycle_requests.size();
  if (report.bound_violations != 0) {
    throw std::logic_error("per-cycle fault lower bound violated");
  }
  // regenerative ratio is the primary estimator; batch means cover runs
  // too short to regenerate 30 times
  if (cell.cycles >= 30) {
    cell.fault = regenerative_fault(report);
  } else {
    cell.fault = time_average_fault(report);
  }
  return cell;
}

std::string results_table(
    const ExperimentConfig& config, const ValidatedSpec& spec,
    const std::vector<std::uint64_t>& seeds,
    const std::vector<CellEstimate>& cells) {
  const std::string hash = spec_hash_hex(spec);
  std::ostringstream out;
  out << "experiment\tpolicy\tx\tpoint\tstderr\tn_cycles\tseed\tspec_hash\n";
  std::size_t idx = 0;
  for (const auto& policy : config.policies) {
    for (std::int64_t x : config.cache_sizes) {
      double sum_point = 0.0;
      double sum_var = 0.0;
      std::uint64_t sum_cycles = 0;
      for (std::uint64_t seed : seeds) {
        const CellEstimate& cell = cells[idx++];
        out << config.id << '\t' << policy_name(policy.kind) << '\t' << x
            << '\t' << fmt(cell.fault.point) << '\t'
            << fmt(cell.fault.stderr_value) << '\t' << cell.cycles << '\t'
            << seed << '\t' << hash << '\n';
        sum_point += cell.fault.point;
        sum_var += cell.fault.stderr_value * cell.fault.stderr_value;
        sum_cycles += cell.cycles;
      }
      const auto s = static_cast<double>(seeds.size());
      out << config.id << '\t' << policy_name(policy.kind) << '\t' << x
          << '\t' << fmt(sum_point / s) << '\t' << fmt(std::sqrt(sum_var) / s)
          << '\t' << sum_cycles << '\t' << "all" << '\t' << hash << '\n';
    }
  }
  return out.str();
}

}  // namespace

void run_validate(const ExperimentConfig& config, std::ostream& log) {
  const ValidatedSpec spec = validate_spec(config.spec);
  warn_small_universe(config, log);
  log << "config OK: experiment '" << config.id << "', spec hash "
      << spec_hash_hex(spec) << "\n";
  log << "states M = " << spec.num_states() << ", universe N = "
      << spec.universe_size() << "\n";
  log << "embedded stationary nu =";
  for (double v : spec.embedded_stationary()) log << ' ' << fmt(v);
  log << "\ntime stationary pi =";
  for (double v : spec.time_stationary()) log << ' ' << fmt(v);
  log << "\ntop marginal popularity:";
  const auto order = spec.popularity_order();
  const auto q = spec.marginal_popularity();
  const std::size_t top = std::min<std::size_t>(10, order.size());
  for (std::size_t k = 0; k < top; ++k) {
    log << " doc" << order[k] << '='
        << fmt(q[static_cast<std::size_t>(order[k] - 1)]);
  }
  log << "\n";
}

void run_simulate(const ExperimentConfig& config, const RunSettings& settings,
                  std::ostream& log) {
  const ValidatedSpec spec = validate_spec(config.spec);
  warn_small_universe(config, log);
  const fs::path dir = prepare_out_dir(settings);
  const auto seeds = effective_seeds(config, settings);

  struct Cell {
    std::size_t policy;
    std::int64_t x;
    std::uint64_t seed;
  };
  std::vector<Cell> grid;
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    for (std::int64_t x : config.cache_sizes) {
      for (std::uint64_t seed : seeds) grid.push_back({p, x, seed});
    }
  }

  std::vector<CellEstimate> fault_cells(grid.size());
  parallel_for(grid.size(), settings.workers, [&](std::size_t i) {
    fault_cells[i] = estimate_cell(spec, config.policies[grid[i].policy],
                                   grid[i].x, grid[i].seed, config, {});
  });
  write_file(dir / "results.tsv",
             results_table(config, spec, seeds, fault_cells));
  log << "wrote " << (dir / "results.tsv").string() << " (" << grid.size()
      << " cells)\n";

  if (config.costs) {
    const std::vector<double> f =
        config.costs->materialize(config.spec.universe_size);
    std::vector<CellEstimate> cost_cells(grid.size());
    parallel_for(grid.size(), settings.workers, [&](std::size_t i) {
      cost_cells[i] = estimate_cell(spec, config.policies[grid[i].policy],
                                    grid[i].x, grid[i].seed, config, f);
    });
    write_file(dir / "costs.tsv",
               results_table(config, spec, seeds, cost_cells));
    log << "wrote " << (dir / "costs.tsv").string() << "\n";
  }
  write_manifest(dir, config, spec, settings, "simulate");
}

void run_curve(const ExperimentConfig& config, const RunSettings& settings,
               std::ostream& log) {
  const ValidatedSpec spec = validate_spec(config.spec);
  warn_small_universe(config, log);
  const fs::path dir = prepare_out_dir(settings);
  const auto seeds = effective_seeds(config, settings);

  struct Cell {
    std::size_t policy;
    std::uint64_t seed;
  };
  std::vector<Cell> grid;
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    for (std::uint64_t seed : seeds) grid.push_back({p, seed});
  }
  std::vector<RatioCurve> curves(grid.size());
  parallel_for(grid.size(), settings.workers, [&](std::size_t i) {
    curves[i] = ratio_curve(spec, config.policies[grid[i].policy].kind,
                            config.cache_sizes, config.stop, grid[i].seed);
  });

  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::ostringstream out;
    out << "# e_gamma = " << fmt(kEulerGammaExp) << "\n";
    out << "x\tratio\tci_low\tci_high\n";
    for (const RatioPoint& p : curves[i].points) {
      out << p.x << '\t' << fmt(p.ratio) << '\t' << fmt(p.ci_low) << '\t'
          << fmt(p.ci_high) << '\n';
    }
    const std::string name =
        std::string("curve_") +
        policy_name(config.policies[grid[i].policy].kind) + "_s" +
        std::to_string(grid[i].seed) + ".tsv";
    write_file(dir / name, out.str());
    log << "wrote " << (dir / name).string() << "\n";
  }
  write_manifest(dir, config, spec, settings, "curve");
}

void run_lemma1(const ExperimentConfig& config, const RunSettings& settings,
                std::ostream& log) {
  const ValidatedSpec spec = validate_spec(config.spec);
  if (config.probes.empty()) {
    invalid("probes", "lemma1 needs at least one probe document");
  }
  const fs::path dir = prepare_out_dir(settings);
  const auto seeds = effective_seeds(config, settings);

  std::vector<std::vector<Lemma1Probe>> rows(seeds.size());
  parallel_for(seeds.size(), settings.workers, [&](std::size_t i) {
    rows[i] = lemma1_probe(spec, config.probes, config.lemma1_cycles,
                           seeds[i]);
  });

  std::ostringstream out;
  out << "seed\tdoc\thit_prob\thit_prob_stderr\tratio\tratio_stderr"
         "\tproduct_form\tidentity_z\tmean_cycle_length\n";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (const Lemma1Probe& p : rows[i]) {
      out << seeds[i] << '\t' << p.doc << '\t' << fmt(p.hit_prob) << '\t'
          << fmt(p.hit_prob_stderr) << '\t' << fmt(p.ratio) << '\t'
          << fmt(p.ratio_stderr) << '\t' << fmt(p.product_form) << '\t'
          << fmt(p.identity_z) << '\t' << fmt(p.mean_cycle_length) << '\n';
    }
  }
  write_file(dir / "lemma1.tsv", out.str());
  log << "wrote " << (dir / "lemma1.tsv").string() << "\n";
  write_manifest(dir, config, spec, settings, "lemma1");
}

void run_placement(const ExperimentConfig& config, const RunSettings& settings,
                   std::ostream& log) {
  const ValidatedSpec spec = validate_spec(config.spec);
  const fs::path dir = prepare_out_dir(settings);

  PlacementProblem base;
  base.q.assign(spec.marginal_popularity().begin(),
                spec.marginal_popularity().end());
  if (config.costs) {
    base.cost = config.costs->materialize(config.spec.universe_size);
    base.cost_bound = config.costs->bound;
  }
  if (config.sizes) {
    base.sizes = config.sizes->materialize(config.spec.universe_size);
  }

  std::vector<double> budgets;
  if (config.placement_budget) {
    budgets.push_back(*config.placement_budget);
  } else {
    for (std::int64_t x : config.cache_sizes) {
      budgets.push_back(static_cast<double>(x));
    }
  }

  const auto row = [](std::ostringstream& out, double budget,
                      const char* rule, const PlacementResult& result) {
    out << fmt(budget) << '\t' << rule << '\t'
        << fmt(result.predicted_objective) << '\t' << fmt(result.used_budget)
        << '\t';
    if (result.split_doc) {
      out << *result.split_doc;
    } else {
      out << '-';
    }
    out << '\t';
    for (std::size_t i = 0; i < result.chosen.size(); ++i) {
      if (i) out << ',';
      out << result.chosen[i];
    }
    out << '\n';
  };

  std::ostringstream out;
  out << "budget\trule\tobjective\tused_budget\tsplit_doc\tchosen\n";
  std::ostringstream bracket;
  bracket << "budget\tprefix_objective\texact_at_budget\texact_at_prefix"
             "\twithin\n";
  bool any_bracket = false;

  for (double budget : budgets) {
    PlacementProblem problem = base;
    problem.budget = budget;
    if (base.cost.empty() && base.sizes.empty()) {
      row(out, budget, "top_x", top_x(problem));
    }
    if (!base.cost.empty() && base.sizes.empty()) {
      row(out, budget, "cost_weighted_set", cost_weighted_set(problem));
    }
    if (!base.sizes.empty() && base.cost.empty()) {
      const PlacementResult prefix = size_aware_prefix(problem);
      row(out, budget, "size_aware_prefix", prefix);
      try {
        const PlacementResult at_budget = exact_knapsack(problem);
        PlacementProblem smaller = problem;
        smaller.budget = prefix.used_budget;
        const PlacementResult at_prefix = exact_knapsack(smaller);
        const bool within =
            prefix.predicted_objective >=
                at_budget.predicted_objective - 1e-12 &&
            prefix.predicted_objective <=
                at_prefix.predicted_objective + 1e-12;
        bracket << fmt(budget) << '\t' << fmt(prefix.predicted_objective)
                << '\t' << fmt(at_budget.predicted_objective) << '\t'
                << fmt(at_prefix.predicted_objective) << '\t'
                << (within ? "yes" : "no") << '\n';
        any_bracket = true;
      } catch (const Error& e) {
        if (e.code() != Errc::InstanceTooLarge) throw;
        log << "exact oracle skipped: " << e.what() << "\n";
      }
    }
    try {
      row(out, budget, "exact_knapsack", exact_knapsack(problem));
    } catch (const Error& e) {
      if (e.code() != Errc::InstanceTooLarge) throw;
      log << "exact oracle skipped: " << e.what() << "\n";
    }
  }

  write_file(dir / "placement.tsv", out.str());
  log << "wrote " << (dir / "placement.tsv").string() << "\n";
  if (any_bracket) {
    write_file(dir / "bracket.tsv", bracket.str());
    log << "wrote " << (dir / "bracket.tsv").string() << "\n";
  }
  write_manifest(dir, config, spec, settings, "placement");
}

void run_export_trace(const ExperimentConfig& config,
                      const RunSettings& settings, std::ostream& log) {
  const ValidatedSpec spec = validate_spec(config.spec);
  const fs::path dir = prepare_out_dir(settings);
  const auto seeds = effective_seeds(config, settings);
  for (std::uint64_t seed : seeds) {
    const std::string name = "trace_s" + std::to_string(seed) + ".tsv";
    std::ostringstream out;
    write_trace(out, spec, config.stop, seed);
    write_file(dir / name, out.str());
    log << "wrote " << (dir / name).string() << "\n";
  }
  write_manifest(dir, config, spec, settings, "export-trace");
}

}  // namespace corrcache
