// Command-line front end: curve fitting, single solves, budget sweeps and
// the two numerical self-checks.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semcrra/errors.hpp"
#include "semcrra/fitting.hpp"
#include "semcrra/kernels.hpp"
#include "semcrra/sweep.hpp"

namespace fs = std::filesystem;
using namespace semcrra;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kValidation = 3 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string csv;
  std::string plot;
  std::vector<std::string> methods;
  std::optional<double> fixed_o;
  bool large_d0 = false;
};

ScenarioConfig load(const std::string& path, const Common& c) {
  ScenarioConfig config = path.empty() ? ScenarioConfig{} : load_scenario(path);
  if (c.seed) config.seed = *c.seed;
  if (c.fixed_o) config.fcr_fixed_o = *c.fixed_o;
  if (c.large_d0) config.d0 = kLargeD0Bits;
  config.validate();
  return config;
}

std::vector<Method> methods_of(const Common& c) {
  if (c.methods.empty()) return {Method::crra, Method::fcr, Method::fra, Method::msr};
  std::vector<Method> out;
  for (const auto& m : c.methods) out.push_back(parse_method(m));
  return out;
}

fs::path output_path(const Common& c, const std::string& explicit_path, const std::string& fallback) {
  if (!explicit_path.empty()) return explicit_path;
  if (c.out_dir.empty()) return {};
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / fallback;
}

void print_rows(const SweepResult& r) {
  std::printf("%-6s %-14s %-5s %12s %12s %6s %10s\n", "param", "value", "meth", "avg_acc", "surrogate", "iters",
              "wall_ms");
  for (const auto& row : r.rows) {
    std::printf("%-6s %-14.6g %-5s %12.6f %12.6f %6d %10.1f%s\n", std::string(sweep_param_name(row.param)).c_str(),
                row.value, std::string(method_name(row.method)).c_str(), row.avg_effective_accuracy, row.surrogate,
                row.iterations, row.wall_ms, row.ok() ? (row.converged ? "" : "  (not converged)") : "  FAILED");
    if (!row.ok()) std::fprintf(stderr, "  %s\n", row.error.c_str());
  }
}

int write_outputs(const SweepResult& result, const Common& c, const std::string& stem) {
  if (const auto p = output_path(c, c.csv, stem + ".csv"); !p.empty()) {
    emit_csv(result, p);
    if (format_csv(read_csv(p)) != format_csv(result)) {
      std::fprintf(stderr, "CSV round trip mismatch for %s\n", p.c_str());
      return kValidation;
    }
    std::printf("wrote %s\n", p.c_str());
  }
  if (const auto p = output_path(c, c.plot, stem + ".svg"); !p.empty()) {
    emit_plot(result, p);
    std::printf("wrote %s\n", p.c_str());
  }
  for (const auto& row : result.rows) {
    if (!row.ok()) return kInfeasible;
  }
  return kOk;
}

int cmd_fit(const std::string& path, bool multi_start) {
  const auto samples = read_samples(path);
  FitConfig config;
  config.multi_start = multi_start;
  const auto report = fit_accuracy_model(samples, default_fit_init(samples), config);
  const auto& b = report.model.beta();
  std::printf("beta = %.17g, %.17g, %.17g, %.17g\n", b[0], b[1], b[2], b[3]);
  std::printf("rmse = %.6g  iterations = %d  converged = %s  gradient = %.3g\n", report.rmse, report.iterations,
              report.converged ? "yes" : "no", report.gradient_norm);
  if (!report.in_unit_range) {
    std::fprintf(stderr, "fitted curve leaves [0, 1]\n");
    return kValidation;
  }
  return kOk;
}

int cmd_solve(const std::string& scenario, const Common& c, bool timing) {
  const auto config = load(scenario, c);
  SweepSpec spec;
  spec.param = SweepParam::bandwidth;
  spec.values = {config.budgets.b_max};
  spec.methods = methods_of(c);
  SweepOptions options;
  options.timing = timing;
  const auto result = run_sweep(config, spec, options);
  print_rows(result);
  for (const auto& row : result.rows) {
    if (!row.ok()) continue;
    std::printf("\n%s per-user allocation\n%4s %14s %14s %8s\n", std::string(method_name(row.method)).c_str(), "user",
                "B (Hz)", "P (W)", "o");
    for (std::size_t i = 0; i < result.users; ++i) {
      std::printf("%4zu %14.6g %14.6g %8.4f\n", i + 1, row.bandwidth[i], row.power[i], row.o[i]);
    }
  }
  return write_outputs(result, c, "solve");
}

int cmd_sweep(const std::string& scenario, const std::string& param, const Common& c, unsigned jobs, bool timing) {
  const auto config = load(scenario, c);
  auto spec = default_sweep(config, parse_sweep_param(param));
  spec.methods = methods_of(c);
  SweepOptions options;
  options.jobs = jobs;
  options.timing = timing;
  const auto result = run_sweep(config, spec, options);
  print_rows(result);
  return write_outputs(result, c, std::string("sweep_") + (spec.param == SweepParam::bandwidth ? "bandwidth" : "power"));
}

int cmd_validate(const std::string& scenario, const Common& c, double samples) {
  const auto config = load(scenario, c);
  const auto report = validate_success_probability(config, static_cast<std::uint64_t>(samples), config.seed);
  std::printf("%6s %12s %12s %12s %12s %12s %10s %5s\n", "o", "B (Hz)", "P (W)", "closed", "monte_carlo", "gap",
              "4 sigma", "ok");
  for (const auto& r : report.rows) {
    std::printf("%6.3f %12.4g %12.4g %12.6f %12.6f %12.3g %10.3g %5s\n", r.o, r.bandwidth, r.power, r.closed_form,
                r.monte_carlo, r.gap, 4.0 * r.sigma, r.pass ? "yes" : "NO");
  }
  std::printf("samples = %llu  max gap = %.3g  %s\n", static_cast<unsigned long long>(report.samples), report.max_gap,
              report.passed ? "PASS" : "FAIL");
  return report.passed ? kOk : kValidation;
}

// Brute-force comparison on the first two users with budgets scaled to match.
int cmd_oracle(const std::string& scenario, const Common& c, int resolution) {
  auto config = load(scenario, c);
  const std::size_t keep = std::min<std::size_t>(config.users, 2);
  const double scale = static_cast<double>(keep) / static_cast<double>(config.users);
  auto inst = make_instance(config);
  inst.links.erase(inst.links.begin() + static_cast<std::ptrdiff_t>(keep), inst.links.end());
  inst.models.erase(inst.models.begin() + static_cast<std::ptrdiff_t>(keep), inst.models.end());
  inst.budgets.b_max *= scale;
  inst.budgets.p_max *= scale;

  const auto crra = crra_solve(inst);
  const auto oracle = brute_force_joint(inst, resolution);
  const double gap = (oracle.objective - crra.surrogate_objective) / oracle.objective;
  const bool joint_ok = crra.surrogate_objective >= oracle.objective * (1.0 - 0.01) - oracle.cell_allowance;
  std::printf("joint (B, P, o): CRRA %.8f  grid %.8f  relative gap %.3g  cell allowance %.3g  %s\n",
              crra.surrogate_objective, oracle.objective, gap, oracle.cell_allowance, joint_ok ? "ok" : "FAIL");

  std::vector<double> alphas;
  for (std::size_t i = 0; i < keep; ++i) alphas.push_back(inst.models[i](crra.o[i]));
  const ResourceProblem problem{inst.links, crra.o, alphas, inst.budgets};
  const auto sca = solve_resource_allocation(problem);
  const auto grid = brute_force_allocation(problem, resolution);
  const double rel = (grid.objective - sca.allocation.objective) / grid.objective;
  const bool sca_ok = rel <= 0.01;
  std::printf("resource (B, P) at CRRA's o: SCA %.8f  grid %.8f  relative gap %.3g  %s\n",
              sca.allocation.objective, grid.objective, rel, sca_ok ? "ok" : "FAIL");
  return joint_ok && sca_ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint compression-ratio and resource allocation for semantic communication"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "semcrra 1.0");

  Common common;
  std::string isa;
  app.add_option("--isa", isa, "Force the kernel variant (scalar or avx2)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Override the scenario seed");
    sub->add_option("--out-dir", common.out_dir, "Directory for CSV and SVG outputs");
    sub->add_option("--csv", common.csv, "CSV output path");
    sub->add_option("--plot", common.plot, "SVG output path");
    sub->add_option("--method", common.methods, "Schemes to run (crra, fcr, fra, msr)")->delimiter(',');
    sub->add_option("--fixed-o", common.fixed_o, "Compression ratio for FCR")->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--paper-d0", common.large_d0, "Use d0 = 24.5 MB (196 Mbit) instead of the scenario value");
  };

  std::string samples_path;
  bool multi_start = false;
  auto* fit = app.add_subcommand("fit", "Fit the accuracy curve to (o, accuracy) samples");
  fit->add_option("samples", samples_path, "Sample file")->required()->check(CLI::ExistingFile);
  fit->add_flag("--multi-start", multi_start, "Best of several perturbed starts");

  std::string scenario;
  bool no_timing = false;
  auto* solve = app.add_subcommand("solve", "Solve one scenario with each scheme");
  solve->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  solve->add_flag("--no-timing", no_timing, "Write wall_ms = 0 for byte-stable output");
  add_common(solve);

  std::string param = "bandwidth";
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Sweep the bandwidth or power budget");
  sweep->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "bandwidth or power")
      ->check(CLI::IsMember({"bandwidth", "power", "b_max", "p_max"}));
  sweep->add_option("--jobs", jobs, "Concurrent sweep points")->check(CLI::Range(1u, 256u));
  sweep->add_flag("--no-timing", no_timing, "Write wall_ms = 0 for byte-stable output");
  add_common(sweep);

  double mc_samples = 1e5;
  auto* check = app.add_subcommand("validate-lemma1", "Closed-form success probability against Monte Carlo");
  check->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  check->add_option("--samples", mc_samples, "Monte-Carlo draws per row")->check(CLI::Range(1e4, 1e9));
  add_common(check);

  int resolution = 100;
  auto* oracle = app.add_subcommand("oracle", "Brute-force comparison on a two-user slice");
  oracle->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--resolution", resolution, "Grid steps per budget axis")->check(CLI::Range(4, 2000));
  add_common(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (!isa.empty()) {
      if (isa == "scalar") kernels::set_isa_override(kernels::Isa::scalar);
      else if (isa == "avx2") kernels::set_isa_override(kernels::Isa::avx2);
      else throw DomainError("unknown --isa '" + isa + "'");
    }
    if (*fit) return cmd_fit(samples_path, multi_start);
    if (*solve) return cmd_solve(scenario, common, !no_timing);
    if (*sweep) return cmd_sweep(scenario, param, common, jobs, !no_timing);
    if (*check) return cmd_validate(scenario, common, mc_samples);
    if (*oracle) return cmd_oracle(scenario, common, resolution);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
