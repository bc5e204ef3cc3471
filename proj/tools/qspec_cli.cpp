#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qspec/experiment.hpp"
#include "qspec/resources.hpp"
#include "qspec/verify.hpp"

namespace fs = std::filesystem;
using namespace qspec;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;

// Checks that only need the finished run.
std::vector<CheckResult> run_level_checks(const RunResult& r) {
  std::vector<CheckResult> out;
  const auto& d = r.manifest.derived;
  if (d.contains("max_imag_residue")) {
    const double v = d["max_imag_residue"].get<double>();
    out.push_back({"run.signal_real", v <= 1e-10, false, v, 1e-10, ""});
  }
  if (d.contains("max_particle_number_deviation")) {
    const double v = d["max_particle_number_deviation"].get<double>();
    out.push_back({"run.number_conserved", v <= 1e-10, false, v, 1e-10, ""});
  }
  if (d.contains("empty_postselection")) {
    const bool empty = d["empty_postselection"].get<bool>();
    out.push_back({"run.postselection_nonempty", !empty, false, empty ? 1.0 : 0.0, 0.0, ""});
  }
  if (r.qsf) {
    const double peak = r.qsf->all_zero ? 0.0 : r.qsf->magnitudes.maxCoeff();
    out.push_back({"run.qsf_normalized", r.qsf->all_zero || std::abs(peak - 1.0) < 1e-12, false,
                   std::abs(peak - 1.0), 1e-12, r.qsf->all_zero ? "all-zero signal" : ""});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quench spectroscopy of the Fermi-Hubbard chain"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool verify = false;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config_path, "Config file or run manifest")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--seed", seed, "Replace every seed in the config");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--verify", verify, "Run the quick invariant suite and run-level checks");

  std::string run_a, run_b;
  double omega_max = 6.0;
  auto* compare = app.add_subcommand("compare", "SSIM and RMSE between two run directories");
  compare->add_option("run_a", run_a)->required();
  compare->add_option("run_b", run_b)->required();
  compare->add_option("--omega-max", omega_max);

  bool table1 = false, csv = false;
  std::vector<int> l_values, n_values, layer_values;
  auto* resources = app.add_subcommand("resources", "Two-qubit depth and gate count");
  resources->add_flag("--table1", table1, "The four hardware configurations");
  resources->add_flag("--csv", csv, "CSV output");
  resources->add_option("--L", l_values, "System sizes")->delimiter(',');
  resources->add_option("--trotter", n_values, "Trotter step counts")->delimiter(',');
  resources->add_option("--layers", layer_values, "DGA layer counts")->delimiter(',');
  resources->add_option("--config", config_path, "Resources for a config")->check(CLI::ExistingFile);

  bool quick = false;
  std::uint64_t verify_seed = 7;
  auto* verify_cmd = app.add_subcommand("verify", "Invariant suite, one line per check");
  verify_cmd->add_flag("--quick", quick, "Smaller sweeps");
  verify_cmd->add_option("--seed", verify_seed);
  verify_cmd->add_option("--threads", threads)->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "Exact-diagonalization checks for a config (L <= 8)");
  oracle->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  oracle->add_option("--out", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      ExperimentConfig config = load_config(config_path);
      if (!out_dir.empty()) config.output = out_dir;
      if (seed) override_seed(config, *seed);
      const RunResult result = run_experiment(config, {threads, true});
      std::cout << fmt::format("wrote {} (config {})\n", config.output, result.manifest.config_hash);
      for (const auto& c : result.comparisons)
        std::cout << fmt::format("  vs {}: SSIM(qsf)={:.4f} RMSE(qsf)={:.4f} SSIM(t)={:.4f} RMSE(t)={:.4f}\n",
                                 c.reference, c.ssim_qsf, c.rmse_qsf, c.ssim_time, c.rmse_time);
      if (verify) {
        auto checks = run_level_checks(result);
        VerifyOptions vo;
        vo.quick = true;
        vo.threads = threads;
        for (auto& c : run_invariant_suite(vo)) checks.push_back(std::move(c));
        print_results(std::cout, checks);
        if (unexpected_failures(checks) > 0) return kExitVerify;
      }
      return 0;
    }
    if (*compare) {
      const Comparison c = compare_runs(run_a, run_b, omega_max);
      std::cout << to_json(c).dump(2) << "\n";
      return 0;
    }
    if (*resources) {
      std::vector<TableRow> rows;
      if (!config_path.empty()) {
        const ExperimentConfig c = load_config(config_path);
        rows.push_back({c.model.L, c.dynamics.trotter.n_trotter, c.prep.n_layers, c.model.Ne, c.dynamics.T});
      } else if (table1 || l_values.empty()) {
        rows = hardware_rows();
      } else {
        if (n_values.empty()) n_values = {5};
        if (layer_values.empty()) layer_values = {2};
        for (int L : l_values)
          for (int n : n_values)
            for (int layers : layer_values) rows.push_back({L, n, layers, 2 * (L / 3), 3.0});
      }
      write_resource_table(std::cout, rows, csv);
      return 0;
    }
    if (*verify_cmd) {
      VerifyOptions vo;
      vo.quick = quick;
      vo.seed = verify_seed;
      vo.threads = threads;
      const auto checks = run_invariant_suite(vo);
      print_results(std::cout, checks);
      const int bad = unexpected_failures(checks);
      std::cout << fmt::format("{} checks, {} unexpected failures\n", checks.size(), bad);
      return bad > 0 ? kExitVerify : 0;
    }
    if (*oracle) {
      const ExperimentConfig config = load_config(config_path);
      const fs::path dir = out_dir.empty() ? fs::path(config.output) / "oracle" : fs::path(out_dir);
      const OracleReport rep = run_oracle(config, dir);
      std::cout << fmt::format(
          "E0={:.10f} gap={:.6f}{} spin_reflection={} quench_error(linearized)={:.3e} quench_error(unitary)={:.3e}\n",
          rep.ground_energy, rep.gap, rep.degenerate ? " (degenerate)" : "", rep.spin_reflection_symmetric,
          rep.quench_identity_error_ideal, rep.quench_identity_error_unitary);
      return rep.passed ? 0 : kExitVerify;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
