// jscc: power bounds for fidelity-quality profiles in the near-zero bandwidth
// regime. Subcommands: bounds, optimize, curve, simulate.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace jscc::cli;

void add_profile_flags(CLI::App& cmd, ProfileOptions& p) {
  cmd.add_option("--profile", p.profile, "order1 | order2 | table:PATH (CSV with header q,f)");
  cmd.add_option("--alpha", p.alpha, "Profile parameter");
  cmd.add_option("--alpha-min", p.alpha_min, "Sweep start (default 1e-2)");
  cmd.add_option("--alpha-max", p.alpha_max, "Sweep end (default 1e4)");
  cmd.add_option("--alpha-points", p.alpha_points, "Sweep size, log-spaced (default 50)");
}

void add_grid_flags(CLI::App& cmd, GridOptions& g) {
  cmd.add_option("--q-min", g.q_min, "Smallest quality on the grid")->capture_default_str();
  cmd.add_option("--q-max", g.q_max, "Largest quality on the grid")->capture_default_str();
  cmd.add_option("--q-points", g.q_points, "Grid size, log-spaced")->capture_default_str();
}

int emit(const CommandOutput& out, const std::string& path) {
  if (path.empty()) {
    std::cout << out.body;
    return out.exit_code;
  }
  auto manifest = out.manifest;
  manifest["outputs"] = {path};
  std::ofstream body(path, std::ios::binary);
  std::ofstream side(path + ".manifest.json", std::ios::binary);
  if (!body || !side) {
    std::cerr << "error: cannot write " << path << '\n';
    return kExitUsage;
  }
  body << out.body;
  side << manifest.dump(2) << '\n';
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power bounds for fidelity-quality profiles of Gaussian joint source-channel coding"};
  app.require_subcommand(1);
  std::string out_path;
  std::string format;

  BoundsOptions bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Lower bound on the minimum power for a profile");
  add_profile_flags(*bounds_cmd, bounds.profile);
  add_grid_flags(*bounds_cmd, bounds.grid);

  OptimizeOptions optimize;
  auto* optimize_cmd = app.add_subcommand("optimize", "Lower and upper bounds for the order-two profile");
  add_profile_flags(*optimize_cmd, optimize.profile);
  optimize_cmd->add_option("--pa-rule", optimize.pa_rule, "closed | exact")->capture_default_str();
  optimize_cmd->add_option("--schema", optimize.schema, "figure (dB columns) | sweep (linear columns)")
      ->capture_default_str();
  optimize_cmd->add_option("--search-points", optimize.search_points, "(P1, Q1) grid points per axis")
      ->capture_default_str();
  optimize_cmd->add_option("--refinement-rounds", optimize.refinement_rounds, "Local refinement rounds")
      ->capture_default_str();

  CurveOptions curve;
  auto* curve_cmd = app.add_subcommand("curve", "Achieved fidelity versus the profile over quality");
  add_profile_flags(*curve_cmd, curve.profile);
  add_grid_flags(*curve_cmd, curve.grid);
  curve_cmd->add_option("--pa", curve.p_a, "Analog-layer power")->capture_default_str();
  curve_cmd->add_option("--p1", curve.p_1, "Digital-layer power (default 0)");
  curve_cmd->add_option("--q1", curve.q_1, "Digital-layer threshold quality (default 1)");
  curve_cmd->add_option("--layers", curve.layers, "Digital layers as P:Q, repeated, thresholds increasing");

  SimulateOptions simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo distortion of the analog layer");
  simulate_cmd->add_option("--n", simulate.n, "Source symbols per channel use")->capture_default_str();
  simulate_cmd->add_option("--power", simulate.power, "Analog power (uncoded mode)")->capture_default_str();
  simulate_cmd->add_option("--p1", simulate.p_1, "Interference variance")->capture_default_str();
  simulate_cmd->add_option("--noise", simulate.noise, "Channel noise variance")->capture_default_str();
  simulate_cmd->add_option("--trials", simulate.trials, "Monte Carlo trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", simulate.seed, "RNG seed")->capture_default_str();
  simulate_cmd->add_option("--k-matrix", simulate.k_matrix, "Encoder matrix 'a,b;c,d' (matrix mode)");
  simulate_cmd->add_flag("--check", simulate.check, "Exit 2 unless within 4 standard errors of closed form");

  for (auto* cmd : {bounds_cmd, optimize_cmd, curve_cmd, simulate_cmd}) {
    cmd->add_option("--out", out_path, "Write output to PATH (manifest to PATH.manifest.json)");
    cmd->add_option("--format", format, "csv | json");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    CommandOutput out;
    if (*bounds_cmd) {
      if (!format.empty()) bounds.format = format;
      out = cmd_bounds(bounds);
    } else if (*optimize_cmd) {
      if (!format.empty()) optimize.format = format;
      out = cmd_optimize(optimize);
    } else if (*curve_cmd) {
      if (!format.empty()) curve.format = format;
      out = cmd_curve(curve);
    } else {
      if (!format.empty()) simulate.format = format;
      out = cmd_simulate(simulate);
    }
    return emit(out, out_path);
  } catch (const jscc::ConsistencyError& e) {
    std::cerr << "internal consistency error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::range_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}
