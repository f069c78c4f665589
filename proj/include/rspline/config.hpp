#pragma once

#include "rspline/harness.hpp"
#include "rspline/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rspline {

inline constexpr const char* kVersion = "0.1.0";

/// Experiment description. Every field has a default, so an empty file is a
/// valid configuration. JSON keys:
///   manifold, curve, methods, h_ladder, p_list ("inf" allowed),
///   solver {grad_tol, max_iters, substeps, newton_switch},
///   output_dir, seed, threads, property_trials
struct ExperimentConfig {
    std::optional<std::string> manifold;  // must match the curve's manifold if set
    std::string curve = "sphere-wobble";
    std::vector<Method> methods{Method::linear, Method::cubic};
    std::vector<double> h_ladder{0.25, 0.125, 0.0625, 0.03125};
    std::vector<double> p_list{2.0, kInfinity};
    SolverOptions solver;
    std::optional<std::size_t> substeps;
    std::string output_dir = "results";
    std::uint64_t seed = 20240601;
    unsigned threads = 0;
    /// Randomized checks of the interpolation operator along the cubic spline.
    std::size_t property_trials = 20;
};

/// Parses JSON text. Errors are ConfigError with a "source:line:column:"
/// prefix.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
};

struct ExperimentResult {
    std::vector<ConvergenceReport> reports;
    std::vector<CheckResult> checks;
    bool solver_failure = false;

    /// 0 all checks pass, 1 some check fails, 2 a solve failed.
    int exit_code() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes report.csv and summary.json into `dir` (created if missing).
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::filesystem::path& dir);

}  // namespace rspline
