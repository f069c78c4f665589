// Command-line entry point: rspline run <config> [--out DIR]
#include "rspline/config.hpp"
#include "rspline/errors.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

namespace {

void print_summary(const rspline::ExperimentResult& result) {
    for (const auto& rep : result.reports) {
        std::cout << rspline::to_string(rep.method) << " " << rep.curve << " (" << rep.manifold
                  << ")\n";
        for (const auto& row : rep.rows) {
            std::cout << "  h=1/" << std::lround(1.0 / row.h) << "  ";
            if (!row.ok) {
                std::cout << "FAILED: " << row.failure << "\n";
                continue;
            }
            for (std::size_t j = 0; j < rep.p_values.size(); ++j) {
                std::cout << "e_p" << rep.p_values[j] << "=" << std::scientific
                          << std::setprecision(3) << row.errors[j] << std::defaultfloat << "  ";
            }
            std::cout << "iters=" << row.stats.iterations << "\n";
        }
    }
    for (const auto& c : result.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  (" << c.value << ")\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convergence studies for Riemannian linear and cubic spline interpolation"};
    app.require_subcommand(0, 1);
    bool list_curves = false;
    app.add_flag("--list-curves", list_curves, "List built-in test curves and exit");
    app.set_version_flag("--version", std::string(rspline::kVersion));

    auto* run = app.add_subcommand("run", "Run the studies described by a config file");
    std::string config_path;
    std::string out_dir;
    run->add_option("config", config_path, "JSON experiment config (may be empty)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list_curves) {
        for (const auto& name : rspline::builtin_curve_names()) {
            std::cout << name << "  " << rspline::builtin_curve(name).manifold.id() << "\n";
        }
        return 0;
    }
    if (!run->parsed()) {
        std::cout << app.help();
        return 2;
    }

    try {
        const rspline::ExperimentConfig config = rspline::load_config(config_path);
        const rspline::ExperimentResult result = rspline::run_experiment(config);
        const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
        rspline::write_outputs(config, result, dir);
        print_summary(result);
        std::cout << "wrote " << dir << "/report.csv and " << dir << "/summary.json\n";
        return result.exit_code();
    } catch (const rspline::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
