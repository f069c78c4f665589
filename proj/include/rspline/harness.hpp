#pragma once

#include "rspline/curve.hpp"
#include "rspline/manifold.hpp"
#include "rspline/solvers.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rspline {

/// Closed-form test curve on [0,1]. `accel` is the covariant acceleration
/// D_t²γ (tangential projection of the ambient second derivative).
struct TestCurve {
    std::string name;
    Manifold manifold;
    std::function<Eigen::VectorXd(double)> point;
    std::function<Eigen::VectorXd(double)> velocity;
    std::function<Eigen::VectorXd(double)> accel;
};

std::vector<std::string> builtin_curve_names();
/// Throws ConfigError for unknown names.
TestCurve builtin_curve(const std::string& name);

enum class Method { linear, cubic };
std::string to_string(Method m);
Method parse_method(const std::string& s);

struct OrderFit {
    double order = 0.0;           // least-squares slope of log e against log h
    std::vector<double> ratios;   // log2(e(h)/e(h/2)) for consecutive rows
};

/// Rows with nonpositive or non-finite error are skipped; fewer than three
/// usable rows throw ContractError.
OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& errors);

struct DiagnosticCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

struct StudyRow {
    double h = 0.0;
    std::size_t substeps = 0;
    std::vector<double> errors;   // one per p
    SolveStats stats;
    bool ok = false;
    std::string failure;
    std::vector<DiagnosticCheck> diagnostics;
    /// Euclidean backends, cubic method: largest node distance to the
    /// B-spline oracle; NaN otherwise.
    double oracle_gap = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
    Method method = Method::cubic;
    std::string manifold;
    std::string curve;
    std::vector<double> p_values;
    std::vector<StudyRow> rows;               // decreasing h
    std::vector<std::optional<OrderFit>> fits; // one per p; empty when unfittable
    bool degraded = false;

    /// Expected order 2 (linear) or 4 (cubic), accepted within ±0.4.
    double expected_order() const { return method == Method::linear ? 2.0 : 4.0; }
    /// Every p has a fitted order inside the window, or all errors are at
    /// the roundoff floor (exact reproduction).
    bool order_pass(std::size_t p_index) const;
    bool diagnostics_pass() const;
    bool passed() const;
};

struct StudyOptions {
    SolverOptions solver;
    /// Fine cells per knot interval; default_substeps(h) when absent.
    std::optional<std::size_t> substeps;
    /// Concurrent rows; 0 uses the hardware concurrency.
    unsigned threads = 0;
};

ConvergenceReport run_study(const TestCurve& curve, Method method,
                            const std::vector<double>& h_list,
                            const std::vector<double>& p_list, const StudyOptions& opts);

/// Interpolation problem for knots t_i = i/N sampled from the curve, with
/// Hermite data from its velocity.
InterpolationProblem sample_problem(const TestCurve& curve, std::size_t intervals,
                                    std::size_t substeps);

/// The analytic curve on the grid of `like`.
DiscreteCurve sample_on_grid(const TestCurve& curve, const DiscreteCurve& like);

/// Checks (a)–(f) for one solve. (d) is stored as the raw excess and
/// finalized across the ladder by run_study.
std::vector<DiagnosticCheck> diagnostics(const TestCurve& curve, Method method,
                                         const DiscreteCurve& spline,
                                         const std::vector<Eigen::VectorXd>* velocities,
                                         double h);

/// ∞-norm over the grid of the field t ↦ log_{c(t)} target(t) and of its
/// compact covariant second difference (interior nodes of each interval).
std::pair<double, double> log_field_norms(const DiscreteCurve& c, const DiscreteCurve& target);

/// Finite-difference estimate of ‖∂₁log_p q + Id‖ (operator norm on T_p,
/// central differences of step `eps` transported back to p). Qualitative
/// only: compare with ‖Rm‖·d(p,q)²/2.
double log_derivative_defect(const Manifold& m, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q, double eps = 1e-5);

struct InterpTrialStats {
    double linearity_error = 0.0;  // max nodewise |ℒ(a·u + b·w) − a·ℒu − b·ℒw|
    double stability_margin = 0.0; // max of ‖ℒv‖∞ − 2·max|v(t_k)|
};

/// Random piecewise-geodesic host curves (N = 4, 64 cells per interval, knot
/// steps below 0.8 in distance) with random knot values of norm ≤ 1.
InterpTrialStats interp_trials(const Manifold& m, std::uint64_t seed, std::size_t trials);

void write_report_csv(std::ostream& os, const std::vector<ConvergenceReport>& reports);

}  // namespace rspline
