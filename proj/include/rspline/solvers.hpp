#pragma once

#include "rspline/curve.hpp"
#include "rspline/errors.hpp"
#include "rspline/manifold.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rspline {

/// Knot data γ(t_i), i = 0..N on the uniform knot grid t_i = i/N, plus
/// Hermite end velocities for cubic interpolation.
struct InterpolationProblem {
    Manifold manifold;
    std::vector<Eigen::VectorXd> knot_points;
    std::optional<Eigen::VectorXd> v_start;
    std::optional<Eigen::VectorXd> v_end;
    std::size_t fine_substeps = 64;

    std::size_t intervals() const { return knot_points.size() - 1; }
    double h() const { return 1.0 / static_cast<double>(intervals()); }

    /// Throws DomainError/ContractError when the data are unusable.
    void validate(bool need_velocities) const;
};

/// Cells per knot interval for spacing h: max(64, ceil(4/h)).
std::size_t default_substeps(double h);

struct SolverOptions {
    /// Relative stopping tolerance: stop once ‖grad‖∞ ≤ grad_tol·(1 + ‖grad₀‖∞),
    /// or once ‖grad‖∞ reaches the estimated rounding error of the gradient.
    double grad_tol = 1e-10;
    std::size_t max_iters = 10000;
    double armijo_factor = 0.5;
    double sufficient_decrease = 1e-4;
    /// Gauss–Newton steps are used once ‖grad‖∞ falls below this value;
    /// above it the solver takes steepest-descent steps.
    double newton_switch = std::numeric_limits<double>::infinity();
    /// Optional CSV iteration log (iteration, energy, gradient norm).
    std::string log_path;
};

struct SolveStats {
    std::size_t iterations = 0;
    double final_gradient_norm = 0.0;
    double final_energy = 0.0;
    double gradient_tolerance = 0.0;
    /// ∞-norm of the Euler–Lagrange residual; NaN when the grid is too coarse.
    double el_residual_inf = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, SolveStats stats)
        : Error(what), stats_(stats) {}
    const SolveStats& stats() const { return stats_; }

private:
    SolveStats stats_;
};

/// Piecewise geodesic interpolant on the fine grid.
DiscreteCurve linear_spline(const InterpolationProblem& prob);

/// Discrete curve that also carries a velocity at every node. The cubic
/// solver works on this representation.
struct HermiteCurve {
    DiscreteCurve curve;
    std::vector<Eigen::VectorXd> velocities;
};

/// Which unknowns are held fixed: positions at knots and the two end
/// velocities for Hermite interpolation.
struct Constraints {
    std::vector<bool> fixed_point;
    std::vector<bool> fixed_velocity;

    static Constraints hermite(const DiscreteCurve& c);
};

/// Linear spline with geodesic velocities; knot nodes take the mean of the
/// two one-sided velocities and the end nodes take v_start/v_end.
HermiteCurve initial_guess(const InterpolationProblem& prob);

/// Discrete cubic energy: on every fine cell [x_a, x_b] of width δ the
/// exact ∫|ÿ|² of the cubic Hermite segment through (0, v_a) and
/// (log_{x_a}x_b, P_{b→a} v_b) in T_{x_a}:
///     |P v_b − v_a|²/δ + 3|δ(v_a + P v_b) − 2 log_{x_a}x_b|²/δ³.
double hermite_energy(const HermiteCurve& c);

/// Energy, gradient and Gauss–Newton model over the free unknowns. Local
/// coordinates at node k are (ξ_k, η_k) in an orthonormal basis B_k of T_{x_k}:
///     x_k ← exp(x_k, B_k ξ_k),   v_k ← P_{x_k → x_k'}(v_k + B_k η_k).
class HermiteObjective {
public:
    HermiteObjective(const HermiteCurve& reference, Constraints constraints);

    std::size_t num_variables() const { return num_variables_; }

    double energy(const HermiteCurve& c) const { return hermite_energy(c); }
    /// Exact gradient in local coordinates at c.
    Eigen::VectorXd gradient(const HermiteCurve& c) const;
    /// c moved by `step` in local coordinates.
    HermiteCurve retract(const HermiteCurve& c, const Eigen::VectorXd& step) const;

    struct Model {
        Eigen::VectorXd gradient;
        /// Rounding-error estimate of each gradient entry.
        Eigen::VectorXd gradient_noise;
        std::vector<Eigen::Triplet<double>> normal_matrix;  // JᵀJ (upper+lower)
        double energy = 0.0;
    };
    Model linearize(const HermiteCurve& c) const;

private:
    Manifold manifold_;
    Constraints constraints_;
    std::vector<long> point_offset_;     // -1 when fixed
    std::vector<long> velocity_offset_;  // -1 when fixed
    std::size_t num_variables_ = 0;
};

/// Minimizes hermite_energy from c0 under the given constraints.
std::pair<HermiteCurve, SolveStats> minimize_energy(const HermiteCurve& c0,
                                                    const Constraints& constraints,
                                                    const SolverOptions& opts);

struct CubicSolution {
    DiscreteCurve curve;
    VectorFieldAlongCurve velocities;
    SolveStats stats;
};

/// Riemannian cubic spline interpolation with Hermite end conditions.
/// Throws SolverError when the iteration does not converge.
CubicSolution cubic_spline(const InterpolationProblem& prob, const SolverOptions& opts);

}  // namespace rspline
