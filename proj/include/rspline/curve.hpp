#pragma once

#include "rspline/manifold.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace rspline {

/// Sampled curve on a time grid over [0,1] that is uniform inside each knot
/// interval; knot_indices locate the interpolation knots t_i on the grid.
class DiscreteCurve {
public:
    DiscreteCurve(Manifold manifold, std::vector<double> times,
                  std::vector<Eigen::VectorXd> points,
                  std::vector<std::size_t> knot_indices);

    /// Grid of `intervals` knot intervals with `substeps` cells each; points
    /// are filled in by `sample(t)`.
    template <class Fn>
    static DiscreteCurve sampled(Manifold manifold, std::size_t intervals,
                                 std::size_t substeps, Fn&& sample);

    const Manifold& manifold() const { return manifold_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Eigen::VectorXd>& points() const { return points_; }
    const std::vector<std::size_t>& knot_indices() const { return knot_indices_; }

    std::size_t size() const { return points_.size(); }
    std::size_t intervals() const { return knot_indices_.size() - 1; }
    const Eigen::VectorXd& point(std::size_t k) const { return points_[k]; }
    ManifoldPoint point_at(std::size_t k) const { return {manifold_, points_[k]}; }

    /// Node range [first, last] of knot interval i.
    std::pair<std::size_t, std::size_t> interval(std::size_t i) const {
        return {knot_indices_[i], knot_indices_[i + 1]};
    }
    /// Grid spacing inside knot interval i.
    double spacing(std::size_t i) const;
    /// Fewest cells in any knot interval.
    std::size_t min_cells() const;

private:
    Manifold manifold_;
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> points_;
    std::vector<std::size_t> knot_indices_;
};

/// Uniform-in-interval grid: node k = i*substeps + j has time k/(N*substeps),
/// so knot i lands exactly on i/N.
std::vector<double> uniform_grid(std::size_t intervals, std::size_t substeps);
std::vector<std::size_t> uniform_knots(std::size_t intervals, std::size_t substeps);

template <class Fn>
DiscreteCurve DiscreteCurve::sampled(Manifold manifold, std::size_t intervals,
                                     std::size_t substeps, Fn&& sample) {
    auto times = uniform_grid(intervals, substeps);
    std::vector<Eigen::VectorXd> points;
    points.reserve(times.size());
    for (double t : times) points.push_back(sample(t));
    return {manifold, std::move(times), std::move(points),
            uniform_knots(intervals, substeps)};
}

/// One tangent vector per curve node, in ambient coordinates. The curve is
/// passed alongside; every operation checks size and tangency (1e-12).
struct VectorFieldAlongCurve {
    std::vector<Eigen::VectorXd> vectors;
};

void check_field(const DiscreteCurve& c, const VectorFieldAlongCurve& f);

/// Largest metric norm over all nodes.
double inf_norm(const DiscreteCurve& c, const VectorFieldAlongCurve& f);

// Second-order covariant finite differences. Stencils never cross a knot;
// knot nodes get the average of the one-sided values from both sides.

VectorFieldAlongCurve velocity(const DiscreteCurve& c);
VectorFieldAlongCurve covariant_derivative(const DiscreteCurve& c,
                                           const VectorFieldAlongCurve& f);
/// D_t²γ from the compact stencil (log_{x_k}x_{k+1} + log_{x_k}x_{k−1})/δ²,
/// which is exact for the normal-coordinate second derivative at x_k.
VectorFieldAlongCurve accel(const DiscreteCurve& c);

/// Same stencils, but without averaging at knots: entry [i] holds the values
/// on the nodes of knot interval i (size = cells + 1).
std::vector<std::vector<Eigen::VectorXd>> velocity_by_interval(const DiscreteCurve& c);
std::vector<std::vector<Eigen::VectorXd>> accel_by_interval(const DiscreteCurve& c);

double cubic_energy(const DiscreteCurve& c);
double path_energy(const DiscreteCurve& c);

/// D_t⁴γ + Rm(D_t²γ, γ̇)γ̇ at nodes 2..M−2 of every knot interval (all
/// stencils centred); other nodes hold zero vectors.
VectorFieldAlongCurve el_residual(const DiscreteCurve& c);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// L^p norm of t ↦ d(a(t), b(t)) by composite trapezoid, or the grid max for
/// p = ∞.
double lp_error(const DiscreteCurve& a, const DiscreteCurve& b, double p);

/// Trapezoid L^p norm of t ↦ |f(t)|.
double lp_norm(const DiscreteCurve& c, const VectorFieldAlongCurve& f, double p);

// CSV: header "t,x0,...,x{d}" and for fields additionally "v0,...,v{d}".
void write_csv(std::ostream& os, const DiscreteCurve& c);
void write_csv(std::ostream& os, const DiscreteCurve& c, const VectorFieldAlongCurve& f);
/// Reads a curve written by write_csv; knots are every `substeps` nodes.
DiscreteCurve read_csv(std::istream& is, const Manifold& m, std::size_t substeps);

}  // namespace rspline
