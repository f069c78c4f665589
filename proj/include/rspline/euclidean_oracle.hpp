#pragma once

// Exact cubic spline interpolation in R^d with clamped (Hermite) ends,
// written in the uniform cubic B-spline basis
//     γ_h(t) = Σ_{i=-1}^{N+1} x_i B(t/h − i).

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace rspline::oracle {

/// Uniform cubic B-spline: (3|t|³ − 6t² + 4)/6 on |t| ≤ 1, (2 − |t|)³/6 on
/// 1 < |t| ≤ 2, zero elsewhere.
double bspline_basis(double t);
double bspline_basis_d1(double t);
double bspline_basis_d2(double t);

struct BSplineCoefficients {
    std::vector<Eigen::VectorXd> control;  // x_{-1} .. x_{N+1}
    double h = 0.0;

    std::size_t intervals() const { return control.size() - 3; }
};

/// Tridiagonal system of size N+3 (rows are scaled by 1/6 as in the textbook
/// form, first/last rows (1/12, 1/6)).
Eigen::MatrixXd system_matrix(std::size_t intervals);

/// Solves for the control points from knot values y_0..y_N and end
/// derivatives v0, v1.
BSplineCoefficients euclidean_cubic_spline(const std::vector<Eigen::VectorXd>& knots,
                                           const Eigen::VectorXd& v0,
                                           const Eigen::VectorXd& v1, double h);

/// Value (order 0) or derivative (order 1, 2) at t ∈ [0,1].
Eigen::VectorXd evaluate(const BSplineCoefficients& s, double t, int order = 0);

/// ∫_0^1 (w, γ̈_h − γ̈) dt for the piecewise-linear field w given by its knot
/// values, using a 10-point Gauss rule on every knot interval.
double galerkin_check(const BSplineCoefficients& s,
                      const std::function<Eigen::VectorXd(double)>& gamma_dd,
                      const std::vector<Eigen::VectorXd>& w_knots);

}  // namespace rspline::oracle
