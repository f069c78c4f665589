#pragma once

#include "rspline/curve.hpp"

#include <Eigen/Core>

#include <vector>

namespace rspline {

/// One tangent vector per knot, based at the host curve's knot points.
struct KnotValues {
    std::vector<Eigen::VectorXd> values;
};

/// Interpolation operator ℒ: on every knot interval, the solution of
///     D_t²w + Rm(w, γ̇)γ̇ = 0,   w(t_i) = kv[i],
/// computed in a frame transported node to node along the curve, with
/// centred second differences and a block tridiagonal Cholesky solve.
/// Throws DomainError when the segment system is not positive definite
/// (h too large for the curvature and speed of the curve).
VectorFieldAlongCurve jacobi_interpolate(const DiscreteCurve& c, const KnotValues& kv);

/// ∞-norm of D_t²f + Rm(f, ċ)ċ over the interior nodes of every knot interval.
double jacobi_residual(const DiscreteCurve& c, const VectorFieldAlongCurve& f);

}  // namespace rspline
