#include "rspline/jacobi.hpp"

#include "rspline/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>

namespace rspline {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_knot_values(const DiscreteCurve& c, const KnotValues& kv) {
    const Manifold& m = c.manifold();
    if (kv.values.size() != c.intervals() + 1) {
        throw ContractError("jacobi_interpolate: need one value per knot");
    }
    for (std::size_t i = 0; i < kv.values.size(); ++i) {
        const VectorXd& p = c.point(c.knot_indices()[i]);
        const VectorXd& v = kv.values[i];
        if (v.size() != m.ambient_dim()) {
            throw ContractError("jacobi_interpolate: knot value has wrong dimension");
        }
        if (tangency_error(m, p, v) > 1e-10 * (1.0 + v.norm())) {
            throw ContractError("jacobi_interpolate: knot value not tangent at its knot");
        }
    }
}

// Frame coordinates ⟨E_l, v⟩ of v in the orthonormal frame E.
VectorXd frame_coords(const Manifold& m, const MatrixXd& frame, const VectorXd& v) {
    VectorXd out(frame.cols());
    for (Eigen::Index l = 0; l < frame.cols(); ++l) out(l) = geom::inner(m, frame.col(l), v);
    return out;
}

}  // namespace

VectorFieldAlongCurve jacobi_interpolate(const DiscreteCurve& c, const KnotValues& kv) {
    check_knot_values(c, kv);
    const Manifold& m = c.manifold();
    const auto n = static_cast<Eigen::Index>(m.dim());
    const auto vel = velocity_by_interval(c);

    VectorFieldAlongCurve out;
    out.vectors.assign(c.size(), VectorXd::Zero(m.ambient_dim()));
    for (std::size_t i = 0; i < c.intervals(); ++i) {
        const auto [a, b] = c.interval(i);
        const std::size_t cells = b - a;
        const double d2 = c.spacing(i) * c.spacing(i);

        std::vector<MatrixXd> frame(cells + 1);
        frame[0] = tangent_basis(m, c.point(a));
        for (std::size_t j = 1; j <= cells; ++j) {
            frame[j].resize(frame[0].rows(), n);
            for (Eigen::Index l = 0; l < n; ++l) {
                frame[j].col(l) = geom::project(
                    m, c.point(a + j),
                    geom::transport(m, c.point(a + j - 1), c.point(a + j), frame[j - 1].col(l)));
            }
        }

        const VectorXd w0 = frame_coords(m, frame[0], kv.values[i]);
        const VectorXd w1 = frame_coords(m, frame[cells], kv.values[i + 1]);

        // Row j (1..cells-1): −W_{j−1} + (2I − δ²R_j) W_j − W_{j+1} = 0.
        std::vector<Eigen::LLT<MatrixXd>> pivots(cells);
        std::vector<VectorXd> y(cells);
        for (std::size_t j = 1; j < cells; ++j) {
            const VectorXd& v = vel[i][j];
            MatrixXd r(n, n);
            for (Eigen::Index l = 0; l < n; ++l) {
                const VectorXd rl = geom::curvature(m, frame[j].col(l), v, v);
                r.col(l) = frame_coords(m, frame[j], rl);
            }
            MatrixXd s = 2.0 * MatrixXd::Identity(n, n) - d2 * 0.5 * (r + r.transpose());
            VectorXd rhs = VectorXd::Zero(n);
            if (j == 1) rhs += w0;
            if (j + 1 == cells) rhs += w1;
            if (j > 1) {
                s -= pivots[j - 1].solve(MatrixXd::Identity(n, n));
                rhs += pivots[j - 1].solve(y[j - 1]);
            }
            pivots[j].compute(0.5 * (s + s.transpose()));
            if (pivots[j].info() != Eigen::Success) {
                throw DomainError(
                    "jacobi_interpolate: segment system is not positive definite; h is too "
                    "large for the well-posedness condition (h·speed·sqrt(curvature) < π)");
            }
            y[j] = std::move(rhs);
        }

        std::vector<VectorXd> w(cells + 1);
        w[0] = w0;
        w[cells] = w1;
        for (std::size_t j = cells; j-- > 1;) {
            VectorXd rhs = y[j];
            if (j + 1 < cells) rhs += w[j + 1];
            w[j] = pivots[j].solve(rhs);
        }
        for (std::size_t j = 1; j < cells; ++j) {
            out.vectors[a + j] = geom::project(m, c.point(a + j), frame[j] * w[j]);
        }
        out.vectors[a] = kv.values[i];
        out.vectors[b] = kv.values[i + 1];
    }
    return out;
}

double jacobi_residual(const DiscreteCurve& c, const VectorFieldAlongCurve& f) {
    check_field(c, f);
    const Manifold& m = c.manifold();
    const auto vel = velocity_by_interval(c);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.intervals(); ++i) {
        const auto [a, b] = c.interval(i);
        const double d2 = c.spacing(i) * c.spacing(i);
        for (std::size_t j = 1; j + 1 <= b - a; ++j) {
            const std::size_t k = a + j;
            const VectorXd& x = c.point(k);
            const VectorXd second = (geom::transport(m, c.point(k + 1), x, f.vectors[k + 1]) -
                                     2.0 * f.vectors[k] +
                                     geom::transport(m, c.point(k - 1), x, f.vectors[k - 1])) /
                                    d2;
            const VectorXd& v = vel[i][j];
            const VectorXd res =
                geom::project(m, x, second + geom::curvature(m, f.vectors[k], v, v));
            worst = std::max(worst, geom::norm(m, res));
        }
    }
    return worst;
}

}  // namespace rspline
