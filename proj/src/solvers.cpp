#include "rspline/solvers.hpp"

#include <ceres/jet.h>

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace rspline {

using Eigen::VectorXd;

void InterpolationProblem::validate(bool need_velocities) const {
    if (knot_points.size() < 2) throw ConfigError("interpolation needs at least two knots");
    if (fine_substeps < 2) throw ConfigError("interpolation needs at least 2 substeps");
    for (const auto& p : knot_points) {
        if (p.size() != manifold.ambient_dim() || constraint_error(manifold, p) > 1e-10) {
            throw ContractError("knot point does not lie on " + manifold.id());
        }
    }
    const double reach = 0.9 * manifold.injectivity_radius();
    for (std::size_t i = 1; i < knot_points.size(); ++i) {
        if (geom::dist(manifold, knot_points[i - 1], knot_points[i]) >= reach) {
            throw DomainError("knots " + std::to_string(i - 1) + " and " + std::to_string(i) +
                              " are too far apart for a unique connecting geodesic");
        }
    }
    if (need_velocities) {
        if (!v_start || !v_end) throw ConfigError("cubic interpolation needs end velocities");
        auto check = [&](const VectorXd& p, const VectorXd& v, const char* which) {
            if (v.size() != manifold.ambient_dim() ||
                tangency_error(manifold, p, v) > 1e-10 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
                throw ContractError(std::string(which) + " is not tangent at its knot");
            }
        };
        check(knot_points.front(), *v_start, "v_start");
        check(knot_points.back(), *v_end, "v_end");
    }
}

std::size_t default_substeps(double h) {
    return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(4.0 / h - 1e-9)));
}

namespace {

/// Geodesic from knot i to knot i+1 sampled at the interval's nodes.
std::vector<VectorXd> geodesic_nodes(const Manifold& m, const VectorXd& p, const VectorXd& q,
                                     std::size_t cells) {
    const VectorXd w = geom::log(m, p, q);
    std::vector<VectorXd> nodes(cells + 1);
    for (std::size_t j = 0; j < cells; ++j) {
        nodes[j] = geom::exp(m, p, (static_cast<double>(j) / static_cast<double>(cells)) * w);
    }
    nodes[0] = p;
    nodes[cells] = q;
    return nodes;
}

}  // namespace

DiscreteCurve linear_spline(const InterpolationProblem& prob) {
    prob.validate(false);
    const Manifold& m = prob.manifold;
    const std::size_t cells = prob.fine_substeps;
    std::vector<VectorXd> points;
    points.reserve(prob.intervals() * cells + 1);
    for (std::size_t i = 0; i < prob.intervals(); ++i) {
        auto nodes = geodesic_nodes(m, prob.knot_points[i], prob.knot_points[i + 1], cells);
        points.insert(points.end(), nodes.begin(), nodes.end() - 1);
    }
    points.push_back(prob.knot_points.back());
    return {m, uniform_grid(prob.intervals(), cells), std::move(points),
            uniform_knots(prob.intervals(), cells)};
}

Constraints Constraints::hermite(const DiscreteCurve& c) {
    Constraints k;
    k.fixed_point.assign(c.size(), false);
    k.fixed_velocity.assign(c.size(), false);
    for (std::size_t idx : c.knot_indices()) k.fixed_point[idx] = true;
    k.fixed_velocity.front() = true;
    k.fixed_velocity.back() = true;
    return k;
}

HermiteCurve initial_guess(const InterpolationProblem& prob) {
    prob.validate(true);
    DiscreteCurve curve = linear_spline(prob);
    const Manifold& m = prob.manifold;
    const double h = prob.h();
    std::vector<VectorXd> vel(curve.size());
    for (std::size_t i = 0; i < curve.intervals(); ++i) {
        const auto [a, b] = curve.interval(i);
        const VectorXd& p = curve.point(a);
        const VectorXd w = geom::log(m, p, curve.point(b)) / h;
        for (std::size_t k = a; k <= b; ++k) {
            VectorXd v = geom::transport(m, p, curve.point(k), w);
            vel[k] = (k == a && i > 0) ? VectorXd(0.5 * (vel[k] + v)) : v;
        }
    }
    vel.front() = *prob.v_start;
    vel.back() = *prob.v_end;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        vel[k] = geom::project(m, curve.point(k), vel[k]);
    }
    return {std::move(curve), std::move(vel)};
}

namespace {

template <class T>
using Vec = kernels::Vec<T>;

/// Two residual blocks whose squared norms sum to the cell energy.
template <class T>
Vec<T> cell_residual(ManifoldKind kind, const Vec<T>& xa, const Vec<T>& va,
                     const Vec<T>& xb, const Vec<T>& vb, double d) {
    const Vec<T> chord = kernels::log_map<T>(kind, xa, xb);
    const Vec<T> vb_at_a = kernels::transport<T>(kind, xb, xa, vb);
    const Vec<T> r1 = (vb_at_a - va) / std::sqrt(d);
    const Vec<T> r2 = (std::sqrt(3.0) / (d * std::sqrt(d))) * ((va + vb_at_a) * d - chord * 2.0);
    const Vec<T> c1 = kernels::isometric_coords<T>(kind, xa, r1);
    const Vec<T> c2 = kernels::isometric_coords<T>(kind, xa, r2);
    Vec<T> out(c1.size() + c2.size());
    out << c1, c2;
    return out;
}

double cell_spacing(const DiscreteCurve& c, std::size_t k) {
    return c.times()[k + 1] - c.times()[k];
}

}  // namespace

double hermite_energy(const HermiteCurve& c) {
    const ManifoldKind kind = c.curve.manifold().kind();
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < c.curve.size(); ++k) {
        total += cell_residual<double>(kind, c.curve.point(k), c.velocities[k],
                                       c.curve.point(k + 1), c.velocities[k + 1],
                                       cell_spacing(c.curve, k))
                     .squaredNorm();
    }
    return total;
}

HermiteObjective::HermiteObjective(const HermiteCurve& reference, Constraints constraints)
    : manifold_(reference.curve.manifold()), constraints_(std::move(constraints)) {
    const std::size_t nodes = reference.curve.size();
    if (constraints_.fixed_point.size() != nodes || constraints_.fixed_velocity.size() != nodes ||
        reference.velocities.size() != nodes) {
        throw ContractError("HermiteObjective: constraint/velocity sizes do not match the curve");
    }
    if (manifold_.dim() > 4) {
        throw ConfigError("cubic solver supports intrinsic dimension up to 4");
    }
    const auto n = static_cast<long>(manifold_.dim());
    point_offset_.assign(nodes, -1);
    velocity_offset_.assign(nodes, -1);
    long next = 0;
    for (std::size_t k = 0; k < nodes; ++k) {
        if (!constraints_.fixed_point[k]) {
            point_offset_[k] = next;
            next += n;
        }
        if (!constraints_.fixed_velocity[k]) {
            velocity_offset_[k] = next;
            next += n;
        }
    }
    num_variables_ = static_cast<std::size_t>(next);
}

HermiteCurve HermiteObjective::retract(const HermiteCurve& c, const VectorXd& step) const {
    const Manifold& m = manifold_;
    const auto n = static_cast<Eigen::Index>(m.dim());
    std::vector<VectorXd> points = c.curve.points();
    std::vector<VectorXd> vel = c.velocities;
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (point_offset_[k] < 0 && velocity_offset_[k] < 0) continue;
        const Eigen::MatrixXd basis = tangent_basis(m, points[k]);
        const VectorXd x = points[k];
        if (velocity_offset_[k] >= 0) vel[k] += basis * step.segment(velocity_offset_[k], n);
        if (point_offset_[k] >= 0) {
            points[k] = geom::exp(m, x, basis * step.segment(point_offset_[k], n));
            vel[k] = geom::transport(m, x, points[k], vel[k]);
        }
        vel[k] = geom::project(m, points[k], vel[k]);
    }
    return {DiscreteCurve(m, c.curve.times(), std::move(points), c.curve.knot_indices()),
            std::move(vel)};
}

namespace {

using CellSystem = std::pair<VectorXd, Eigen::MatrixXd>;  // residual, Jacobian

// Residual and Jacobian of one cell with respect to (ξ_a, η_a, ξ_b, η_b).
template <int N>
CellSystem linearize_cell(ManifoldKind kind, const VectorXd& xa, const VectorXd& va,
                          const Eigen::MatrixXd& ba, const VectorXd& xb, const VectorXd& vb,
                          const Eigen::MatrixXd& bb, double d) {
    using J = ceres::Jet<double, N>;
    using MatJ = Eigen::Matrix<J, Eigen::Dynamic, Eigen::Dynamic>;
    static constexpr int n = N / 4;
    auto seeded = [](int first) {
        Vec<J> s(n);
        for (int i = 0; i < n; ++i) s(i) = J(0.0, first + i);
        return s;
    };
    const MatJ ba_j = ba.cast<J>();
    const MatJ bb_j = bb.cast<J>();
    const Vec<J> xa0 = xa.cast<J>();
    const Vec<J> xb0 = xb.cast<J>();
    const Vec<J> xa1 = kernels::exp_map<J>(kind, xa0, ba_j * seeded(0));
    const Vec<J> va1 = kernels::transport<J>(kind, xa0, xa1, va.cast<J>() + ba_j * seeded(n));
    const Vec<J> xb1 = kernels::exp_map<J>(kind, xb0, bb_j * seeded(2 * n));
    const Vec<J> vb1 =
        kernels::transport<J>(kind, xb0, xb1, vb.cast<J>() + bb_j * seeded(3 * n));
    const Vec<J> r = cell_residual<J>(kind, xa1, va1, xb1, vb1, d);
    CellSystem out{VectorXd(r.size()), Eigen::MatrixXd(r.size(), N)};
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        out.first(i) = r(i).a;
        out.second.row(i) = r(i).v.transpose();
    }
    return out;
}

CellSystem linearize_cell(int dim, ManifoldKind kind, const VectorXd& xa, const VectorXd& va,
                          const Eigen::MatrixXd& ba, const VectorXd& xb, const VectorXd& vb,
                          const Eigen::MatrixXd& bb, double d) {
    switch (dim) {
        case 1: return linearize_cell<4>(kind, xa, va, ba, xb, vb, bb, d);
        case 2: return linearize_cell<8>(kind, xa, va, ba, xb, vb, bb, d);
        case 3: return linearize_cell<12>(kind, xa, va, ba, xb, vb, bb, d);
        default: return linearize_cell<16>(kind, xa, va, ba, xb, vb, bb, d);
    }
}

}  // namespace

HermiteObjective::Model HermiteObjective::linearize(const HermiteCurve& c) const {
    const ManifoldKind kind = manifold_.kind();
    const int n = manifold_.dim();
    const std::size_t nodes = c.curve.size();
    std::vector<Eigen::MatrixXd> bases(nodes);
    for (std::size_t k = 0; k < nodes; ++k) bases[k] = tangent_basis(manifold_, c.curve.point(k));

    Model model;
    model.gradient = VectorXd::Zero(static_cast<Eigen::Index>(num_variables_));
    model.gradient_noise = VectorXd::Zero(static_cast<Eigen::Index>(num_variables_));
    model.normal_matrix.reserve((nodes - 1) * static_cast<std::size_t>(16 * n * n));
    std::vector<long> column(static_cast<std::size_t>(4 * n));

    for (std::size_t k = 0; k + 1 < nodes; ++k) {
        const double d = cell_spacing(c.curve, k);
        const auto [res, jac] =
            linearize_cell(n, kind, c.curve.point(k), c.velocities[k], bases[k],
                           c.curve.point(k + 1), c.velocities[k + 1], bases[k + 1], d);
        model.energy += res.squaredNorm();
        // Size of the terms that cancel inside each residual block; ε times
        // this is the rounding error of the residual.
        const double speed = geom::norm(manifold_, c.velocities[k]) +
                             geom::norm(manifold_, c.velocities[k + 1]);
        const double chord = geom::dist(manifold_, c.curve.point(k), c.curve.point(k + 1)) +
                             c.curve.point(k).norm() + c.curve.point(k + 1).norm();
        VectorXd scale(res.size());
        scale.head(res.size() / 2).setConstant(speed / std::sqrt(d));
        scale.tail(res.size() / 2).setConstant(std::sqrt(3.0) * (d * speed + 2.0 * chord) /
                                               (d * std::sqrt(d)));
        const VectorXd noise =
            2.0 * std::numeric_limits<double>::epsilon() * jac.cwiseAbs().transpose() * scale;
        const long blocks[4] = {point_offset_[k], velocity_offset_[k], point_offset_[k + 1],
                                velocity_offset_[k + 1]};
        for (int b = 0; b < 4; ++b) {
            for (int i = 0; i < n; ++i) {
                column[static_cast<std::size_t>(b * n + i)] = blocks[b] < 0 ? -1 : blocks[b] + i;
            }
        }
        const VectorXd g = 2.0 * jac.transpose() * res;
        const Eigen::MatrixXd h = 2.0 * jac.transpose() * jac;
        for (int a = 0; a < 4 * n; ++a) {
            const long ca = column[static_cast<std::size_t>(a)];
            if (ca < 0) continue;
            model.gradient(ca) += g(a);
            model.gradient_noise(ca) += noise(a);
            for (int b = 0; b < 4 * n; ++b) {
                const long cb = column[static_cast<std::size_t>(b)];
                if (cb < 0) continue;
                model.normal_matrix.emplace_back(ca, cb, h(a, b));
            }
        }
    }
    return model;
}

VectorXd HermiteObjective::gradient(const HermiteCurve& c) const {
    return linearize(c).gradient;
}

std::pair<HermiteCurve, SolveStats> minimize_energy(const HermiteCurve& c0,
                                                    const Constraints& constraints,
                                                    const SolverOptions& opts) {
    const HermiteObjective objective(c0, constraints);
    const auto nvar = static_cast<Eigen::Index>(objective.num_variables());

    std::ofstream log;
    if (!opts.log_path.empty()) {
        log.open(opts.log_path);
        log << "iteration,energy,gradient_norm\n" << std::setprecision(17);
    }

    HermiteCurve current = c0;
    SolveStats stats;
    auto model = objective.linearize(current);
    double grad_norm = nvar > 0 ? model.gradient.lpNorm<Eigen::Infinity>() : 0.0;
    const double relative_tol = opts.grad_tol * (1.0 + grad_norm);
    double sd_scale = 0.0;

    for (;;) {
        stats.final_energy = model.energy;
        stats.final_gradient_norm = grad_norm;
        // The gradient cannot be resolved below its rounding error.
        stats.gradient_tolerance =
            std::max(relative_tol, nvar > 0 ? model.gradient_noise.lpNorm<Eigen::Infinity>() : 0.0);
        if (log.is_open()) log << stats.iterations << "," << model.energy << "," << grad_norm << "\n";
        if (grad_norm <= stats.gradient_tolerance) {
            stats.converged = true;
            break;
        }
        if (stats.iterations >= opts.max_iters) {
            throw SolverError("cubic spline solver did not converge within " +
                                  std::to_string(opts.max_iters) + " iterations",
                              stats);
        }

        Eigen::SparseMatrix<double> normal(nvar, nvar);
        normal.setFromTriplets(model.normal_matrix.begin(), model.normal_matrix.end());
        double max_diag = 0.0;
        for (Eigen::Index i = 0; i < nvar; ++i) max_diag = std::max(max_diag, normal.coeff(i, i));

        VectorXd step;
        if (grad_norm < opts.newton_switch) {
            // Gauss–Newton: JᵀJ s = −g; a small diagonal shift only when the
            // normal matrix is numerically singular.
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
            if (ldlt.info() != Eigen::Success) {
                for (Eigen::Index i = 0; i < nvar; ++i) normal.coeffRef(i, i) += 1e-12 * max_diag;
                ldlt.compute(normal);
            }
            if (ldlt.info() != Eigen::Success) {
                throw SolverError("Gauss-Newton system could not be factorized", stats);
            }
            step = ldlt.solve(-model.gradient);
        } else {
            if (sd_scale == 0.0) sd_scale = 1.0 / max_diag;
            step = -sd_scale * model.gradient;
        }

        const double slope = model.gradient.dot(step);
        double alpha = 1.0;
        bool accepted = false;
        HermiteCurve trial = current;
        double trial_energy = 0.0;
        for (int tries = 0; tries < 60; ++tries, alpha *= opts.armijo_factor) {
            trial = objective.retract(current, alpha * step);
            trial_energy = objective.energy(trial);
            if (trial_energy <= model.energy + opts.sufficient_decrease * alpha * slope) {
                accepted = true;
                break;
            }
            // At the roundoff floor the energy cannot resolve the decrease;
            // accept a step that reduces the gradient instead.
            const double noise = 1e-13 * (1.0 + std::abs(model.energy));
            if (alpha == 1.0 && std::abs(trial_energy - model.energy) <= noise &&
                -slope <= noise) {
                const auto trial_model = objective.linearize(trial);
                if (trial_model.gradient.lpNorm<Eigen::Infinity>() < grad_norm) {
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) throw SolverError("line search failed to decrease the energy", stats);
        if (grad_norm >= opts.newton_switch) {
            sd_scale *= alpha == 1.0 ? 2.0 : alpha;
        }

        current = std::move(trial);
        ++stats.iterations;
        model = objective.linearize(current);
        grad_norm = nvar > 0 ? model.gradient.lpNorm<Eigen::Infinity>() : 0.0;
    }
    return {std::move(current), stats};
}

CubicSolution cubic_spline(const InterpolationProblem& prob, const SolverOptions& opts) {
    HermiteCurve start = initial_guess(prob);
    const Constraints constraints = Constraints::hermite(start.curve);
    auto [solution, stats] = minimize_energy(start, constraints, opts);
    if (solution.curve.min_cells() >= 6) {
        stats.el_residual_inf = inf_norm(solution.curve, el_residual(solution.curve));
    }
    return {std::move(solution.curve), VectorFieldAlongCurve{std::move(solution.velocities)},
            stats};
}

}  // namespace rspline
