#include "rspline/curve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace rspline {

using Eigen::VectorXd;

DiscreteCurve::DiscreteCurve(Manifold manifold, std::vector<double> times,
                             std::vector<VectorXd> points,
                             std::vector<std::size_t> knot_indices)
    : manifold_(manifold),
      times_(std::move(times)),
      points_(std::move(points)),
      knot_indices_(std::move(knot_indices)) {
    if (times_.size() != points_.size() || times_.size() < 2) {
        throw ContractError("DiscreteCurve: need matching times and points (>= 2)");
    }
    if (times_.front() != 0.0 || times_.back() != 1.0) {
        throw ContractError("DiscreteCurve: grid must run from 0 to 1");
    }
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) {
            throw ContractError("DiscreteCurve: times must be strictly increasing");
        }
    }
    if (knot_indices_.size() < 2 || knot_indices_.front() != 0 ||
        knot_indices_.back() != times_.size() - 1 ||
        !std::is_sorted(knot_indices_.begin(), knot_indices_.end()) ||
        std::adjacent_find(knot_indices_.begin(), knot_indices_.end()) !=
            knot_indices_.end()) {
        throw ContractError("DiscreteCurve: knot indices must increase from 0 to last");
    }
    for (auto& x : points_) {
        if (x.size() != manifold_.ambient_dim()) {
            throw ContractError("DiscreteCurve: point has wrong ambient dimension");
        }
        if (constraint_error(manifold_, x) > 1e-10) {
            throw ContractError("DiscreteCurve: point is off " + manifold_.id());
        }
        x = kernels::normalize_point<double>(manifold_.kind(), x);
    }
    for (std::size_t i = 0; i < intervals(); ++i) {
        const auto [a, b] = interval(i);
        const double d = spacing(i);
        for (std::size_t k = a + 1; k <= b; ++k) {
            if (std::abs(times_[k] - times_[k - 1] - d) > 1e-9 * d) {
                throw ContractError("DiscreteCurve: grid is not uniform inside a knot interval");
            }
        }
    }
}

double DiscreteCurve::spacing(std::size_t i) const {
    const auto [a, b] = interval(i);
    return (times_[b] - times_[a]) / static_cast<double>(b - a);
}

std::size_t DiscreteCurve::min_cells() const {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < intervals(); ++i) {
        m = std::min(m, knot_indices_[i + 1] - knot_indices_[i]);
    }
    return m;
}

std::vector<double> uniform_grid(std::size_t intervals, std::size_t substeps) {
    if (intervals == 0 || substeps == 0) throw ConfigError("uniform_grid: empty grid");
    const std::size_t total = intervals * substeps;
    std::vector<double> t(total + 1);
    for (std::size_t k = 0; k <= total; ++k) {
        t[k] = static_cast<double>(k) / static_cast<double>(total);
    }
    return t;
}

std::vector<std::size_t> uniform_knots(std::size_t intervals, std::size_t substeps) {
    std::vector<std::size_t> k(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) k[i] = i * substeps;
    return k;
}

void check_field(const DiscreteCurve& c, const VectorFieldAlongCurve& f) {
    if (f.vectors.size() != c.size()) {
        throw ContractError("vector field has " + std::to_string(f.vectors.size()) +
                            " entries for a curve of " + std::to_string(c.size()));
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
        const VectorXd& v = f.vectors[k];
        if (v.size() != c.manifold().ambient_dim()) {
            throw ContractError("vector field entry has wrong ambient dimension");
        }
        if (tangency_error(c.manifold(), c.point(k), v) >
            1e-12 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
            throw ContractError("vector field entry " + std::to_string(k) +
                                " is not tangent at its curve point");
        }
    }
}

double inf_norm(const DiscreteCurve& c, const VectorFieldAlongCurve& f) {
    double m = 0.0;
    for (const auto& v : f.vectors) m = std::max(m, geom::norm(c.manifold(), v));
    return m;
}

namespace {

void require_cells(const DiscreteCurve& c, std::size_t cells, const char* what) {
    if (c.min_cells() < cells) {
        throw ConfigError(std::string(what) + " needs at least " +
                          std::to_string(cells + 1) + " nodes per knot interval");
    }
}

// Knot nodes receive the mean of the one-sided values of the two neighbouring
// intervals; both live in the same tangent space.
VectorFieldAlongCurve merge_intervals(const DiscreteCurve& c,
                                      const std::vector<std::vector<VectorXd>>& parts) {
    VectorFieldAlongCurve out;
    out.vectors.resize(c.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto [a, b] = c.interval(i);
        for (std::size_t k = a; k <= b; ++k) {
            const VectorXd& v = parts[i][k - a];
            if (k == a && i > 0) {
                out.vectors[k] = 0.5 * (out.vectors[k] + v);
            } else {
                out.vectors[k] = v;
            }
        }
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
        out.vectors[k] = geom::project(c.manifold(), c.point(k), out.vectors[k]);
    }
    return out;
}

// Covariant D_t of a per-interval field, second order, within one interval.
std::vector<VectorXd> derivative_in_interval(const DiscreteCurve& c, std::size_t i,
                                             const std::vector<VectorXd>& f) {
    const Manifold& m = c.manifold();
    const auto [a, b] = c.interval(i);
    const std::size_t cells = b - a;
    const double d = c.spacing(i);
    auto x = [&](std::size_t j) -> const VectorXd& { return c.point(a + j); };
    auto pull = [&](std::size_t from, std::size_t to) {
        // transport f[from] to node `to` hopping along consecutive nodes
        VectorXd v = f[from];
        std::size_t j = from;
        while (j != to) {
            const std::size_t next = j < to ? j + 1 : j - 1;
            v = geom::transport(m, x(j), x(next), v);
            j = next;
        }
        return v;
    };
    std::vector<VectorXd> out(cells + 1);
    out[0] = (-3.0 * f[0] + 4.0 * pull(1, 0) - pull(2, 0)) / (2.0 * d);
    for (std::size_t j = 1; j < cells; ++j) {
        out[j] = (pull(j + 1, j) - pull(j - 1, j)) / (2.0 * d);
    }
    out[cells] = (3.0 * f[cells] - 4.0 * pull(cells - 1, cells) + pull(cells - 2, cells)) /
                 (2.0 * d);
    return out;
}

}  // namespace

std::vector<std::vector<VectorXd>> velocity_by_interval(const DiscreteCurve& c) {
    require_cells(c, 2, "velocity");
    const Manifold& m = c.manifold();
    std::vector<std::vector<VectorXd>> parts(c.intervals());
    for (std::size_t i = 0; i < c.intervals(); ++i) {
        const auto [a, b] = c.interval(i);
        const std::size_t cells = b - a;
        const double d = c.spacing(i);
        auto lg = [&](std::size_t from, std::size_t to) {
            return geom::log(m, c.point(a + from), c.point(a + to));
        };
        auto& v = parts[i];
        v.resize(cells + 1);
        v[0] = (4.0 * lg(0, 1) - lg(0, 2)) / (2.0 * d);
        for (std::size_t j = 1; j < cells; ++j) {
            v[j] = (lg(j, j + 1) - lg(j, j - 1)) / (2.0 * d);
        }
        v[cells] = -(4.0 * lg(cells, cells - 1) - lg(cells, cells - 2)) / (2.0 * d);
    }
    return parts;
}

std::vector<std::vector<VectorXd>> accel_by_interval(const DiscreteCurve& c) {
    require_cells(c, 3, "accel");
    const Manifold& m = c.manifold();
    std::vector<std::vector<VectorXd>> parts(c.intervals());
    for (std::size_t i = 0; i < c.intervals(); ++i) {
        const auto [a, b] = c.interval(i);
        const std::size_t cells = b - a;
        const double d2 = c.spacing(i) * c.spacing(i);
        auto lg = [&](std::size_t from, std::size_t to) {
            return geom::log(m, c.point(a + from), c.point(a + to));
        };
        auto& acc = parts[i];
        acc.resize(cells + 1);
        acc[0] = (-5.0 * lg(0, 1) + 4.0 * lg(0, 2) - lg(0, 3)) / d2;
        for (std::size_t j = 1; j < cells; ++j) {
            acc[j] = (lg(j, j + 1) + lg(j, j - 1)) / d2;
        }
        acc[cells] = (-5.0 * lg(cells, cells - 1) + 4.0 * lg(cells, cells - 2) -
                      lg(cells, cells - 3)) /
                     d2;
    }
    return parts;
}

VectorFieldAlongCurve velocity(const DiscreteCurve& c) {
    return merge_intervals(c, velocity_by_interval(c));
}

VectorFieldAlongCurve accel(const DiscreteCurve& c) {
    return merge_intervals(c, accel_by_interval(c));
}

VectorFieldAlongCurve covariant_derivative(const DiscreteCurve& c,
                                           const VectorFieldAlongCurve& f) {
    check_field(c, f);
    require_cells(c, 2, "covariant_derivative");
    std::vector<std::vector<VectorXd>> parts(c.intervals());
    for (std::size_t i = 0; i < c.intervals(); ++i) {
        const auto [a, b] = c.interval(i);
        std::vector<VectorXd> local(f.vectors.begin() + static_cast<std::ptrdiff_t>(a),
                                    f.vectors.begin() + static_cast<std::ptrdiff_t>(b) + 1);
        parts[i] = derivative_in_interval(c, i, local);
    }
    return merge_intervals(c, parts);
}

namespace {

double trapezoid_squares(const DiscreteCurve& c,
                         const std::vector<std::vector<VectorXd>>& parts) {
    double total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& f = parts[i];
        double sum = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            const double w = (j == 0 || j + 1 == f.size()) ? 0.5 : 1.0;
            sum += w * geom::inner(c.manifold(), f[j], f[j]);
        }
        total += c.spacing(i) * sum;
    }
    return total;
}

}  // namespace

double cubic_energy(const DiscreteCurve& c) {
    return trapezoid_squares(c, accel_by_interval(c));
}

double path_energy(const DiscreteCurve& c) {
    return trapezoid_squares(c, velocity_by_interval(c));
}

VectorFieldAlongCurve el_residual(const DiscreteCurve& c) {
    require_cells(c, 6, "el_residual");
    const Manifold& m = c.manifold();
    VectorFieldAlongCurve out;
    out.vectors.assign(c.size(), VectorXd::Zero(m.ambient_dim()));
    for (std::size_t i = 0; i < c.intervals(); ++i) {
        const auto [a, b] = c.interval(i);
        const std::size_t cells = b - a;
        const double d = c.spacing(i);
        auto x = [&](std::size_t j) -> const VectorXd& { return c.point(a + j); };
        std::vector<VectorXd> acc(cells + 1), vel(cells + 1);
        for (std::size_t j = 1; j < cells; ++j) {
            const VectorXd fwd = geom::log(m, x(j), x(j + 1));
            const VectorXd bwd = geom::log(m, x(j), x(j - 1));
            acc[j] = (fwd + bwd) / (d * d);
            vel[j] = (fwd - bwd) / (2.0 * d);
        }
        for (std::size_t j = 2; j + 2 <= cells; ++j) {
            const VectorXd fourth = (geom::transport(m, x(j + 1), x(j), acc[j + 1]) -
                                     2.0 * acc[j] +
                                     geom::transport(m, x(j - 1), x(j), acc[j - 1])) /
                                    (d * d);
            out.vectors[a + j] = geom::project(
                m, x(j), fourth + geom::curvature(m, acc[j], vel[j], vel[j]));
        }
    }
    return out;
}

namespace {

double trapezoid_lp(const std::vector<double>& t, const std::vector<double>& g, double p) {
    if (p == kInfinity) return *std::max_element(g.begin(), g.end());
    if (!(p >= 1.0)) throw ContractError("L^p norm needs p >= 1");
    double sum = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        sum += 0.5 * (t[k] - t[k - 1]) * (std::pow(g[k - 1], p) + std::pow(g[k], p));
    }
    return std::pow(sum, 1.0 / p);
}

}  // namespace

double lp_error(const DiscreteCurve& a, const DiscreteCurve& b, double p) {
    if (!(a.manifold() == b.manifold())) throw ContractError("lp_error: manifold mismatch");
    if (a.times() != b.times()) throw ContractError("lp_error: time grids differ");
    std::vector<double> g(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        g[k] = geom::dist(a.manifold(), a.point(k), b.point(k));
    }
    return trapezoid_lp(a.times(), g, p);
}

double lp_norm(const DiscreteCurve& c, const VectorFieldAlongCurve& f, double p) {
    check_field(c, f);
    std::vector<double> g(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) g[k] = geom::norm(c.manifold(), f.vectors[k]);
    return trapezoid_lp(c.times(), g, p);
}

namespace {

void write_header(std::ostream& os, Eigen::Index dim, bool with_field) {
    os << "t";
    for (Eigen::Index i = 0; i < dim; ++i) os << ",x" << i;
    if (with_field) {
        for (Eigen::Index i = 0; i < dim; ++i) os << ",v" << i;
    }
    os << "\n";
}

}  // namespace

void write_csv(std::ostream& os, const DiscreteCurve& c) {
    const auto dim = static_cast<Eigen::Index>(c.manifold().ambient_dim());
    write_header(os, dim, false);
    os << std::setprecision(17);
    for (std::size_t k = 0; k < c.size(); ++k) {
        os << c.times()[k];
        for (Eigen::Index i = 0; i < dim; ++i) os << "," << c.point(k)(i);
        os << "\n";
    }
}

void write_csv(std::ostream& os, const DiscreteCurve& c, const VectorFieldAlongCurve& f) {
    check_field(c, f);
    const auto dim = static_cast<Eigen::Index>(c.manifold().ambient_dim());
    write_header(os, dim, true);
    os << std::setprecision(17);
    for (std::size_t k = 0; k < c.size(); ++k) {
        os << c.times()[k];
        for (Eigen::Index i = 0; i < dim; ++i) os << "," << c.point(k)(i);
        for (Eigen::Index i = 0; i < dim; ++i) os << "," << f.vectors[k](i);
        os << "\n";
    }
}

DiscreteCurve read_csv(std::istream& is, const Manifold& m, std::size_t substeps) {
    std::string line;
    if (!std::getline(is, line)) throw ContractError("read_csv: empty input");
    const auto dim = static_cast<Eigen::Index>(m.ambient_dim());
    std::vector<double> times;
    std::vector<VectorXd> points;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() < static_cast<std::size_t>(dim) + 1) {
            throw ContractError("read_csv: row with too few columns");
        }
        times.push_back(values[0]);
        VectorXd x(dim);
        for (Eigen::Index i = 0; i < dim; ++i) x(i) = values[static_cast<std::size_t>(i) + 1];
        points.push_back(std::move(x));
    }
    if (substeps == 0 || (times.size() - 1) % substeps != 0) {
        throw ContractError("read_csv: node count does not match the substep count");
    }
    auto knots = uniform_knots((times.size() - 1) / substeps, substeps);
    return {m, std::move(times), std::move(points), std::move(knots)};
}

}  // namespace rspline
