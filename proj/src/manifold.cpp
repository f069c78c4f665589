#include "rspline/manifold.hpp"

#include <Eigen/QR>

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace rspline {

namespace {

constexpr double kCutLocusMargin = 1e-6;

void require_same(const Manifold& a, const Manifold& b, const char* what) {
    if (!(a == b)) {
        throw ContractError(std::string(what) + ": manifold mismatch (" + a.id() +
                            " vs " + b.id() + ")");
    }
}

void require_base(const ManifoldPoint& p, const TangentVector& v, const char* what) {
    require_same(p.manifold, v.base.manifold, what);
    const double scale = 1.0 + p.coords.lpNorm<Eigen::Infinity>();
    if ((p.coords - v.base.coords).lpNorm<Eigen::Infinity>() > 1e-12 * scale) {
        throw ContractError(std::string(what) + ": tangent vector is not based at p");
    }
}

void require_size(const Manifold& m, const Eigen::VectorXd& x, const char* what) {
    if (x.size() != m.ambient_dim()) {
        throw ContractError(std::string(what) + ": expected " +
                            std::to_string(m.ambient_dim()) +
                            " ambient coordinates, got " + std::to_string(x.size()));
    }
}

}  // namespace

Manifold::Manifold(ManifoldKind kind, int dim) : kind_(kind), dim_(dim) {
    if (dim < 1) throw ConfigError("manifold dimension must be positive");
    if (kind == ManifoldKind::hyperbolic && dim != 2) {
        throw ConfigError("hyperbolic backend is only provided for dimension 2");
    }
}

Manifold Manifold::parse(std::string_view id) {
    const auto colon = id.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("manifold id '" + std::string(id) + "' lacks ':<dim>'");
    }
    const std::string_view name = id.substr(0, colon);
    const std::string_view digits = id.substr(colon + 1);
    int dim = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw ConfigError("manifold id '" + std::string(id) + "' has a bad dimension");
    }
    if (name == "euclidean") return {ManifoldKind::euclidean, dim};
    if (name == "sphere") return {ManifoldKind::sphere, dim};
    if (name == "hyperbolic") return {ManifoldKind::hyperbolic, dim};
    throw ConfigError("unknown manifold '" + std::string(name) + "'");
}

std::string Manifold::id() const {
    const char* name = kind_ == ManifoldKind::euclidean ? "euclidean"
                       : kind_ == ManifoldKind::sphere  ? "sphere"
                                                        : "hyperbolic";
    return std::string(name) + ":" + std::to_string(dim_);
}

double Manifold::injectivity_radius() const {
    return kind_ == ManifoldKind::sphere ? std::numbers::pi
                                         : std::numeric_limits<double>::infinity();
}

double constraint_error(const Manifold& m, const Eigen::VectorXd& x) {
    switch (m.kind()) {
        case ManifoldKind::sphere:
            return std::abs(x.norm() - 1.0);
        case ManifoldKind::hyperbolic:
            return x(0) <= 0.0 ? std::numeric_limits<double>::infinity()
                               : std::abs(kernels::metric(m.kind(), x, x) + 1.0);
        case ManifoldKind::euclidean:
            break;
    }
    return 0.0;
}

double tangency_error(const Manifold& m, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& v) {
    if (m.kind() == ManifoldKind::euclidean) return 0.0;
    return std::abs(kernels::metric(m.kind(), p, v));
}

ManifoldPoint make_point(const Manifold& m, Eigen::VectorXd coords) {
    require_size(m, coords, "make_point");
    if (constraint_error(m, coords) > 1e-10) {
        throw ContractError("make_point: coordinates do not lie on " + m.id());
    }
    return {m, kernels::normalize_point<double>(m.kind(), coords)};
}

TangentVector make_tangent(const ManifoldPoint& base, Eigen::VectorXd vec) {
    require_size(base.manifold, vec, "make_tangent");
    const double scale = 1.0 + vec.lpNorm<Eigen::Infinity>();
    if (tangency_error(base.manifold, base.coords, vec) > 1e-10 * scale) {
        throw ContractError("make_tangent: vector is not tangent at the base point");
    }
    return {base, kernels::project_tangent<double>(base.manifold.kind(), base.coords, vec)};
}

namespace geom {

double inner(const Manifold& m, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return kernels::metric<double>(m.kind(), a, b);
}

double norm(const Manifold& m, const Eigen::VectorXd& v) {
    return std::sqrt(std::max(0.0, inner(m, v, v)));
}

double dist(const Manifold& m, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    const Eigen::VectorXd d = q - p;
    switch (m.kind()) {
        case ManifoldKind::sphere:
            // Chord formula keeps full relative accuracy for nearby points.
            return 2.0 * std::asin(std::min(1.0, d.norm() / 2.0));
        case ManifoldKind::hyperbolic:
            return 2.0 * std::asinh(std::sqrt(std::max(0.0, inner(m, d, d))) / 2.0);
        case ManifoldKind::euclidean:
            break;
    }
    return d.norm();
}

Eigen::VectorXd exp(const Manifold& m, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& v) {
    if (m.kind() == ManifoldKind::sphere &&
        v.norm() > std::numbers::pi - kCutLocusMargin) {
        throw DomainError("exp: tangent vector reaches the cut locus of the sphere");
    }
    return kernels::exp_map<double>(m.kind(), p, v);
}

Eigen::VectorXd log(const Manifold& m, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q) {
    if (m.kind() == ManifoldKind::sphere &&
        dist(m, p, q) > std::numbers::pi - kCutLocusMargin) {
        throw DomainError("log: points are (nearly) antipodal on the sphere");
    }
    return kernels::project_tangent<double>(m.kind(), p,
                                            kernels::log_map<double>(m.kind(), p, q));
}

Eigen::VectorXd transport(const Manifold& m, const Eigen::VectorXd& p,
                          const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
    if (m.kind() == ManifoldKind::sphere &&
        dist(m, p, q) > std::numbers::pi - kCutLocusMargin) {
        throw DomainError("transport: points are (nearly) antipodal on the sphere");
    }
    return kernels::transport<double>(m.kind(), p, q, v);
}

Eigen::VectorXd curvature(const Manifold& m, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    switch (m.kind()) {
        case ManifoldKind::sphere:
            return inner(m, y, z) * x - inner(m, x, z) * y;
        case ManifoldKind::hyperbolic:
            return inner(m, x, z) * y - inner(m, y, z) * x;
        case ManifoldKind::euclidean:
            break;
    }
    return Eigen::VectorXd::Zero(x.size());
}

Eigen::VectorXd project(const Manifold& m, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& a) {
    return kernels::project_tangent<double>(m.kind(), p, a);
}

}  // namespace geom

double inner(const TangentVector& v, const TangentVector& w) {
    require_base(v.base, w, "inner");
    return geom::inner(v.base.manifold, v.vec, w.vec);
}

double norm(const TangentVector& v) { return geom::norm(v.base.manifold, v.vec); }

ManifoldPoint exp(const ManifoldPoint& p, const TangentVector& v) {
    require_base(p, v, "exp");
    return {p.manifold, geom::exp(p.manifold, p.coords, v.vec)};
}

TangentVector log(const ManifoldPoint& p, const ManifoldPoint& q) {
    require_same(p.manifold, q.manifold, "log");
    return {p, geom::log(p.manifold, p.coords, q.coords)};
}

double dist(const ManifoldPoint& p, const ManifoldPoint& q) {
    require_same(p.manifold, q.manifold, "dist");
    return geom::dist(p.manifold, p.coords, q.coords);
}

TangentVector transport_geodesic(const ManifoldPoint& p, const ManifoldPoint& q,
                                 const TangentVector& v) {
    require_base(p, v, "transport_geodesic");
    require_same(p.manifold, q.manifold, "transport_geodesic");
    return {q, geom::transport(p.manifold, p.coords, q.coords, v.vec)};
}

TangentVector curvature(const ManifoldPoint& p, const TangentVector& x,
                        const TangentVector& y, const TangentVector& z) {
    require_base(p, x, "curvature");
    require_base(p, y, "curvature");
    require_base(p, z, "curvature");
    return {p, geom::curvature(p.manifold, x.vec, y.vec, z.vec)};
}

TangentVector project_tangent(const ManifoldPoint& p, const Eigen::VectorXd& a) {
    require_size(p.manifold, a, "project_tangent");
    return {p, geom::project(p.manifold, p.coords, a)};
}

Eigen::MatrixXd tangent_basis(const Manifold& m, const Eigen::VectorXd& p) {
    const int n = m.dim();
    switch (m.kind()) {
        case ManifoldKind::euclidean:
            return Eigen::MatrixXd::Identity(n, n);
        case ManifoldKind::sphere: {
            // Householder Q of p: its first column is ±p, the rest span p^⊥.
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
            const Eigen::MatrixXd q = qr.householderQ();
            return q.rightCols(n);
        }
        case ManifoldKind::hyperbolic: {
            // Columns of the Lorentz boost that maps the origin to p.
            const Eigen::VectorXd ps = p.tail(n);
            Eigen::MatrixXd basis(n + 1, n);
            basis.row(0) = ps.transpose();
            basis.bottomRows(n) = Eigen::MatrixXd::Identity(n, n) +
                                  ps * ps.transpose() / (1.0 + p(0));
            return basis;
        }
    }
    return {};
}

Eigen::VectorXd random_point(const Manifold& m, std::mt19937_64& rng, double spread) {
    std::normal_distribution<double> normal;
    switch (m.kind()) {
        case ManifoldKind::euclidean: {
            Eigen::VectorXd x(m.dim());
            for (auto& c : x) c = spread * normal(rng);
            return x;
        }
        case ManifoldKind::sphere: {
            Eigen::VectorXd x(m.ambient_dim());
            for (auto& c : x) c = normal(rng);
            return x.normalized();
        }
        case ManifoldKind::hyperbolic: {
            Eigen::VectorXd origin = Eigen::VectorXd::Zero(m.ambient_dim());
            origin(0) = 1.0;
            return geom::exp(m, origin, random_tangent(m, origin, rng, spread));
        }
    }
    return {};
}

Eigen::VectorXd random_tangent(const Manifold& m, const Eigen::VectorXd& p,
                               std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd coeffs(m.dim());
    for (auto& c : coeffs) c = scale * normal(rng);
    return tangent_basis(m, p) * coeffs;
}

}  // namespace rspline
