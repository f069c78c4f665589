#pragma once

#include "rspline/errors.hpp"
#include "rspline/kernels.hpp"

#include <Eigen/Core>

#include <random>
#include <string>
#include <string_view>

namespace rspline {

/// Backend tag plus intrinsic dimension. Parsed from ids such as
/// "euclidean:3", "sphere:2" and "hyperbolic:2".
class Manifold {
public:
    Manifold(ManifoldKind kind, int dim);

    static Manifold parse(std::string_view id);

    ManifoldKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int ambient_dim() const {
        return kind_ == ManifoldKind::euclidean ? dim_ : dim_ + 1;
    }
    std::string id() const;

    /// Geodesic distance below which log/transport are well-defined.
    double injectivity_radius() const;

    friend bool operator==(const Manifold&, const Manifold&) = default;

private:
    ManifoldKind kind_;
    int dim_;
};

/// A point in ambient coordinates, tagged with its manifold.
struct ManifoldPoint {
    Manifold manifold;
    Eigen::VectorXd coords;
};

/// Ambient vector in the tangent space at `base`.
struct TangentVector {
    ManifoldPoint base;
    Eigen::VectorXd vec;
};

// Point construction validates the manifold constraint (within 1e-10) and
// then renormalizes, so stored points satisfy it to roundoff.
ManifoldPoint make_point(const Manifold& m, Eigen::VectorXd coords);
TangentVector make_tangent(const ManifoldPoint& base, Eigen::VectorXd vec);

/// Distance of an ambient vector from satisfying the point constraint.
double constraint_error(const Manifold& m, const Eigen::VectorXd& x);
/// |<p, v>| in the ambient form; zero for tangent vectors.
double tangency_error(const Manifold& m, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& v);

double inner(const TangentVector& v, const TangentVector& w);
double norm(const TangentVector& v);

ManifoldPoint exp(const ManifoldPoint& p, const TangentVector& v);
TangentVector log(const ManifoldPoint& p, const ManifoldPoint& q);
double dist(const ManifoldPoint& p, const ManifoldPoint& q);
TangentVector transport_geodesic(const ManifoldPoint& p, const ManifoldPoint& q,
                                 const TangentVector& v);
/// Riemann tensor Rm(x,y)z with the convention D_sD_t v − D_tD_s v =
/// Rm(∂_s, ∂_t)v, i.e. Rm(x,y)z = K(⟨y,z⟩x − ⟨x,z⟩y) for constant curvature K.
TangentVector curvature(const ManifoldPoint& p, const TangentVector& x,
                        const TangentVector& y, const TangentVector& z);
TangentVector project_tangent(const ManifoldPoint& p, const Eigen::VectorXd& a);

/// Orthonormal basis of T_p as columns (ambient_dim × dim).
Eigen::MatrixXd tangent_basis(const Manifold& m, const Eigen::VectorXd& p);

/// Raw-vector geometry used inside the numerical modules. Domain guards are
/// applied here too; the typed functions above add base-point contracts.
namespace geom {

double inner(const Manifold& m, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double norm(const Manifold& m, const Eigen::VectorXd& v);
Eigen::VectorXd exp(const Manifold& m, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& v);
Eigen::VectorXd log(const Manifold& m, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q);
double dist(const Manifold& m, const Eigen::VectorXd& p, const Eigen::VectorXd& q);
Eigen::VectorXd transport(const Manifold& m, const Eigen::VectorXd& p,
                          const Eigen::VectorXd& q, const Eigen::VectorXd& v);
Eigen::VectorXd curvature(const Manifold& m, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const Eigen::VectorXd& z);
Eigen::VectorXd project(const Manifold& m, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& a);

}  // namespace geom

/// Random samples for property tests.
Eigen::VectorXd random_point(const Manifold& m, std::mt19937_64& rng,
                             double spread = 1.0);
Eigen::VectorXd random_tangent(const Manifold& m, const Eigen::VectorXd& p,
                               std::mt19937_64& rng, double scale = 1.0);

}  // namespace rspline
