#pragma once

// Closed-form geometry of the three supported backends, written once over a
// generic scalar so the solver can differentiate through it with dual numbers.
// All functions work on ambient (embedding) coordinates:
//   euclidean  R^n          ambient R^n,      Euclidean inner product
//   sphere     S^n          ambient R^{n+1},  Euclidean inner product
//   hyperbolic H^n          ambient R^{n+1},  Minkowski form (-,+,...,+)
// Nothing here checks domains; the typed layer in manifold.hpp does that.

#include <Eigen/Core>

#include <cmath>

namespace rspline {

enum class ManifoldKind { euclidean, sphere, hyperbolic };

namespace kernels {

template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using std::acos;
using std::cos;
using std::cosh;
using std::log;
using std::sin;
using std::sinh;
using std::sqrt;

template <class T>
T metric(ManifoldKind kind, const Vec<T>& a, const Vec<T>& b) {
    if (kind == ManifoldKind::hyperbolic) {
        return -a(0) * b(0) + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
    }
    return a.dot(b);
}

// cos(θ) and sin(θ)/θ as functions of θ², smooth at θ² = 0.
template <class T>
void cos_sinc(const T& theta_sq, T& c, T& s) {
    if (theta_sq < 1e-6) {
        c = T(1.0) - theta_sq / 2.0 + theta_sq * theta_sq / 24.0 -
            theta_sq * theta_sq * theta_sq / 720.0;
        s = T(1.0) - theta_sq / 6.0 + theta_sq * theta_sq / 120.0 -
            theta_sq * theta_sq * theta_sq / 5040.0;
        return;
    }
    const T theta = sqrt(theta_sq);
    c = cos(theta);
    s = sin(theta) / theta;
}

// cosh(θ) and sinh(θ)/θ as functions of θ².
template <class T>
void cosh_sinhc(const T& theta_sq, T& c, T& s) {
    if (theta_sq < 1e-6) {
        c = T(1.0) + theta_sq / 2.0 + theta_sq * theta_sq / 24.0 +
            theta_sq * theta_sq * theta_sq / 720.0;
        s = T(1.0) + theta_sq / 6.0 + theta_sq * theta_sq / 120.0 +
            theta_sq * theta_sq * theta_sq / 5040.0;
        return;
    }
    const T theta = sqrt(theta_sq);
    c = cosh(theta);
    s = sinh(theta) / theta;
}

// acos(c)/sqrt(1-c²), smooth at c = 1.
template <class T>
T acos_ratio(const T& c) {
    const T u = T(1.0) - c;
    if (u < 1e-4) {
        return T(1.0) + u / 3.0 + 2.0 * u * u / 15.0 + 2.0 * u * u * u / 35.0 +
               8.0 * u * u * u * u / 315.0;
    }
    return acos(c) / sqrt(T(1.0) - c * c);
}

// acosh(c)/sqrt(c²-1), smooth at c = 1.
template <class T>
T acosh_ratio(const T& c) {
    const T u = c - T(1.0);
    if (u < 1e-4) {
        return T(1.0) - u / 3.0 + 2.0 * u * u / 15.0 - 2.0 * u * u * u / 35.0 +
               8.0 * u * u * u * u / 315.0;
    }
    const T root = sqrt(c * c - T(1.0));
    return log(c + root) / root;
}

/// Pulls an ambient point back onto the manifold.
template <class T>
Vec<T> normalize_point(ManifoldKind kind, const Vec<T>& x) {
    switch (kind) {
        case ManifoldKind::sphere:
            return x / sqrt(x.squaredNorm());
        case ManifoldKind::hyperbolic: {
            Vec<T> y = x / sqrt(-metric(kind, x, x));
            if (y(0) < 0.0) y = -y;
            return y;
        }
        case ManifoldKind::euclidean:
            break;
    }
    return x;
}

template <class T>
Vec<T> project_tangent(ManifoldKind kind, const Vec<T>& p, const Vec<T>& a) {
    switch (kind) {
        case ManifoldKind::sphere:
            return a - p.dot(a) * p;
        case ManifoldKind::hyperbolic:
            return a + metric(kind, p, a) * p;
        case ManifoldKind::euclidean:
            break;
    }
    return a;
}

template <class T>
Vec<T> exp_map(ManifoldKind kind, const Vec<T>& p, const Vec<T>& v) {
    switch (kind) {
        case ManifoldKind::sphere: {
            T c, s;
            cos_sinc<T>(v.squaredNorm(), c, s);
            return normalize_point<T>(kind, c * p + s * v);
        }
        case ManifoldKind::hyperbolic: {
            T c, s;
            cosh_sinhc<T>(metric(kind, v, v), c, s);
            return normalize_point<T>(kind, c * p + s * v);
        }
        case ManifoldKind::euclidean:
            break;
    }
    return p + v;
}

template <class T>
Vec<T> log_map(ManifoldKind kind, const Vec<T>& p, const Vec<T>& q) {
    switch (kind) {
        case ManifoldKind::sphere: {
            T c = p.dot(q);
            if (c > 1.0) c = T(1.0);
            return acos_ratio(c) * (q - c * p);
        }
        case ManifoldKind::hyperbolic: {
            T c = -metric(kind, p, q);
            if (c < 1.0) c = T(1.0);
            return acosh_ratio(c) * (q - c * p);
        }
        case ManifoldKind::euclidean:
            break;
    }
    return q - p;
}

/// Parallel transport of v ∈ T_p along the minimizing geodesic to q.
template <class T>
Vec<T> transport(ManifoldKind kind, const Vec<T>& p, const Vec<T>& q,
                 const Vec<T>& v) {
    switch (kind) {
        case ManifoldKind::sphere:
            return v - (q.dot(v) / (T(1.0) + p.dot(q))) * (p + q);
        case ManifoldKind::hyperbolic:
            return v + (metric(kind, q, v) / (T(1.0) - metric(kind, p, q))) *
                           (p + q);
        case ManifoldKind::euclidean:
            break;
    }
    return v;
}

/// Coordinates of a tangent vector r ∈ T_p in which the metric becomes the
/// Euclidean dot product. Sphere and Euclidean use the ambient vector itself;
/// the hyperboloid boosts r back to the tangent space at the origin.
template <class T>
Vec<T> isometric_coords(ManifoldKind kind, const Vec<T>& p, const Vec<T>& r) {
    if (kind != ManifoldKind::hyperbolic) return r;
    const Eigen::Index n = p.size() - 1;
    const Vec<T> ps = p.tail(n);
    const Vec<T> rs = r.tail(n);
    return rs + ps * (ps.dot(rs) / (T(1.0) + p(0))) - r(0) * ps;
}

}  // namespace kernels
}  // namespace rspline
