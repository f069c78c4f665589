#include "rspline/harness.hpp"
#include "rspline/jacobi.hpp"
#include "rspline/manifold.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace rspline;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

const Manifold sphere2 = Manifold::parse("sphere:2");

// Equator traversed with constant speed `s`.
DiscreteCurve equator(double s, std::size_t n, std::size_t substeps) {
    return DiscreteCurve::sampled(sphere2, n, substeps, [s](double t) {
        return VectorXd(Vector3d(std::cos(s * t), std::sin(s * t), 0.0));
    });
}

Vector3d equator_dir(double s, double t) { return Vector3d(-std::sin(s * t), std::cos(s * t), 0.0); }

KnotValues sample_knots(const DiscreteCurve& c, const std::function<VectorXd(double)>& w) {
    KnotValues kv;
    for (std::size_t k : c.knot_indices()) kv.values.push_back(w(c.times()[k]));
    return kv;
}

double max_gap(const DiscreteCurve& c, const VectorFieldAlongCurve& f,
               const std::function<VectorXd(double)>& w) {
    double e = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        e = std::max(e, (f.vectors[k] - w(c.times()[k])).lpNorm<Eigen::Infinity>());
    }
    return e;
}

}  // namespace

TEST_CASE("euclidean reduction is piecewise linear") {
    const Manifold r3 = Manifold::parse("euclidean:3");
    const auto c = DiscreteCurve::sampled(r3, 4, 16, [](double t) {
        return VectorXd(Vector3d(t, t * t, std::sin(4 * t)));
    });
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    KnotValues kv;
    for (int i = 0; i <= 4; ++i) kv.values.push_back(Vector3d(g(rng), g(rng), g(rng)));
    const auto w = jacobi_interpolate(c, kv);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double s = c.times()[k] * 4.0;
        const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(s));
        const VectorXd lin = kv.values[i] + (s - static_cast<double>(i)) * (kv.values[i + 1] - kv.values[i]);
        CHECK((w.vectors[k] - lin).lpNorm<Eigen::Infinity>() < 1e-12);
    }
    CHECK(jacobi_residual(c, w) < 1e-9);
}

TEST_CASE("sine boundary value problem on the equator") {
    const double a = 0.7;
    const auto c = equator(1.0, 1, 1000);
    const VectorXd zero = Vector3d::Zero();
    const auto w = jacobi_interpolate(c, {{zero, VectorXd(Vector3d(0, 0, a))}});
    const auto exact = [&](double t) { return VectorXd(Vector3d(0, 0, a * std::sin(t) / std::sin(1.0))); };
    CHECK(max_gap(c, w, exact) < 1e-6);
    CHECK(jacobi_residual(c, w) <= 1e-8);
}

TEST_CASE("zero data gives the zero field") {
    const auto c = equator(1.3, 4, 32);
    KnotValues kv{std::vector<VectorXd>(5, Vector3d::Zero())};
    const auto w = jacobi_interpolate(c, kv);
    for (const auto& v : w.vectors) CHECK(v.norm() == 0.0);
}

TEST_CASE("knot values are interpolated exactly and the operator is linear") {
    const auto curve = builtin_curve("sphere-wobble");
    const auto c = DiscreteCurve::sampled(curve.manifold, 4, 32, curve.point);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    const auto random_kv = [&] {
        KnotValues kv;
        for (std::size_t k : c.knot_indices()) {
            kv.values.push_back(geom::project(sphere2, c.point(k), Vector3d(g(rng), g(rng), g(rng))));
        }
        return kv;
    };
    const KnotValues u = random_kv(), v = random_kv();
    const double a = 1.7, b = -0.4;
    KnotValues mix;
    for (std::size_t i = 0; i < u.values.size(); ++i) mix.values.push_back(a * u.values[i] + b * v.values[i]);
    const auto lu = jacobi_interpolate(c, u);
    const auto lv = jacobi_interpolate(c, v);
    const auto lm = jacobi_interpolate(c, mix);
    double gap = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        gap = std::max(gap, (lm.vectors[k] - a * lu.vectors[k] - b * lv.vectors[k]).lpNorm<Eigen::Infinity>());
    }
    CHECK(gap <= 1e-12);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        CHECK(lu.vectors[c.knot_indices()[i]] == u.values[i]);
    }
}

TEST_CASE("bounded by twice the knot data") {
    const auto stats = interp_trials(sphere2, 99, 100);
    CHECK(stats.linearity_error <= 1e-12);
    CHECK(stats.stability_margin <= 1e-6);
}

TEST_CASE("Jacobi fields are reproduced to second order") {
    const double s = 1.5;
    // Normal part solves w″ + s²w = 0, tangential part w″ = 0.
    const auto field = [s](double t) {
        return VectorXd(Vector3d(0, 0, std::cos(s * t) + 2 * std::sin(s * t)) + (1 + t) * equator_dir(s, t));
    };
    double prev = 0.0;
    for (std::size_t m : {16, 32, 64}) {
        const auto c = equator(s, 4, m);
        const double e = max_gap(c, jacobi_interpolate(c, sample_knots(c, field)), field);
        CAPTURE(m);
        CHECK(e < 1e-3);
        if (prev > 0.0) {
            CHECK(prev / e > 3.5);
            CHECK(prev / e < 4.5);
        }
        prev = e;
    }
}

TEST_CASE("coincident knots") {
    const auto c = DiscreteCurve::sampled(sphere2, 2, 8, [](double) { return VectorXd(Vector3d(0, 0, 1)); });
    const VectorXd v = Vector3d(0.3, -0.2, 0);
    const auto w = jacobi_interpolate(c, {{v, v, v}});
    for (const auto& x : w.vectors) CHECK((x - v).norm() < 1e-15);
}

TEST_CASE("input errors") {
    const auto c = equator(1.0, 2, 16);
    CHECK_THROWS_AS(jacobi_interpolate(c, {{Vector3d::Zero(), Vector3d::Zero()}}), ContractError);
    CHECK_THROWS_AS(jacobi_interpolate(c, {{Vector3d(1, 0, 0), Vector3d::Zero(), Vector3d::Zero()}}),
                    ContractError);
    // One interval spanning more than half a great circle: the BVP is singular.
    const auto wide = equator(3.3, 1, 200);
    CHECK_THROWS_AS(jacobi_interpolate(wide, {{Vector3d(0, 0, 1), Vector3d(0, 0, 1)}}), DomainError);
}
