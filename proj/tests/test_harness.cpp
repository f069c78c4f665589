#include "rspline/harness.hpp"
#include "rspline/manifold.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace rspline;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

constexpr double pi = std::numbers::pi;

const std::vector<double> ladder = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};

std::vector<double> model(const std::vector<double>& h, const std::function<double(double)>& f) {
    std::vector<double> e;
    for (double x : h) e.push_back(f(x));
    return e;
}

const DiagnosticCheck& find(const std::vector<DiagnosticCheck>& d, const std::string& name) {
    for (const auto& c : d) {
        if (c.name == name) return c;
    }
    FAIL("missing diagnostic " << name);
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("fit_order on model data") {
    CHECK(std::abs(fit_order(ladder, model(ladder, [](double h) { return 3.0 * std::pow(h, 4); })).order - 4.0) <
          1e-12);
    CHECK(std::abs(fit_order(ladder, model(ladder, [](double h) { return h * h; })).order - 2.0) < 1e-12);
    const double mixed = fit_order(ladder, model(ladder, [](double h) { return std::pow(h, 4) + std::pow(h, 6); })).order;
    CHECK(mixed > 4.0);
    CHECK(mixed < 4.3);

    const auto e = model(ladder, [](double h) { return std::exp(-1.0 / h) + h * h * h; });
    auto scaled = e;
    for (auto& x : scaled) x *= 1234.5;
    CHECK(std::abs(fit_order(ladder, e).order - fit_order(ladder, scaled).order) < 1e-12);

    const auto fit = fit_order(ladder, model(ladder, [](double h) { return h * h; }));
    REQUIRE(fit.ratios.size() == 3);
    for (double r : fit.ratios) CHECK(r == doctest::Approx(2.0));

    CHECK_THROWS_AS(fit_order({0.5, 0.25}, {1.0, 0.25}), ContractError);
    CHECK_THROWS_AS(fit_order(ladder, {1.0, 0.0, -1.0, 0.1}), ContractError);
    // Nonpositive rows are dropped, the rest still fit.
    CHECK(std::abs(fit_order({0.5, 0.25, 0.125, 0.0625}, {0.25, 0.0, 1.0 / 64, 1.0 / 256}).order - 2.0) < 1e-12);
}

TEST_CASE("builtin curves") {
    CHECK(builtin_curve_names().size() == 4);
    for (const auto& name : builtin_curve_names()) {
        const TestCurve c = builtin_curve(name);
        CAPTURE(name);
        CHECK(c.name == name);
        const Manifold& m = c.manifold;
        for (int k = 0; k < 1000; ++k) {
            const double t = k / 999.0;
            const VectorXd x = c.point(t);
            CHECK(constraint_error(m, x) <= 1e-12);
            CHECK(tangency_error(m, x, c.velocity(t)) <= 1e-12);
        }
        for (double t : {0.1, 0.37, 0.5, 0.93}) {
            const double e = 1e-5;
            const VectorXd fd = (c.point(t + e) - c.point(t - e)) / (2 * e);
            CHECK((fd - c.velocity(t)).lpNorm<Eigen::Infinity>() < 1e-8);
            const double e2 = 1e-4;
            const VectorXd dd = (c.point(t + e2) - 2 * c.point(t) + c.point(t - e2)) / (e2 * e2);
            CHECK((geom::project(m, c.point(t), dd) - c.accel(t)).lpNorm<Eigen::Infinity>() < 1e-5);
        }
    }
    const TestCurve gc = builtin_curve("sphere-greatcircle");
    CHECK((gc.point(0) - Vector3d(1, 0, 0)).norm() == 0.0);
    CHECK((gc.velocity(0) - Vector3d(0, pi / 2, 0)).norm() < 1e-15);
    const TestCurve es = builtin_curve("euclidean-sine");
    CHECK(es.point(0.3)(0) == 0.3);
    CHECK(es.point(0.3)(1) == std::sin(2 * pi * 0.3));
    CHECK_THROWS_AS(builtin_curve("torus-knot"), ConfigError);
}

TEST_CASE("methods parse") {
    CHECK(parse_method("linear") == Method::linear);
    CHECK(to_string(parse_method("cubic")) == "cubic");
    CHECK_THROWS_AS(parse_method("quintic"), ConfigError);
}

TEST_CASE("linear study on the wobble is second order") {
    const auto r = run_study(builtin_curve("sphere-wobble"), Method::linear,
                             {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, {kInfinity}, {});
    REQUIRE(r.fits[0].has_value());
    CHECK(r.fits[0]->order >= 1.8);
    CHECK(r.fits[0]->order <= 2.2);
    for (double q : r.fits[0]->ratios) {
        CHECK(q > 1.7);
        CHECK(q < 2.3);
    }
    CHECK(!r.degraded);
    CHECK(r.diagnostics_pass());
}

TEST_CASE("cubic study on the euclidean sine agrees with the oracle") {
    const auto r = run_study(builtin_curve("euclidean-sine"), Method::cubic, ladder, {2.0, kInfinity}, {});
    for (const auto& row : r.rows) {
        CAPTURE(row.h);
        REQUIRE(row.ok);
        CHECK(row.oracle_gap <= 1e-8);
        CHECK(find(row.diagnostics, "d_accel_excess").pass);
    }
    CHECK(r.passed());
}

TEST_CASE("cubic study on a great circle is exact") {
    const auto r = run_study(builtin_curve("sphere-greatcircle"), Method::cubic, ladder, {2.0, kInfinity}, {});
    for (const auto& row : r.rows) {
        REQUIRE(row.ok);
        for (double e : row.errors) CHECK(e <= 1e-10);
        const auto& c = find(row.diagnostics, "c_energy");
        CHECK(c.lhs < 1e-12);
        CHECK(c.rhs < 1e-12);
        CHECK(c.pass);
    }
    CHECK(r.order_pass(0));
    CHECK(r.order_pass(1));
}

TEST_CASE("closeness holds strictly on the wobble") {
    const auto r = run_study(builtin_curve("sphere-wobble"), Method::cubic, {1.0 / 4, 1.0 / 8, 1.0 / 16},
                             {kInfinity}, {});
    for (const auto& row : r.rows) {
        REQUIRE(row.ok);
        const auto& b = find(row.diagnostics, "b_closeness");
        CHECK(b.lhs < b.rhs);
    }
}

TEST_CASE("report CSV does not depend on the thread count") {
    const auto curve = builtin_curve("hyperbolic-arc");
    StudyOptions one;
    one.threads = 1;
    StudyOptions many;
    many.threads = 4;
    std::ostringstream a, b;
    write_report_csv(a, {run_study(curve, Method::cubic, {1.0 / 4, 1.0 / 8, 1.0 / 16}, {2.0}, one)});
    write_report_csv(b, {run_study(curve, Method::cubic, {1.0 / 4, 1.0 / 8, 1.0 / 16}, {2.0}, many)});
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("method,manifold,curve,h,substeps,p,error,fitted_order", 0) == 0);
}

TEST_CASE("h ladder validation") {
    const auto curve = builtin_curve("euclidean-sine");
    CHECK_THROWS_AS(run_study(curve, Method::linear, {0.25, 0.5, 0.125}, {2.0}, {}), ConfigError);
    CHECK_THROWS_AS(run_study(curve, Method::linear, {0.25, 0.2, 0.125}, {2.0}, {}), ConfigError);
}

TEST_CASE("log derivative defect on the sphere") {
    const Manifold s2 = Manifold::parse("sphere:2");
    const VectorXd p = Vector3d(0, 0, 1);
    for (double d : {0.1, 0.4, 0.8, 1.2}) {
        const VectorXd q = Vector3d(std::sin(d), 0, std::cos(d));
        const double defect = log_derivative_defect(s2, p, q);
        CAPTURE(d);
        // Along the geodesic the derivative is exactly −1; across it −d·cot d.
        CHECK(defect == doctest::Approx(1.0 - d / std::tan(d)).epsilon(1e-6));
        CHECK(defect <= 0.5 * d * d);
    }
    const Manifold r2 = Manifold::parse("euclidean:2");
    CHECK(log_derivative_defect(r2, Eigen::Vector2d(1, 2), Eigen::Vector2d(-3, 0.5)) < 1e-9);
}
