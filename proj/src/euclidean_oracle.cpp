#include "rspline/euclidean_oracle.hpp"

#include "rspline/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace rspline::oracle {

double bspline_basis(double t) {
    const double a = std::abs(t);
    if (a <= 1.0) return (3.0 * a * a * a - 6.0 * a * a + 4.0) / 6.0;
    if (a <= 2.0) return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
    return 0.0;
}

double bspline_basis_d1(double t) {
    const double a = std::abs(t);
    const double sign = t < 0.0 ? -1.0 : 1.0;
    if (a <= 1.0) return sign * (9.0 * a * a - 12.0 * a) / 6.0;
    if (a <= 2.0) return -sign * (2.0 - a) * (2.0 - a) / 2.0;
    return 0.0;
}

double bspline_basis_d2(double t) {
    const double a = std::abs(t);
    if (a <= 1.0) return 3.0 * a - 2.0;
    if (a <= 2.0) return 2.0 - a;
    return 0.0;
}

Eigen::MatrixXd system_matrix(std::size_t intervals) {
    const auto n = static_cast<Eigen::Index>(intervals + 3);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a(0, 0) = 0.5;
    a(0, 1) = 1.0;
    for (Eigen::Index r = 1; r + 1 < n; ++r) {
        a(r, r - 1) = 1.0;
        a(r, r) = 4.0;
        a(r, r + 1) = 1.0;
    }
    a(n - 1, n - 2) = 1.0;
    a(n - 1, n - 1) = 0.5;
    return a / 6.0;
}

BSplineCoefficients euclidean_cubic_spline(const std::vector<Eigen::VectorXd>& knots,
                                           const Eigen::VectorXd& v0,
                                           const Eigen::VectorXd& v1, double h) {
    if (knots.size() < 2) throw ConfigError("euclidean_cubic_spline: need N >= 1");
    const std::size_t n = knots.size() + 2;
    // Tridiagonal rows (lower, diag, upper), already multiplied by 6.
    std::vector<double> lower(n, 1.0), diag(n, 4.0), upper(n, 1.0);
    diag.front() = diag.back() = 0.5;
    lower.front() = 0.0;
    upper.back() = 0.0;
    std::vector<Eigen::VectorXd> rhs(n);
    rhs.front() = 6.0 * (knots.front() / 4.0 - v0 * h / 12.0);
    for (std::size_t i = 0; i < knots.size(); ++i) rhs[i + 1] = 6.0 * knots[i];
    rhs.back() = 6.0 * (knots.back() / 4.0 + v1 * h / 12.0);

    // Thomas elimination; no pivoting needed since rows 2..n-1 are strictly
    // dominant and the end rows are reduced against them first.
    for (std::size_t r = 1; r < n; ++r) {
        const double f = lower[r] / diag[r - 1];
        diag[r] -= f * upper[r - 1];
        rhs[r] -= f * rhs[r - 1];
    }
    BSplineCoefficients s;
    s.h = h;
    s.control.resize(n);
    s.control[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t r = n - 1; r-- > 0;) {
        s.control[r] = (rhs[r] - upper[r] * s.control[r + 1]) / diag[r];
    }
    return s;
}

Eigen::VectorXd evaluate(const BSplineCoefficients& s, double t, int order) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("evaluate: t outside [0,1]");
    const auto intervals = static_cast<long>(s.intervals());
    const double u = t / s.h;
    const long i = std::clamp(static_cast<long>(std::floor(u)), 0L, intervals - 1);
    const double scale = order == 0 ? 1.0 : order == 1 ? 1.0 / s.h : 1.0 / (s.h * s.h);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(s.control.front().size());
    for (long j = i - 1; j <= i + 2; ++j) {
        const double arg = u - static_cast<double>(j);
        const double b = order == 0   ? bspline_basis(arg)
                         : order == 1 ? bspline_basis_d1(arg)
                                      : bspline_basis_d2(arg);
        out += b * s.control[static_cast<std::size_t>(j + 1)];
    }
    return scale * out;
}

double galerkin_check(const BSplineCoefficients& s,
                      const std::function<Eigen::VectorXd(double)>& gamma_dd,
                      const std::vector<Eigen::VectorXd>& w_knots) {
    if (w_knots.size() != s.intervals() + 1) {
        throw ContractError("galerkin_check: need one test-field value per knot");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < s.intervals(); ++i) {
        const double a = static_cast<double>(i) * s.h;
        const double b = static_cast<double>(i + 1) * s.h;
        auto integrand = [&](double t) {
            const double lam = (t - a) / s.h;
            const Eigen::VectorXd w = (1.0 - lam) * w_knots[i] + lam * w_knots[i + 1];
            return w.dot(evaluate(s, std::clamp(t, a, b), 2) - gamma_dd(t));
        };
        total += boost::math::quadrature::gauss<double, 10>::integrate(integrand, a, b);
    }
    return total;
}

}  // namespace rspline::oracle
