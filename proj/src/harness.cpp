#include "rspline/harness.hpp"

#include "rspline/errors.hpp"
#include "rspline/euclidean_oracle.hpp"
#include "rspline/jacobi.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <ostream>
#include <sstream>
#include <thread>

namespace rspline {

using Eigen::VectorXd;

std::string to_string(Method m) { return m == Method::linear ? "linear" : "cubic"; }

Method parse_method(const std::string& s) {
    if (s == "linear") return Method::linear;
    if (s == "cubic") return Method::cubic;
    throw ConfigError("unknown method '" + s + "' (expected linear or cubic)");
}

OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& errors) {
    if (h.size() != errors.size()) throw ContractError("fit_order: size mismatch");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] > 0.0 && errors[i] > 0.0 && std::isfinite(errors[i])) {
            x.push_back(std::log(h[i]));
            y.push_back(std::log(errors[i]));
        }
    }
    if (x.size() < 3) throw ContractError("fit_order: need at least three usable rows");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    OrderFit fit;
    fit.order = sxy / sxx;
    for (std::size_t i = 1; i < x.size(); ++i) {
        fit.ratios.push_back((y[i - 1] - y[i]) / (x[i - 1] - x[i]));
    }
    return fit;
}

bool ConvergenceReport::order_pass(std::size_t p_index) const {
    bool exact = true;
    for (const StudyRow& r : rows) {
        if (r.ok && !(r.errors[p_index] <= 1e-9)) exact = false;
    }
    if (exact) return true;
    const auto& fit = fits[p_index];
    return fit.has_value() && std::abs(fit->order - expected_order()) <= 0.4;
}

bool ConvergenceReport::diagnostics_pass() const {
    for (const StudyRow& r : rows) {
        if (!r.ok) continue;
        for (const DiagnosticCheck& d : r.diagnostics) {
            if (!d.pass) return false;
        }
        if (!std::isnan(r.oracle_gap) && !(r.oracle_gap <= 1e-8)) return false;
    }
    return true;
}

bool ConvergenceReport::passed() const {
    if (degraded) return false;
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        if (!order_pass(i)) return false;
    }
    return diagnostics_pass();
}

InterpolationProblem sample_problem(const TestCurve& curve, std::size_t intervals,
                                    std::size_t substeps) {
    InterpolationProblem prob{curve.manifold, {}, std::nullopt, std::nullopt, substeps};
    for (std::size_t i = 0; i <= intervals; ++i) {
        prob.knot_points.push_back(
            curve.point(static_cast<double>(i) / static_cast<double>(intervals)));
    }
    prob.v_start = curve.velocity(0.0);
    prob.v_end = curve.velocity(1.0);
    return prob;
}

DiscreteCurve sample_on_grid(const TestCurve& curve, const DiscreteCurve& like) {
    std::vector<VectorXd> points;
    points.reserve(like.size());
    for (double t : like.times()) points.push_back(curve.point(t));
    return {curve.manifold, like.times(), std::move(points), like.knot_indices()};
}

std::pair<double, double> log_field_norms(const DiscreteCurve& c, const DiscreteCurve& target) {
    const Manifold& m = c.manifold();
    std::vector<VectorXd> f(c.size());
    double value = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        f[k] = geom::log(m, c.point(k), target.point(k));
        value = std::max(value, geom::norm(m, f[k]));
    }
    double second = 0.0;
    for (std::size_t i = 0; i < c.intervals(); ++i) {
        const auto [a, b] = c.interval(i);
        const double d2 = c.spacing(i) * c.spacing(i);
        for (std::size_t k = a + 1; k < b; ++k) {
            const VectorXd s = (geom::transport(m, c.point(k + 1), c.point(k), f[k + 1]) -
                                2.0 * f[k] +
                                geom::transport(m, c.point(k - 1), c.point(k), f[k - 1])) /
                               d2;
            second = std::max(second, geom::norm(m, s));
        }
    }
    return {value, second};
}

double log_derivative_defect(const Manifold& m, const VectorXd& p, const VectorXd& q,
                             double eps) {
    const Eigen::MatrixXd basis = tangent_basis(m, p);
    const Eigen::Index n = basis.cols();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const VectorXd e = basis.col(j);
        const VectorXd plus = geom::exp(m, p, eps * e), minus = geom::exp(m, p, -eps * e);
        const VectorXd diff = (geom::transport(m, plus, p, geom::log(m, plus, q)) -
                               geom::transport(m, minus, p, geom::log(m, minus, q))) /
                              (2.0 * eps);
        for (Eigen::Index i = 0; i < n; ++i) d(i, j) = geom::inner(m, basis.col(i), diff);
    }
    d += Eigen::MatrixXd::Identity(n, n);
    return Eigen::JacobiSVD<Eigen::MatrixXd>(d).singularValues()(0);
}

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& g) {
    double s = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (g[k] + g[k - 1]);
    return s;
}

}  // namespace

std::vector<DiagnosticCheck> diagnostics(const TestCurve& curve, Method method,
                                         const DiscreteCurve& spline,
                                         const std::vector<VectorXd>* velocities, double h) {
    const Manifold& m = spline.manifold();
    const auto& times = spline.times();
    const DiscreteCurve truth = sample_on_grid(curve, spline);

    double speed_max = 0.0, accel_max = 0.0;
    std::vector<double> accel_sq(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        speed_max = std::max(speed_max, geom::norm(m, curve.velocity(times[k])));
        const double a = geom::norm(m, curve.accel(times[k]));
        accel_max = std::max(accel_max, a);
        accel_sq[k] = a * a;
    }
    const double accel_l2 = std::sqrt(trapezoid(times, accel_sq));

    std::vector<DiagnosticCheck> out;

    {
        double vmax = 0.0;
        if (velocities != nullptr) {
            for (std::size_t k = 0; k < spline.size(); ++k) {
                vmax = std::max(vmax, geom::norm(m, (*velocities)[k]));
            }
        } else {
            vmax = inf_norm(spline, velocity(spline));
        }
        const double rhs = geom::norm(m, curve.velocity(0.0)) + 2.0 * accel_l2 + 1e-8;
        out.push_back({"a_velocity", vmax, rhs, vmax <= rhs});
    }
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < spline.intervals(); ++i) {
            const auto [a, b] = spline.interval(i);
            for (std::size_t k = a + 1; k <= b; ++k) {
                const double d = geom::dist(m, spline.point(k), truth.point(a));
                worst = std::max(worst, d / (times[k] - times[a]));
            }
        }
        // Geodesic pieces attain equality, so allow rounding on top.
        out.push_back({"b_closeness", worst, speed_max, worst <= speed_max * (1.0 + 1e-12)});
    }
    {
        double lhs = 0.0, rhs = 0.0;
        if (method == Method::cubic && velocities != nullptr) {
            lhs = hermite_energy(HermiteCurve{spline, *velocities});
            std::vector<VectorXd> tv;
            tv.reserve(times.size());
            for (double t : times) tv.push_back(curve.velocity(t));
            rhs = hermite_energy(HermiteCurve{truth, std::move(tv)});
        } else {
            lhs = path_energy(spline);
            rhs = path_energy(truth);
        }
        out.push_back({"c_energy", lhs, rhs, lhs <= rhs + 1e-10 * (1.0 + rhs)});
    }
    {
        const double excess = (inf_norm(spline, accel(spline)) - 3.0 * accel_max) / std::pow(h, 1.5);
        // Bound finalized across the ladder by run_study.
        out.push_back({"d_accel_excess", excess, std::numeric_limits<double>::infinity(), true});
    }
    {
        const auto [value, second] = log_field_norms(spline, truth);
        const double ratio = value <= 1e-13 ? 0.0 : value / (h * h * second);
        out.push_back({"e_approx_ratio", ratio, 0.13, ratio <= 0.13});
    }
    {
        KnotValues kv;
        double vmax = 0.0;
        for (std::size_t i = 0; i <= spline.intervals(); ++i) {
            const std::size_t k = spline.knot_indices()[i];
            kv.values.push_back(geom::project(m, spline.point(k), curve.accel(times[k])));
            vmax = std::max(vmax, geom::norm(m, kv.values.back()));
        }
        const double lhs = inf_norm(spline, jacobi_interpolate(spline, kv));
        const double rhs = 2.0 * vmax + 1e-6;
        out.push_back({"f_interp_stability", lhs, rhs, lhs <= rhs});
    }
    return out;
}

namespace {

std::size_t intervals_for(double h) {
    const double n = std::round(1.0 / h);
    const auto in = static_cast<std::size_t>(n);
    if (!(h > 0.0) || std::abs(n * h - 1.0) > 1e-12 || in == 0 || (in & (in - 1)) != 0) {
        throw ConfigError("h ladder entries must be 1/N with N a power of two");
    }
    return in;
}

StudyRow run_row(const TestCurve& curve, Method method, double h,
                 const std::vector<double>& p_list, const StudyOptions& opts) {
    StudyRow row;
    row.h = h;
    const std::size_t n = intervals_for(h);
    row.substeps = opts.substeps.value_or(default_substeps(h));
    try {
        const InterpolationProblem prob = sample_problem(curve, n, row.substeps);
        std::optional<DiscreteCurve> spline;
        std::vector<VectorXd> vel;
        if (method == Method::cubic) {
            CubicSolution sol = cubic_spline(prob, opts.solver);
            row.stats = sol.stats;
            vel = std::move(sol.velocities.vectors);
            spline.emplace(std::move(sol.curve));
            if (curve.manifold.kind() == ManifoldKind::euclidean) {
                const auto ref = oracle::euclidean_cubic_spline(prob.knot_points, *prob.v_start,
                                                                *prob.v_end, prob.h());
                double gap = 0.0;
                for (std::size_t k = 0; k < spline->size(); ++k) {
                    gap = std::max(gap, (spline->point(k) -
                                         oracle::evaluate(ref, spline->times()[k]))
                                            .lpNorm<Eigen::Infinity>());
                }
                row.oracle_gap = gap;
            }
        } else {
            spline.emplace(linear_spline(prob));
            row.stats.converged = true;
            row.stats.final_energy = path_energy(*spline);
        }
        const DiscreteCurve truth = sample_on_grid(curve, *spline);
        for (double p : p_list) row.errors.push_back(lp_error(*spline, truth, p));
        row.diagnostics = diagnostics(curve, method, *spline,
                                      method == Method::cubic ? &vel : nullptr, h);
        row.ok = true;
    } catch (const SolverError& e) {
        row.stats = e.stats();
        row.failure = e.what();
    } catch (const DomainError& e) {
        row.failure = e.what();
    }
    if (!row.ok) {
        row.errors.assign(p_list.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return row;
}

}  // namespace

ConvergenceReport run_study(const TestCurve& curve, Method method,
                            const std::vector<double>& h_list,
                            const std::vector<double>& p_list, const StudyOptions& opts) {
    if (h_list.empty()) throw ConfigError("h ladder is empty");
    if (p_list.empty()) throw ConfigError("p list is empty");
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        intervals_for(h_list[i]);
        if (i > 0 && !(h_list[i] < h_list[i - 1])) {
            throw ConfigError("h ladder must be strictly decreasing");
        }
    }
    for (double p : p_list) {
        if (!(p >= 1.0)) throw ConfigError("p values must be >= 1 or inf");
    }

    ConvergenceReport report;
    report.method = method;
    report.manifold = curve.manifold.id();
    report.curve = curve.name;
    report.p_values = p_list;
    report.rows.resize(h_list.size());

    unsigned threads = opts.threads != 0 ? opts.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, threads);
    for (std::size_t first = 0; first < h_list.size(); first += threads) {
        const std::size_t last = std::min(h_list.size(), first + threads);
        std::vector<std::future<StudyRow>> jobs;
        for (std::size_t i = first; i < last; ++i) {
            jobs.push_back(std::async(std::launch::async, run_row, std::cref(curve), method,
                                      h_list[i], std::cref(p_list), std::cref(opts)));
        }
        for (std::size_t i = first; i < last; ++i) report.rows[i] = jobs[i - first].get();
    }

    // (d) is bounded across the ladder relative to the coarsest solved row.
    std::optional<double> reference;
    for (StudyRow& r : report.rows) {
        if (!r.ok) {
            report.degraded = true;
            continue;
        }
        for (DiagnosticCheck& d : r.diagnostics) {
            if (d.name != "d_accel_excess") continue;
            if (!reference) reference = d.lhs;
            d.rhs = 2.0 * std::max(*reference, 0.0) + 1e-6 / std::pow(r.h, 1.5);
            d.pass = d.lhs <= d.rhs;
        }
    }

    for (std::size_t j = 0; j < p_list.size(); ++j) {
        std::vector<double> hs, es;
        for (const StudyRow& r : report.rows) {
            if (!r.ok) continue;
            hs.push_back(r.h);
            es.push_back(r.errors[j]);
        }
        try {
            report.fits.emplace_back(fit_order(hs, es));
        } catch (const ContractError&) {
            report.fits.emplace_back(std::nullopt);
            report.degraded = true;
        }
    }
    return report;
}

InterpTrialStats interp_trials(const Manifold& m, std::uint64_t seed, std::size_t trials) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    constexpr std::size_t intervals = 4;
    InterpTrialStats out;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        InterpolationProblem prob{m, {random_point(m, rng)}, std::nullopt, std::nullopt, 64};
        for (std::size_t i = 0; i < intervals; ++i) {
            const VectorXd& p = prob.knot_points.back();
            VectorXd step = random_tangent(m, p, rng);
            step *= 0.8 * std::uniform_real_distribution<double>(0.05, 1.0)(rng) /
                    std::max(geom::norm(m, step), 1e-300);
            prob.knot_points.push_back(geom::exp(m, p, step));
        }
        const DiscreteCurve c = linear_spline(prob);
        KnotValues u, w, mix;
        double vmax = 0.0;
        const double a = coef(rng), b = coef(rng);
        for (std::size_t i = 0; i <= intervals; ++i) {
            const VectorXd& p = prob.knot_points[i];
            auto draw = [&] {
                VectorXd v = random_tangent(m, p, rng);
                const double len = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                return VectorXd(v * (len / std::max(geom::norm(m, v), 1e-300)));
            };
            u.values.push_back(draw());
            w.values.push_back(draw());
            mix.values.push_back(a * u.values.back() + b * w.values.back());
            vmax = std::max(vmax, geom::norm(m, u.values.back()));
        }
        const auto lu = jacobi_interpolate(c, u);
        const auto lw = jacobi_interpolate(c, w);
        const auto lmix = jacobi_interpolate(c, mix);
        for (std::size_t k = 0; k < c.size(); ++k) {
            const VectorXd diff = lmix.vectors[k] - a * lu.vectors[k] - b * lw.vectors[k];
            out.linearity_error = std::max(out.linearity_error, diff.norm());
        }
        const double margin = inf_norm(c, lu) - 2.0 * vmax;
        out.stability_margin = trial == 0 ? margin : std::max(out.stability_margin, margin);
    }
    return out;
}

namespace {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

const char* const kDiagnosticNames[] = {"a_velocity",     "b_closeness",    "c_energy",
                                        "d_accel_excess", "e_approx_ratio", "f_interp_stability"};

}  // namespace

void write_report_csv(std::ostream& os, const std::vector<ConvergenceReport>& reports) {
    os << "method,manifold,curve,h,substeps,p,error,fitted_order,status,iterations,"
          "final_gradient_norm,el_residual_inf,oracle_gap";
    for (const char* name : kDiagnosticNames) {
        os << ",diag_" << name << "_lhs,diag_" << name << "_rhs,diag_" << name << "_pass";
    }
    os << "\n";
    for (const ConvergenceReport& rep : reports) {
        for (const StudyRow& row : rep.rows) {
            for (std::size_t j = 0; j < rep.p_values.size(); ++j) {
                const double order = rep.fits[j] ? rep.fits[j]->order
                                                 : std::numeric_limits<double>::quiet_NaN();
                os << to_string(rep.method) << "," << rep.manifold << "," << rep.curve << ","
                   << format_number(row.h) << "," << row.substeps << ","
                   << format_number(rep.p_values[j]) << "," << format_number(row.errors[j])
                   << "," << format_number(order) << "," << (row.ok ? "ok" : "failed") << ","
                   << row.stats.iterations << "," << format_number(row.stats.final_gradient_norm)
                   << "," << format_number(row.stats.el_residual_inf) << ","
                   << format_number(row.oracle_gap);
                for (const char* name : kDiagnosticNames) {
                    const auto it = std::find_if(
                        row.diagnostics.begin(), row.diagnostics.end(),
                        [&](const DiagnosticCheck& d) { return d.name == name; });
                    if (it == row.diagnostics.end()) {
                        os << ",nan,nan,";
                    } else {
                        os << "," << format_number(it->lhs) << "," << format_number(it->rhs)
                           << "," << (it->pass ? "pass" : "fail");
                    }
                }
                os << "\n";
            }
        }
    }
}

}  // namespace rspline
