#ifndef MTFD_INVERSE_HPP
#define MTFD_INVERSE_HPP

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <vector>

#include "mtfd/asymptotics.hpp"
#include "mtfd/errors.hpp"
#include "mtfd/operator.hpp"
#include "mtfd/solvers.hpp"

namespace mtfd {

// One interior point observation u(x0, t_k).
struct Observation {
    double x0 = 0.0;
    TimeGrid times = TimeGrid::uniform(1.0, 1);
    std::vector<double> values;

    void validate(const Grid1D& grid) const {
        if (values.size() != times.times.size()) throw spec_error("Observation: size mismatch");
        if (!(x0 > grid.x_lo && x0 < grid.x_hi))
            throw spec_error("Observation: x0 must be strictly interior");
        for (double v : values)
            if (!std::isfinite(v)) throw spec_error("Observation: non-finite value");
    }
    int node_index(const Grid1D& grid) const {
        // snap to the nearest interior node
        int i = (int)std::lround((x0 - grid.x_lo) / grid.h) - 1;
        i = std::max(0, std::min(grid.n - 1, i));
        if (std::abs(grid.node(i) - x0) > 0.51 * grid.h)
            throw spec_error("Observation: x0 outside the interior node range");
        return i;
    }
};

namespace detail {

// int_T^inf c t^{-p} e^{-st} dt = c s^{p-1} Gamma(1-p, sT)
inline double power_tail_integral(double c, double p, double s, double T) {
    if (!(p > 0.0 && p < 1.0)) throw numeric_error("power_tail_integral: exponent outside (0,1)");
    return c * std::pow(s, p - 1.0) * boost::math::tgamma(1.0 - p, s * T);
}

}  // namespace detail

// Laplace transform of the observation: trapezoid on the sample grid plus the
// asymptotic power-law tail fitted on the last part of the record.  The
// tail is skipped when e^{-sT} truncation is already negligible.
inline double observation_laplace(const Observation& obs, double s) {
    if (!(s > 0.0)) throw spec_error("observation_laplace: need s > 0");
    const auto& t = obs.times.times;
    const auto& u = obs.values;
    if (u.size() != t.size() || t.size() < 2) throw spec_error("observation_laplace: bad observation");
    double quad = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k)
        quad += 0.5 * (u[k] * std::exp(-s * t[k]) + u[k + 1] * std::exp(-s * t[k + 1])) *
                (t[k + 1] - t[k]);
    double T = t.back();
    if (s * T >= 20.0) return quad;

    // log-log fit of u ~ c t^{-p} on the trailing quarter of the record
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < 0.75 * T) continue;
        if (!(u[k] > 0.0))
            throw numeric_error("observation_laplace: nonpositive tail sample, cannot fit power law");
        xs.push_back(std::log(t[k]));
        ys.push_back(std::log(u[k]));
        sx += xs.back(); sy += ys.back(); sxx += xs.back() * xs.back(); sxy += xs.back() * ys.back();
        ++m;
    }
    if (m < 4) throw numeric_error("observation_laplace: too few tail samples");
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    double icept = (sy - slope * sx) / m;
    double rss = 0.0;
    for (int k = 0; k < m; ++k) {
        double r = ys[k] - (icept + slope * xs[k]);
        rss += r * r;
    }
    if (std::sqrt(rss / m) > 0.05)
        throw numeric_error("observation_laplace: tail power-law fit residual too large");
    double p = -slope, c = std::exp(icept);
    return quad + detail::power_tail_integral(c, p, s, T);
}

// Q_1(x;s) = sum_j q_j(x)(s^{a_j} - s^{at_j}) / sum_j |s^{a_j} - s^{at_j}|.
// As s -> 0+ this tends to +/- q_{j0}(x) with j0 the largest differing index.
inline double q1_weight(const DiscreteProblem& d, const OrderSet& other, int node, double s) {
    if (!(s > 0.0 && s < 1.0)) throw spec_error("q1_weight: s must lie in (0,1)");
    if (other.ell() != d.orders.ell()) throw spec_error("q1_weight: order sets differ in length");
    if (node < 0 || node >= d.grid.n) throw spec_error("q1_weight: node out of range");
    double num = 0.0, den = 0.0;
    for (int j = 0; j < d.orders.ell(); ++j) {
        double diff = std::pow(s, d.orders.alphas[j]) - std::pow(s, other.alphas[j]);
        num += d.weights[j][node] * diff;
        den += std::abs(diff);
    }
    if (den == 0.0) throw spec_error("q1_weight: degenerate (equal order sets)");
    return num / den;
}

// largest index (0-based) at which the two order sets differ
inline int largest_differing_index(const OrderSet& a, const OrderSet& b) {
    if (a.ell() != b.ell()) throw spec_error("largest_differing_index: length mismatch");
    for (int j = a.ell() - 1; j >= 0; --j)
        if (a.alphas[j] != b.alphas[j]) return j;
    throw spec_error("largest_differing_index: degenerate (equal order sets)");
}

// w0 solving (A - b) w0 = a q_{j0}, the discriminator's limit profile.
inline Vector reference_w0(const DiscreteProblem& d, int j0) {
    if (j0 < 0 || j0 >= d.orders.ell()) throw spec_error("reference_w0: index out of range");
    return elliptic_solve(d, d.weights[j0].cwiseProduct(d.initial));
}

struct DiscriminatorTrace {
    std::vector<double> s_values;   // descending, positive
    std::vector<double> w_values;   // w(x0; s)
    std::vector<double> q1_values;  // Q_1(x0; s)
};

// Laplace-domain discriminator w(s) = s (u^_a - u^_b)(x0;s) / sum_j |s^{a_j}-s^{at_j}|
// evaluated from exact transform solves; its s->0+ limit is +/- w0(x0).
inline DiscriminatorTrace discriminator(const DiscreteProblem& d, const OrderSet& orders_b,
                                        int x0_node, const std::vector<double>& s_grid) {
    largest_differing_index(d.orders, orders_b);  // rejects degenerate pairs
    DiscreteProblem db = d;
    db.orders = orders_b;
    DiscriminatorTrace trace;
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        double s = s_grid[i];
        if (!(s > 0.0 && s < 1.0)) throw spec_error("discriminator: s must lie in (0,1)");
        if (i > 0 && !(s < s_grid[i - 1]))
            throw spec_error("discriminator: s grid must decrease");
        complex sc(s, 0.0);
        CVector ua = solve_shifted(d, sc, laplace_rhs(d, sc));
        CVector ub = solve_shifted(db, sc, laplace_rhs(db, sc));
        double den = 0.0;
        for (int j = 0; j < d.orders.ell(); ++j)
            den += std::abs(std::pow(s, d.orders.alphas[j]) - std::pow(s, orders_b.alphas[j]));
        trace.s_values.push_back(s);
        trace.w_values.push_back(s * (ua[x0_node] - ub[x0_node]).real() / den);
        trace.q1_values.push_back(q1_weight(d, orders_b, x0_node, s));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Practical order estimation from one interior observation (beyond the
// uniqueness theorem): weighted least squares with the Laplace-contour
// forward model, Nelder-Mead over a stick-breaking parameterization that
// keeps iterates strictly decreasing in (0,1).
struct EstimateOptions {
    int max_evals = 500;
    double simplex_tol = 1e-9;   // parameter-space spread
    double misfit_tol = 1e-12;   // relative misfit for the converged flag
    int threads = 1;
};

struct InversionResult {
    OrderSet orders;
    double misfit = 0.0;           // sum of squared residuals
    int evaluations = 0;
    bool converged = false;        // misfit below tolerance at the optimum
    bool fixed_sign_initial = true;  // uniqueness hypothesis: a keeps one sign
    DiscriminatorTrace trace;      // fitted vs initial orders diagnostic
};

namespace detail {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) throw spec_error("logit: argument outside (0,1)");
    return std::log(p / (1.0 - p));
}

inline OrderSet decode_orders(const std::vector<double>& theta) {
    std::vector<double> a(theta.size());
    double prev = 1.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        prev = prev * logistic(theta[j]);
        a[j] = prev;
    }
    return OrderSet(a);
}

inline std::vector<double> encode_orders(const OrderSet& o) {
    std::vector<double> theta(o.alphas.size());
    double prev = 1.0;
    for (std::size_t j = 0; j < o.alphas.size(); ++j) {
        theta[j] = logit(o.alphas[j] / prev);
        prev = o.alphas[j];
    }
    return theta;
}

// standard Nelder-Mead on R^n, deterministic
inline std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
    double step, int max_evals, double xtol, int* evals_out) {
    const int n = (int)x0.size();
    std::vector<std::vector<double>> X(n + 1, x0);
    std::vector<double> F(n + 1);
    int evals = 0;
    for (int i = 1; i <= n; ++i) X[i][i - 1] += step;
    for (int i = 0; i <= n; ++i) {
        F[i] = f(X[i]);
        ++evals;
    }
    auto order = [&] {
        for (int i = 0; i <= n; ++i)
            for (int k = i + 1; k <= n; ++k)
                if (F[k] < F[i]) {
                    std::swap(F[i], F[k]);
                    std::swap(X[i], X[k]);
                }
    };
    while (evals < max_evals) {
        order();
        double spread = 0.0;
        for (int i = 1; i <= n; ++i)
            for (int j = 0; j < n; ++j) spread = std::max(spread, std::abs(X[i][j] - X[0][j]));
        if (spread < xtol) break;
        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) centroid[j] += X[i][j] / n;
        auto blend = [&](double coef) {
            std::vector<double> y(n);
            for (int j = 0; j < n; ++j) y[j] = centroid[j] + coef * (X[n][j] - centroid[j]);
            return y;
        };
        auto xr = blend(-1.0);
        double fr = f(xr);
        ++evals;
        if (fr < F[0]) {
            auto xe = blend(-2.0);
            double fe = f(xe);
            ++evals;
            if (fe < fr) { X[n] = xe; F[n] = fe; }
            else { X[n] = xr; F[n] = fr; }
        } else if (fr < F[n - 1]) {
            X[n] = xr;
            F[n] = fr;
        } else {
            auto xc = blend(fr < F[n] ? -0.5 : 0.5);
            double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, F[n])) {
                X[n] = xc;
                F[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int j = 0; j < n; ++j) X[i][j] = 0.5 * (X[i][j] + X[0][j]);
                    F[i] = f(X[i]);
                    ++evals;
                }
            }
        }
    }
    order();
    if (evals_out) *evals_out = evals;
    return {X[0], F[0]};
}

}  // namespace detail

// forward model u(x0, t_k) for positive observation times
inline std::vector<double> model_observation(const DiscreteProblem& d, int x0_node,
                                             const std::vector<double>& times, int threads = 1) {
    ContourSpec c = ContourSpec::standard(d.orders.largest(), times.front());
    Field f = laplace_solve(d, c, TimeGrid::samples(times), threads);
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = f.values(x0_node, (int)k);
    return out;
}

inline InversionResult estimate_orders(const Observation& obs, const DiscreteProblem& d_known,
                                       int ell, const OrderSet& init,
                                       EstimateOptions opts = {}) {
    if (init.ell() != ell) throw spec_error("estimate_orders: init has wrong length");
    if ((int)d_known.weights.size() != ell)
        throw spec_error("estimate_orders: weight count must match ell");
    obs.validate(d_known.grid);
    int x0 = obs.node_index(d_known.grid);

    // strip t = 0 samples; the Laplace model needs positive times
    std::vector<double> ts, us;
    for (std::size_t k = 0; k < obs.times.times.size(); ++k) {
        if (obs.times.times[k] <= 0.0) continue;
        ts.push_back(obs.times.times[k]);
        us.push_back(obs.values[k]);
    }
    if (ts.size() < 4) throw spec_error("estimate_orders: too few positive-time samples");

    double scale = 0.0;
    for (double v : us) scale += v * v;
    if (scale == 0.0) scale = 1.0;

    DiscreteProblem d = d_known;
    auto misfit = [&](const std::vector<double>& theta) {
        d.orders = detail::decode_orders(theta);
        std::vector<double> model = model_observation(d, x0, ts, opts.threads);
        double acc = 0.0;
        for (std::size_t k = 0; k < model.size(); ++k) {
            double r = model[k] - us[k];
            acc += r * r;
        }
        return acc;
    };

    InversionResult res;
    int evals = 0;
    auto [theta_best, f_best] = detail::nelder_mead(misfit, detail::encode_orders(init), 0.25,
                                                    opts.max_evals, opts.simplex_tol, &evals);
    res.orders = detail::decode_orders(theta_best);
    res.misfit = f_best;
    res.evaluations = evals;
    res.converged = f_best <= opts.misfit_tol * scale;

    double mn = d_known.initial.minCoeff(), mx = d_known.initial.maxCoeff();
    res.fixed_sign_initial = (mn >= 0.0 || mx <= 0.0) && (mn != 0.0 || mx != 0.0);

    bool distinct = false;
    for (int j = 0; j < ell; ++j)
        if (res.orders.alphas[j] != init.alphas[j]) distinct = true;
    if (distinct) {
        d.orders = res.orders;
        res.trace = discriminator(d, init, x0, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
    }
    return res;
}

}  // namespace mtfd

#endif
