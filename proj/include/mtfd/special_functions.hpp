#ifndef MTFD_SPECIAL_FUNCTIONS_HPP
#define MTFD_SPECIAL_FUNCTIONS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtfd/errors.hpp"

// Gamma and two-parameter Mittag-Leffler evaluation on the real line and in
// the complex plane.  E_{alpha,beta} is computed by one of three branches:
// truncated Taylor series for small |z|, Poincare asymptotic expansion for
// large |z|, and a ray-contour integral of e^u u^{alpha-beta}/(u^alpha - z)
// in the intermediate band.

namespace mtfd {

using complex = std::complex<double>;

class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& msg, complex best, double est)
        : std::runtime_error(msg), best_estimate(best), est_error(est) {}
    complex best_estimate;
    double est_error;
};

namespace detail {
// Lanczos approximation, g = 7, 9 terms.
inline constexpr double lanczos_c[9] = {
    0.99999999999980993,   676.5203681218851,    -1259.1392167224028,
    771.32342877765313,    -176.61502916214059,  12.507343278686905,
    -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_sum(double x) {
    double a = lanczos_c[0];
    for (int i = 1; i < 9; ++i) a += lanczos_c[i] / (x + i);
    return a;
}

// 1/Gamma in long double.  The Taylor branch needs ~1e-18 relative accuracy
// here because 1/Gamma errors are amplified by the largest series term.
inline long double rgamma_ld(long double x) {
    if (x <= 0.0L && x == floorl(x)) return 0.0L;
    long double g = tgammal(x);  // +-inf on overflow -> 1/g == 0
    return 1.0L / g;
}
}  // namespace detail

// Gamma function for real x away from the poles 0, -1, -2, ...
inline double gamma(double x) {
    if (x <= 0.0 && x == std::floor(x))
        throw spec_error("gamma: pole at nonpositive integer " + std::to_string(x));
    if (x < 0.5) {
        // reflection
        return M_PI / (std::sin(M_PI * x) * gamma(1.0 - x));
    }
    double xm = x - 1.0;
    double a = detail::lanczos_sum(xm);
    double t = xm + 7.5;
    // split the power so intermediates stay within double range up to x ~ 171
    double p = std::pow(t, 0.5 * (xm + 0.5)) * std::exp(-0.5 * t);
    return std::sqrt(2.0 * M_PI) * a * p * p;
}

inline double log_gamma(double x) {
    if (x <= 0.0) throw spec_error("log_gamma: requires x > 0");
    if (x < 0.5) return std::log(gamma(x));
    double xm = x - 1.0;
    double a = detail::lanczos_sum(xm);
    double t = xm + 7.5;
    return 0.5 * std::log(2.0 * M_PI) + (xm + 0.5) * std::log(t) - t + std::log(a);
}

// 1/Gamma(x) for any real x; zero at the poles.
inline double rgamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x < 0.5) return std::sin(M_PI * x) * gamma(1.0 - x) / M_PI;
    if (x > 171.6) return 0.0;  // underflow of 1/Gamma
    return 1.0 / gamma(x);
}

enum class MLBranch { taylor, asymptotic, integral };

struct MLParams {
    double alpha;
    double beta;
    MLParams(double a, double b) : alpha(a), beta(b) {
        if (!(a > 0.0 && a < 2.0)) throw spec_error("MLParams: alpha must be in (0,2)");
        if (!(b > 0.0)) throw spec_error("MLParams: beta must be positive");
    }
};

struct EvalResult {
    complex value{};
    double est_error = 0.0;
    MLBranch branch = MLBranch::taylor;
};

namespace detail {

inline EvalResult ml_eval(double alpha, double beta, complex z, double target);

inline EvalResult ml_taylor(double alpha, double beta, complex z, double target) {
    using cld = std::complex<long double>;
    cld zl(z.real(), z.imag());
    cld sum = 0.0L, term(1.0L, 0.0L);
    double max_term = 0.0;
    int k = 0;
    double tail = std::numeric_limits<double>::infinity();
    for (; k < 4000; ++k) {
        long double rg = rgamma_ld((long double)alpha * k + (long double)beta);
        cld contrib = term * rg;
        sum += contrib;
        double last = (double)std::abs(contrib);
        max_term = std::max(max_term, last);
        // geometric tail bound once the term ratio has dropped below 0.9
        double rho = std::abs(z) * std::pow(alpha * (k + 1) + std::abs(beta), -alpha);
        if (rho < 0.9) {
            tail = last * rho / (1.0 - rho);
            if (tail <= target / 10.0) break;
        }
        term *= zl;
    }
    EvalResult r;
    r.value = complex((double)sum.real(), (double)sum.imag());
    r.est_error = tail + max_term * 1e-19 * (k + 1);
    r.branch = MLBranch::taylor;
    return r;
}

inline EvalResult ml_asymptotic(double alpha, double beta, complex z, double /*target*/) {
    double q = std::abs(z), az = std::arg(z);
    double kd = std::pow(q, 1.0 / alpha) + 10.0;
    const int kmax = (kd > 200.0) ? 200 : (int)kd;
    std::vector<complex> terms(kmax + 1, complex(0.0));
    std::vector<double> mag(kmax + 1, 0.0);
    complex zinv = 1.0 / z, zk = zinv;
    for (int k = 1; k <= kmax; ++k) {
        terms[k] = zk * rgamma(beta - alpha * k);
        mag[k] = std::abs(terms[k]);
        zk *= zinv;
    }
    // optimal truncation on the adjacent-pair envelope: isolated near-zeros of
    // 1/Gamma(beta - alpha k) must not masquerade as the smallest term
    int kstar = kmax;
    double best_env = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kmax; ++k) {
        double env = (k < kmax) ? std::max(mag[k], mag[k + 1]) : mag[k];
        if (env < best_env) { best_env = env; kstar = k; }
    }
    complex sum = 0.0;
    for (int k = 1; k <= kstar; ++k) sum -= terms[k];
    EvalResult r;
    r.value = sum;
    r.est_error = best_env + std::abs(sum) * 5e-16;
    if (std::abs(az) <= M_PI * alpha) {
        complex u0 = std::pow(z, 1.0 / alpha);
        r.value += std::pow(z, (1.0 - beta) / alpha) * std::exp(u0) / alpha;
    }
    r.branch = MLBranch::asymptotic;
    return r;
}

// Ray-contour integral for the intermediate band.  Contour: two rays
// arg u = +-theta; the pole u0 = z^{1/alpha} (present iff |arg z| < pi*alpha)
// contributes a residue when it lies inside the contour.
inline EvalResult ml_integral(double alpha, double beta, complex z, double target) {
    // keep the integrand integrable at u = 0: lower beta through the
    // recurrence E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z
    if (beta > alpha + 0.9) {
        EvalResult inner = ml_eval(alpha, beta - alpha, z, target * std::abs(z));
        EvalResult r;
        r.value = (inner.value - rgamma(beta - alpha)) / z;
        r.est_error = inner.est_error / std::abs(z) + 1e-16;
        r.branch = MLBranch::integral;
        return r;
    }

    bool has_pole = std::abs(std::arg(z)) < M_PI * alpha;
    double p = has_pole ? std::abs(std::arg(std::pow(z, 1.0 / alpha))) : M_PI * 2.0;
    double theta;
    bool use_residue = false;
    if (!has_pole) {
        theta = 0.92 * M_PI;
    } else if (p <= 0.7 * M_PI) {
        theta = 0.92 * M_PI;
        use_residue = true;
    } else if (p <= 0.9 * M_PI) {
        theta = M_PI;
        use_residue = true;
    } else {
        theta = p - 0.18 * M_PI;  // pole excluded, stays outside the contour
    }

    double x_lo = (-14.0 * std::log(10.0) + std::log(std::abs(z))) / (1.0 + alpha - beta);
    x_lo = std::min(x_lo, -2.0);
    double r_max = 38.0 / std::max(0.6, -std::cos(theta));
    double x_hi = std::log(r_max);

    auto integrate = [&](double h) -> complex {
        complex acc = 0.0;
        const complex i1(0.0, 1.0);
        complex eip = std::exp(i1 * theta), eim = std::conj(eip);
        for (double x = x_lo; x <= x_hi; x += h) {
            double r = std::exp(x);
            complex up = r * eip, um = r * eim;
            complex fp = std::exp(up) * std::pow(up, alpha - beta) / (std::pow(up, alpha) - z) * up;
            complex fm = std::exp(um) * std::pow(um, alpha - beta) / (std::pow(um, alpha) - z) * um;
            acc += (fp - fm);
        }
        return acc * h / (2.0 * M_PI * i1);
    };

    complex fine = integrate(0.04), coarse = integrate(0.08);
    EvalResult r;
    r.value = fine;
    r.est_error = std::abs(fine - coarse) / 15.0 + 1e-15;
    if (use_residue)
        r.value += std::pow(z, (1.0 - beta) / alpha) * std::exp(std::pow(z, 1.0 / alpha)) / alpha;
    r.branch = MLBranch::integral;
    return r;
}

// Core evaluation; beta may be any real here (the public wrapper restricts it).
inline EvalResult ml_eval(double alpha, double beta, complex z, double target) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw spec_error("ml_eval: alpha out of (0,2)");
    if (alpha > 1.0) {
        // E_{a,b}(z) = (E_{a/2,b}(sqrt z) + E_{a/2,b}(-sqrt z)) / 2
        complex w = std::sqrt(z);
        EvalResult r1 = ml_eval(0.5 * alpha, beta, w, target);
        EvalResult r2 = ml_eval(0.5 * alpha, beta, -w, target);
        EvalResult r;
        r.value = 0.5 * (r1.value + r2.value);
        r.est_error = 0.5 * (r1.est_error + r2.est_error);
        r.branch = r1.branch;
        return r;
    }
    if (beta <= 0.01) {
        // raise beta: E_{a,b}(z) = z E_{a,b+a}(z) + 1/Gamma(b)
        EvalResult inner = ml_eval(alpha, beta + alpha, z, target / std::max(1.0, std::abs(z)));
        EvalResult r;
        r.value = z * inner.value + rgamma(beta);
        r.est_error = inner.est_error * std::abs(z) + 1e-16;
        r.branch = inner.branch;
        return r;
    }
    if (alpha == 1.0 && beta == 1.0) {
        // exact identity E_{1,1}(z) = e^z; the generic branches lose relative
        // accuracy for strongly negative real z where |e^z| is tiny
        EvalResult r;
        r.value = std::exp(z);
        r.est_error = std::abs(r.value) * 5e-16;
        r.branch = MLBranch::taylor;
        return r;
    }
    double q = std::abs(z);
    if (q == 0.0) {
        EvalResult r;
        r.value = rgamma(beta);
        r.branch = MLBranch::taylor;
        return r;
    }
    // keep |z|^{1/alpha} <= 19 inside the Taylor branch so the long double
    // accumulation retains ~12 digits through the cancellation
    double r0 = std::min(std::pow(19.0, alpha), 5.0);
    double R0 = std::clamp(std::pow(26.0 / alpha, alpha), 8.0, 60.0);
    if (q <= r0) return ml_taylor(alpha, beta, z, target);
    if (q >= R0) return ml_asymptotic(alpha, beta, z, target);
    return ml_integral(alpha, beta, z, target);
}

}  // namespace detail

// E_{alpha,beta}(z).  Throws accuracy_error when the internal error estimate
// exceeds the requested accuracy; est_error is a heuristic (last Taylor term,
// first omitted asymptotic term, or quadrature refinement delta), not a bound.
inline EvalResult mittag_leffler(const MLParams& p, complex z, double accuracy = 1e-10) {
    EvalResult r = detail::ml_eval(p.alpha, p.beta, z, accuracy);
    if (!(r.est_error < accuracy))
        throw accuracy_error("mittag_leffler: requested accuracy unattainable", r.value, r.est_error);
    return r;
}

// d^n/dt^n E_{alpha,1}(-lambda t^alpha) = -lambda t^{alpha-n} E_{alpha,alpha-n+1}(-lambda t^alpha)
inline double ml_time_derivative(double alpha, double lambda, double t, int n) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw spec_error("ml_time_derivative: alpha must be in (0,1)");
    if (!(lambda > 0.0)) throw spec_error("ml_time_derivative: lambda must be positive");
    if (!(t > 0.0)) throw spec_error("ml_time_derivative: t must be positive");
    if (n != 1 && n != 2) throw spec_error("ml_time_derivative: n must be 1 or 2");
    double beta = alpha - n + 1;
    EvalResult e = detail::ml_eval(alpha, beta, complex(-lambda * std::pow(t, alpha), 0.0), 1e-11);
    return -lambda * std::pow(t, alpha - n) * e.value.real();
}

struct SectorBoundReport {
    double sup_scaled = 0.0;   // sup over samples of |E_{a,b}(z)| (1 + |z|)
    double max_abs_z = 0.0;
    std::size_t count = 0;
};

// Empirical check of |E_{alpha,beta}(z)| <= C/(1+|z|) in the sector
// mu <= |arg z| <= pi.
inline SectorBoundReport ml_sector_bound_check(const MLParams& p, double mu,
                                               const std::vector<complex>& samples) {
    if (!(mu > 0.5 * M_PI * p.alpha && mu < std::min(M_PI, M_PI * p.alpha)))
        throw spec_error("ml_sector_bound_check: mu outside (pi alpha/2, min(pi, pi alpha))");
    SectorBoundReport rep;
    for (complex z : samples) {
        double az = std::abs(std::arg(z));
        if (z != complex(0.0) && az + 1e-12 < mu)
            throw spec_error("ml_sector_bound_check: sample outside sector");
        EvalResult e = detail::ml_eval(p.alpha, p.beta, z, 1e-9);
        rep.sup_scaled = std::max(rep.sup_scaled, std::abs(e.value) * (1.0 + std::abs(z)));
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
        ++rep.count;
    }
    return rep;
}

}  // namespace mtfd

#endif
