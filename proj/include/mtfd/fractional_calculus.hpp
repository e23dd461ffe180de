#ifndef MTFD_FRACTIONAL_CALCULUS_HPP
#define MTFD_FRACTIONAL_CALCULUS_HPP

#include <cmath>
#include <vector>

#include "mtfd/errors.hpp"
#include "mtfd/grid.hpp"
#include "mtfd/special_functions.hpp"

namespace mtfd {

// Riemann-Liouville integral J^alpha by product integration: f is
// reconstructed piecewise linearly and the kernel moments
// int (t-tau)^{alpha-1} {1, tau} dtau are integrated in closed form.
// samples[k] = f(t_k), including t_0 = 0.  Exact for affine f.
inline std::vector<double> rl_integral(double alpha, const TimeGrid& grid,
                                       const std::vector<double>& samples) {
    if (!(alpha > 0.0)) throw spec_error("rl_integral: alpha must be positive");
    const auto& t = grid.times;
    if (samples.size() != t.size()) throw spec_error("rl_integral: sample/grid size mismatch");
    const int K = (int)t.size() - 1;
    std::vector<double> out(K + 1, 0.0);
    double ra = rgamma(alpha + 1.0), ra1 = rgamma(alpha + 2.0);
    for (int k = 1; k <= K; ++k) {
        double acc = 0.0;
        for (int m = 0; m < k; ++m) {
            // over [t_m, t_{m+1}], f(tau) = f_m + c (tau - t_m)
            double dm = t[m + 1] - t[m];
            double c = (samples[m + 1] - samples[m]) / dm;
            double u1 = t[k] - t[m], u0 = t[k] - t[m + 1];
            // int (t_k - tau)^{a-1} dtau = (u1^a - u0^a)/a
            double m0 = (std::pow(u1, alpha) - std::pow(u0, alpha)) * ra;
            // (1/Gamma(a)) int (t_k - tau)^{a-1} (tau - t_m) dtau
            double m1 = u1 * m0 - (std::pow(u1, alpha + 1.0) - std::pow(u0, alpha + 1.0)) * alpha * ra1;
            acc += samples[m] * m0 + c * m1;
        }
        out[k] = acc;
    }
    return out;
}

// L1 discretization of the Caputo derivative, alpha in (0,1):
// piecewise-linear f inside the defining integral.  Exact for affine f.
// Output index 0 corresponds to t_1 ... t_K shifted by one: out[0] = 0 at t_0
// for alignment, out[k] for k >= 1 approximates (d^alpha f)(t_k).
inline std::vector<double> caputo_l1(double alpha, const TimeGrid& grid,
                                     const std::vector<double>& samples) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw spec_error("caputo_l1: alpha must be in (0,1)");
    const auto& t = grid.times;
    if (samples.size() != t.size()) throw spec_error("caputo_l1: sample/grid size mismatch");
    const int K = (int)t.size() - 1;
    std::vector<double> out(K + 1, 0.0);
    double rg = rgamma(2.0 - alpha);
    for (int k = 1; k <= K; ++k) {
        double acc = 0.0;
        for (int m = 0; m < k; ++m) {
            double dm = t[m + 1] - t[m];
            double w = (std::pow(t[k] - t[m], 1.0 - alpha) - std::pow(t[k] - t[m + 1], 1.0 - alpha)) / dm;
            acc += w * (samples[m + 1] - samples[m]);
        }
        out[k] = rg * acc;
    }
    return out;
}

// Leading L1 weight at step k (coefficient of u^k in the implicit scheme).
inline double l1_leading_weight(double alpha, const TimeGrid& grid, int k) {
    double dt = grid.times[k] - grid.times[k - 1];
    return rgamma(2.0 - alpha) * std::pow(dt, -alpha);
}

struct RoundtripReport {
    double max_deviation = 0.0;  // max_k | J^a(d^a f)(t_k) - (f(t_k) - f(0)) |
};

// Validates J^alpha(d^alpha f) = f - f(0) on the grid.
inline RoundtripReport caputo_roundtrip_check(double alpha, const TimeGrid& grid,
                                              const std::vector<double>& samples) {
    auto d = caputo_l1(alpha, grid, samples);
    auto j = rl_integral(alpha, grid, d);
    RoundtripReport rep;
    for (std::size_t k = 0; k < samples.size(); ++k)
        rep.max_deviation = std::max(rep.max_deviation,
                                     std::abs(j[k] - (samples[k] - samples[0])));
    return rep;
}

// Default grading exponent for t^alpha-type initial layers, capped at 4.
inline double default_grading(double alpha) { return std::min((2.0 - alpha) / alpha, 4.0); }

}  // namespace mtfd

#endif
