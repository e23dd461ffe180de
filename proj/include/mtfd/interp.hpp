#ifndef MTFD_INTERP_HPP
#define MTFD_INTERP_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtfd/errors.hpp"

namespace mtfd {

// Monotone (Fritsch-Carlson) piecewise-cubic Hermite interpolant on a fixed
// strictly increasing abscissa set.  Shape-preserving, C^1; used for time
// interpolation of solver iterates and for kernel lookup tables.
struct Pchip1D {
    std::vector<double> x, y, m;  // nodes, values, node slopes

    Pchip1D() = default;
    Pchip1D(std::vector<double> xs, std::vector<double> ys)
        : x(std::move(xs)), y(std::move(ys)) {
        const std::size_t n = x.size();
        if (n < 2 || y.size() != n) throw spec_error("Pchip1D: need >= 2 matching nodes");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x[i] > x[i - 1])) throw spec_error("Pchip1D: abscissae must increase");
        std::vector<double> d(n - 1), hs(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            hs[i] = x[i + 1] - x[i];
            d[i] = (y[i + 1] - y[i]) / hs[i];
        }
        m.assign(n, 0.0);
        if (n == 2) {
            m[0] = m[1] = d[0];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (d[i - 1] * d[i] <= 0.0) {
                    m[i] = 0.0;
                } else {
                    double w1 = 2.0 * hs[i] + hs[i - 1];
                    double w2 = hs[i] + 2.0 * hs[i - 1];
                    m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            auto end_slope = [](double h0, double h1, double d0, double d1) {
                double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
                if (s * d0 <= 0.0) return 0.0;
                if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
                return s;
            };
            m[0] = end_slope(hs[0], hs[1], d[0], d[1]);
            m[n - 1] = end_slope(hs[n - 2], hs[n - 3], d[n - 2], d[n - 3]);
        }
    }

    double operator()(double xq) const {
        const std::size_t n = x.size();
        if (xq <= x.front()) return y.front() + m.front() * (xq - x.front());
        if (xq >= x.back()) return y.back() + m.back() * (xq - x.back());
        std::size_t i = std::upper_bound(x.begin(), x.end(), xq) - x.begin() - 1;
        if (i >= n - 1) i = n - 2;
        double h = x[i + 1] - x[i], t = (xq - x[i]) / h;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y[i] + h * h10 * m[i] + h01 * y[i + 1] + h * h11 * m[i + 1];
    }
};

}  // namespace mtfd

#endif
