#ifndef MTFD_GRID_HPP
#define MTFD_GRID_HPP

#include <cmath>
#include <vector>

#include "mtfd/errors.hpp"

namespace mtfd {

// Interior nodes of a uniform grid on [x_lo, x_hi], Dirichlet ends excluded.
struct Grid1D {
    double x_lo = 0.0;
    double x_hi = 1.0;
    int n = 0;       // number of interior nodes
    double h = 0.0;  // spacing, (x_hi - x_lo)/(n+1)

    Grid1D(double lo, double hi, int n_interior) : x_lo(lo), x_hi(hi), n(n_interior) {
        if (!(hi > lo)) throw spec_error("Grid1D: empty domain");
        if (n < 1) throw spec_error("Grid1D: need at least one interior node");
        h = (hi - lo) / (n + 1);
    }
    double node(int i) const { return x_lo + (i + 1) * h; }
    std::vector<double> nodes() const {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = node(i);
        return x;
    }
};

enum class TimeGridKind { uniform, graded, samples };

// Ascending time samples t_0 = 0 < t_1 < ... < t_K = T.
struct TimeGrid {
    std::vector<double> times;  // includes t_0 = 0
    TimeGridKind kind = TimeGridKind::uniform;
    double grading = 1.0;

    static TimeGrid uniform(double T, int K) {
        if (!(T > 0.0) || K < 1) throw spec_error("TimeGrid: need T > 0 and K >= 1");
        TimeGrid g;
        g.kind = TimeGridKind::uniform;
        g.times.resize(K + 1);
        for (int k = 0; k <= K; ++k) g.times[k] = T * k / K;
        return g;
    }
    // t_k = T (k/K)^r
    static TimeGrid graded(double T, int K, double r) {
        if (!(T > 0.0) || K < 1 || !(r >= 1.0)) throw spec_error("TimeGrid: bad graded parameters");
        TimeGrid g;
        g.kind = TimeGridKind::graded;
        g.grading = r;
        g.times.resize(K + 1);
        for (int k = 0; k <= K; ++k) g.times[k] = T * std::pow(double(k) / K, r);
        return g;
    }
    // Explicit strictly increasing sample times; t_0 = 0 not required, so
    // Laplace-domain evaluations can stay away from the origin.
    static TimeGrid samples(std::vector<double> t) {
        if (t.empty()) throw spec_error("TimeGrid: empty sample list");
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] < 0.0 || (k > 0 && !(t[k] > t[k - 1])))
                throw spec_error("TimeGrid: samples must be nonnegative and strictly increasing");
        }
        TimeGrid g;
        g.kind = TimeGridKind::samples;
        g.times = std::move(t);
        return g;
    }
    // log-spaced samples, all strictly positive
    static TimeGrid logspace(double t_lo, double t_hi, int count) {
        if (!(t_lo > 0.0) || !(t_hi > t_lo) || count < 2)
            throw spec_error("TimeGrid: bad logspace parameters");
        std::vector<double> t(count);
        for (int k = 0; k < count; ++k)
            t[k] = t_lo * std::pow(t_hi / t_lo, double(k) / (count - 1));
        return samples(std::move(t));
    }
    int steps() const { return (int)times.size() - 1; }
    double horizon() const { return times.back(); }
};

}  // namespace mtfd

#endif
