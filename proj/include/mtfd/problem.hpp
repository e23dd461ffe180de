#ifndef MTFD_PROBLEM_HPP
#define MTFD_PROBLEM_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "mtfd/errors.hpp"
#include "mtfd/grid.hpp"

namespace mtfd {

// Strictly decreasing fractional orders alpha_1 > ... > alpha_ell in (0,1).
struct OrderSet {
    std::vector<double> alphas;

    OrderSet() = default;
    explicit OrderSet(std::vector<double> a) : alphas(std::move(a)) { validate(); }
    void validate() const {
        if (alphas.empty()) throw spec_error("OrderSet: empty");
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            if (!(alphas[j] > 0.0 && alphas[j] < 1.0))
                throw spec_error("OrderSet: orders must lie in (0,1)");
            if (j > 0 && !(alphas[j] < alphas[j - 1]))
                throw spec_error("OrderSet: orders must be strictly decreasing");
        }
    }
    int ell() const { return (int)alphas.size(); }
    double largest() const { return alphas.front(); }
    double smallest() const { return alphas.back(); }
};

using ScalarField = std::function<double(double)>;

// Problem data for
//   sum_j q_j(x) d_t^{alpha_j} u = -(A u) + B u' + b u   on (x_lo,x_hi),
// Dirichlet boundary, u(.,0) = a.  q_1 must be identically 1.
struct ProblemSpec {
    double x_lo = 0.0, x_hi = 1.0;
    ScalarField diffusion;   // a11(x) >= nu > 0
    ScalarField potential;   // b(x)
    ScalarField convection;  // B(x), may be zero
    std::vector<ScalarField> weights;  // q_1, ..., q_ell (q_1 == 1)
    OrderSet orders;
    ScalarField initial;     // a(x)

    static ScalarField constant(double c) {
        return [c](double) { return c; };
    }

    void validate_basic() const {
        if (!(x_hi > x_lo)) throw spec_error("ProblemSpec: empty domain");
        orders.validate();
        if ((int)weights.size() != orders.ell())
            throw spec_error("ProblemSpec: one weight function per order required");
        if (!diffusion || !initial) throw spec_error("ProblemSpec: missing coefficient functions");
    }

    // Hypotheses for the asymptotics / inverse results: B == 0, b <= 0,
    // q_j >= 0 and not identically 0.  Checked on the sampling grid.
    void validate_sign_hypotheses(const Grid1D& grid) const {
        validate_basic();
        for (int i = 0; i < grid.n; ++i) {
            double x = grid.node(i);
            if (convection && convection(x) != 0.0)
                throw spec_error("ProblemSpec: convection must vanish for asymptotics/inverse use");
            if (potential && potential(x) > 0.0)
                throw spec_error("ProblemSpec: potential must be <= 0");
            for (const auto& q : weights)
                if (q(x) < 0.0) throw spec_error("ProblemSpec: weights must be nonnegative");
        }
        for (const auto& q : weights) {
            double m = 0.0;
            for (int i = 0; i < grid.n; ++i) m = std::max(m, std::abs(q(grid.node(i))));
            if (m == 0.0) throw spec_error("ProblemSpec: weight identically zero on grid");
        }
    }
};

}  // namespace mtfd

#endif
