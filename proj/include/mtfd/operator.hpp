#ifndef MTFD_OPERATOR_HPP
#define MTFD_OPERATOR_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "mtfd/errors.hpp"
#include "mtfd/grid.hpp"
#include "mtfd/problem.hpp"
#include "mtfd/special_functions.hpp"

namespace mtfd {

using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

// Symmetric tridiagonal matrix (interior Dirichlet rows only).
struct Tridiagonal {
    Vector diag;
    Vector off;  // size n-1

    int n() const { return (int)diag.size(); }
    Vector apply(const Vector& v) const {
        Vector y = diag.cwiseProduct(v);
        for (int i = 0; i + 1 < n(); ++i) {
            y[i] += off[i] * v[i + 1];
            y[i + 1] += off[i] * v[i];
        }
        return y;
    }
};

// Thomas solve of a general (possibly nonsymmetric, possibly complex)
// tridiagonal system.  No pivoting; the systems assembled here are strictly
// diagonally dominant under the problem hypotheses.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> tridiag_solve(
    const Eigen::Vector<Scalar, Eigen::Dynamic>& lower,
    Eigen::Vector<Scalar, Eigen::Dynamic> diag,
    const Eigen::Vector<Scalar, Eigen::Dynamic>& upper,
    Eigen::Vector<Scalar, Eigen::Dynamic> rhs) {
    const int n = (int)diag.size();
    for (int i = 1; i < n; ++i) {
        if (diag[i - 1] == Scalar(0)) throw numeric_error("tridiag_solve: zero pivot");
        Scalar w = lower[i - 1] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[n - 1] == Scalar(0)) throw numeric_error("tridiag_solve: zero pivot");
    Eigen::Vector<Scalar, Eigen::Dynamic> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

// Discretized problem: A_h is the conservative second-order discretization of
// -d/dx(a11 d/dx .), kept separate from the zeroth-order potential and the
// first-order convection so A_h stays symmetric positive definite.
struct DiscreteProblem {
    Grid1D grid;
    Tridiagonal A;        // divergence-form part
    Vector potential;     // b(x_i)
    Vector convection;    // B(x_i)
    bool has_convection = false;
    std::vector<Vector> weights;  // q_j(x_i), weights[0] == 1
    Vector initial;       // a(x_i)
    OrderSet orders;

    // B(x) u'(x) by centered differences, Dirichlet ends.
    Vector apply_convection(const Vector& v) const {
        Vector y = Vector::Zero(grid.n);
        if (!has_convection) return y;
        double inv2h = 1.0 / (2.0 * grid.h);
        for (int i = 0; i < grid.n; ++i) {
            double up = (i + 1 < grid.n) ? v[i + 1] : 0.0;
            double dn = (i > 0) ? v[i - 1] : 0.0;
            y[i] = convection[i] * (up - dn) * inv2h;
        }
        return y;
    }
    // B u' + b u, the lower-order perturbation in the integral equation.
    Vector apply_lower_order(const Vector& v) const {
        return apply_convection(v) + potential.cwiseProduct(v);
    }
};

inline DiscreteProblem assemble(const ProblemSpec& spec, const Grid1D& grid) {
    spec.validate_basic();
    const int n = grid.n;
    DiscreteProblem d{grid, {}, {}, {}, false, {}, {}, spec.orders};
    // midpoint diffusion samples
    Vector amid(n + 1);
    for (int i = 0; i <= n; ++i) {
        double xm = grid.x_lo + (i + 0.5) * grid.h;
        amid[i] = spec.diffusion(xm);
        if (!(amid[i] > 0.0)) throw spec_error("assemble: diffusion coefficient not uniformly positive");
    }
    double h2 = grid.h * grid.h;
    d.A.diag.resize(n);
    d.A.off.resize(n - 1);
    for (int i = 0; i < n; ++i) d.A.diag[i] = (amid[i] + amid[i + 1]) / h2;
    for (int i = 0; i + 1 < n; ++i) d.A.off[i] = -amid[i + 1] / h2;

    d.potential = Vector::Zero(n);
    d.convection = Vector::Zero(n);
    d.initial.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = grid.node(i);
        if (spec.potential) d.potential[i] = spec.potential(x);
        if (spec.convection) d.convection[i] = spec.convection(x);
        d.initial[i] = spec.initial(x);
    }
    d.has_convection = d.convection.cwiseAbs().maxCoeff() > 0.0;

    d.weights.resize(spec.weights.size());
    for (std::size_t j = 0; j < spec.weights.size(); ++j) {
        d.weights[j].resize(n);
        for (int i = 0; i < n; ++i) d.weights[j][i] = spec.weights[j](grid.node(i));
    }
    for (int i = 0; i < n; ++i)
        if (std::abs(d.weights[0][i] - 1.0) > 1e-14)
            throw spec_error("assemble: leading weight q_1 must be identically 1");
    return d;
}

// Eigenpairs of A_h, orthonormal in the h-weighted discrete L2 inner product.
struct EigenBasis {
    Vector eigenvalues;       // ascending, positive
    Eigen::MatrixXd vectors;  // columns phi_n, h-orthonormal
    double h = 0.0;

    int n() const { return (int)eigenvalues.size(); }
    // coefficients (v, phi_n)_h
    Vector project(const Vector& v) const { return h * (vectors.transpose() * v); }
    Vector synthesize(const Vector& coeffs) const { return vectors * coeffs; }
    double inner(const Vector& u, const Vector& v) const { return h * u.dot(v); }
    double norm(const Vector& v) const { return std::sqrt(h) * v.norm(); }
};

inline EigenBasis eigendecompose(const Tridiagonal& A, double h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(A.diag, A.off, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw numeric_error("eigendecompose: tridiagonal QL iteration failed");
    EigenBasis b;
    b.h = h;
    b.eigenvalues = es.eigenvalues();
    b.vectors = es.eigenvectors() / std::sqrt(h);
    if (b.eigenvalues[0] <= 0.0)
        throw numeric_error("eigendecompose: nonpositive eigenvalue; operator not SPD");
    return b;
}

// A^gamma v = sum_n lambda_n^gamma (v,phi_n) phi_n
inline Vector frac_power_apply(const EigenBasis& basis, double gamma, const Vector& v) {
    if (!(gamma >= -1.0 && gamma <= 1.0))
        throw spec_error("frac_power_apply: gamma must lie in [-1,1]");
    Vector c = basis.project(v);
    for (int i = 0; i < basis.n(); ++i) c[i] *= std::pow(basis.eigenvalues[i], gamma);
    return basis.synthesize(c);
}

// || v ||_{D(A^gamma)} = (sum lambda_n^{2 gamma} |(v,phi_n)|^2)^{1/2}
inline double sobolev_norm(const EigenBasis& basis, double gamma, const Vector& v) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw spec_error("sobolev_norm: gamma must lie in [0,1]");
    Vector c = basis.project(v);
    double s = 0.0;
    for (int i = 0; i < basis.n(); ++i)
        s += std::pow(basis.eigenvalues[i], 2.0 * gamma) * c[i] * c[i];
    return std::sqrt(s);
}

// S(z) a and its first two z-derivatives in the eigenbasis:
//   S(z)v      = sum (v,phi_n) E_{a1,1}(-lambda_n z^a1) phi_n
//   S^(j)(z)v  = -sum lambda_n (v,phi_n) z^{a1-j} E_{a1,a1-j+1}(-lambda_n z^a1) phi_n
inline CVector solution_operator(const EigenBasis& basis, double alpha1, int deriv_order,
                                 complex z, const Vector& v) {
    if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw spec_error("solution_operator: alpha1 outside (0,1)");
    if (deriv_order < 0 || deriv_order > 2) throw spec_error("solution_operator: deriv_order in {0,1,2}");
    if (z == complex(0.0) || std::abs(std::arg(z)) >= M_PI / 2.0)
        throw std::domain_error("solution_operator: z must satisfy |arg z| < pi/2, z != 0");
    complex za = std::pow(z, alpha1);
    Vector c = basis.project(v);
    CVector coeff(basis.n());
    double beta = (deriv_order == 0) ? 1.0 : alpha1 - deriv_order + 1;
    complex zfac = (deriv_order == 0) ? complex(1.0) : -std::pow(z, alpha1 - deriv_order);
    for (int i = 0; i < basis.n(); ++i) {
        complex arg = -basis.eigenvalues[i] * za;
        EvalResult e = detail::ml_eval(alpha1, beta, arg, 1e-11);
        complex g = (deriv_order == 0) ? e.value : zfac * basis.eigenvalues[i] * e.value;
        coeff[i] = g * c[i];
    }
    return basis.vectors * coeff;
}

// Q(x;s) = sum_j q_j(x) s^{alpha_j}, principal branch.
inline CVector q_symbol(const DiscreteProblem& d, complex s) {
    CVector q = CVector::Zero(d.grid.n);
    for (std::size_t j = 0; j < d.weights.size(); ++j) {
        complex sa = std::pow(s, d.orders.alphas[j]);
        for (int i = 0; i < d.grid.n; ++i) q[i] += d.weights[j][i] * sa;
    }
    return q;
}

// Solve (A_h - b + Q(.;s)) w = rhs for s in the sector |arg s| < min(pi/(2 a1), pi).
inline CVector solve_shifted(const DiscreteProblem& d, complex s, const CVector& rhs) {
    double theta_max = std::min(M_PI / (2.0 * d.orders.largest()), M_PI);
    if (s == complex(0.0) || std::abs(std::arg(s)) >= theta_max)
        throw std::domain_error("solve_shifted: s outside the admissible sector");
    const int n = d.grid.n;
    CVector diag(n), lower(n - 1), upper(n - 1);
    CVector q = q_symbol(d, s);
    for (int i = 0; i < n; ++i) diag[i] = complex(d.A.diag[i] - d.potential[i]) + q[i];
    for (int i = 0; i + 1 < n; ++i) lower[i] = upper[i] = complex(d.A.off[i]);
    CVector w = tridiag_solve<complex>(lower, diag, upper, rhs);
    // residual check
    CVector r = diag.cwiseProduct(w) - rhs;
    for (int i = 0; i + 1 < n; ++i) {
        r[i] += upper[i] * w[i + 1];
        r[i + 1] += lower[i] * w[i];
    }
    double rn = r.norm(), bn = rhs.norm();
    if (bn > 0.0 && rn > 1e-10 * bn) throw numeric_error("solve_shifted: large residual");
    return w;
}

// Right-hand side of the Laplace-transformed equation, s^{-1} Q(.;s) a.
inline CVector laplace_rhs(const DiscreteProblem& d, complex s) {
    return q_symbol(d, s).cwiseProduct(d.initial.cast<complex>()) / s;
}

// Real Dirichlet solve (A_h - b) w = f  (used by the leading-term and w0 problems).
inline Vector elliptic_solve(const DiscreteProblem& d, const Vector& f) {
    const int n = d.grid.n;
    Vector diag = d.A.diag - d.potential;
    Vector lower(n - 1), upper(n - 1);
    for (int i = 0; i + 1 < n; ++i) lower[i] = upper[i] = d.A.off[i];
    return tridiag_solve<double>(lower, diag, upper, f);
}

}  // namespace mtfd

#endif
