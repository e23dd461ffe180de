#include <cmath>
#include <random>

#include "doctest.h"
#include "mtfd/gauss_jacobi.hpp"
#include "mtfd/operator.hpp"

using namespace mtfd;

namespace {

ProblemSpec laplace_spec() {
    ProblemSpec s;
    s.x_lo = 0.0;
    s.x_hi = M_PI;
    s.diffusion = ProblemSpec::constant(1.0);
    s.weights = {ProblemSpec::constant(1.0)};
    s.orders = OrderSet({0.5});
    s.initial = [](double x) { return std::sin(x); };
    return s;
}

}  // namespace

TEST_CASE("gauss-jacobi rule integrates exactly") {
    // int_0^1 (1-x)^A x^B x^p dx = B(A+1, B+p+1)
    double A = -0.3, B = -0.5;
    JacobiRule rule(A, B, 12);
    for (int p = 0; p <= 23; ++p) {
        double got = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            got += rule.weights[i] * std::pow(rule.nodes[i], p);
        double want = std::exp(log_gamma(A + 1.0) + log_gamma(B + p + 1.0) - log_gamma(A + B + p + 2.0));
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK_THROWS_AS(JacobiRule(-1.0, 0.0, 4), spec_error);
    CHECK_THROWS_AS(JacobiRule(0.0, 0.0, 0), spec_error);
}

TEST_CASE("assemble laplacian stencil and symmetry") {
    Grid1D grid(0.0, M_PI, 31);
    auto d = assemble(laplace_spec(), grid);
    double h2 = grid.h * grid.h;
    for (int i = 0; i < grid.n; ++i) CHECK(d.A.diag[i] == doctest::Approx(2.0 / h2).epsilon(1e-14));
    for (int i = 0; i + 1 < grid.n; ++i) CHECK(d.A.off[i] == doctest::Approx(-1.0 / h2).epsilon(1e-14));

    // non-elliptic coefficient rejected
    auto bad = laplace_spec();
    bad.diffusion = [](double x) { return x - 1.0; };
    CHECK_THROWS_AS(assemble(bad, grid), spec_error);
    // q_1 must be 1
    auto badq = laplace_spec();
    badq.weights = {ProblemSpec::constant(2.0)};
    CHECK_THROWS_AS(assemble(badq, grid), spec_error);
}

TEST_CASE("eigendecompose: closed-form eigenvalues, orthonormality, residuals") {
    Grid1D grid(0.0, M_PI, 64);
    auto d = assemble(laplace_spec(), grid);
    auto basis = eigendecompose(d.A, grid.h);
    // lambda_n = (4/h^2) sin^2(n h / 2) on (0,pi)
    for (int n = 1; n <= basis.n(); ++n) {
        double s = std::sin(0.5 * n * grid.h);
        CHECK(basis.eigenvalues[n - 1] ==
              doctest::Approx(4.0 / (grid.h * grid.h) * s * s).epsilon(1e-12));
    }
    // Gram matrix = identity to 1e-10 (h-weighted)
    Eigen::MatrixXd G = grid.h * basis.vectors.transpose() * basis.vectors;
    CHECK((G - Eigen::MatrixXd::Identity(basis.n(), basis.n())).cwiseAbs().maxCoeff() < 1e-10);
    // eigen residuals
    for (int n = 0; n < basis.n(); ++n) {
        Vector phi = basis.vectors.col(n);
        Vector r = d.A.apply(phi) - basis.eigenvalues[n] * phi;
        CHECK(basis.norm(r) <= 1e-8 * basis.eigenvalues[n]);
    }
    // smallest eigenvalue converges to the continuum value 1
    double prev_gap = 1e9;
    for (int N : {16, 32, 64, 128}) {
        Grid1D g(0.0, M_PI, N);
        auto dd = assemble(laplace_spec(), g);
        auto b = eigendecompose(dd.A, g.h);
        double gap = std::abs(b.eigenvalues[0] - 1.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-4);
}

TEST_CASE("single interior node") {
    Grid1D grid(0.0, 1.0, 1);
    auto spec = laplace_spec();
    spec.x_hi = 1.0;
    auto d = assemble(spec, grid);
    auto b = eigendecompose(d.A, grid.h);
    CHECK(b.n() == 1);
    CHECK(b.norm(b.vectors.col(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fractional powers") {
    Grid1D grid(0.0, M_PI, 48);
    auto d = assemble(laplace_spec(), grid);
    auto basis = eigendecompose(d.A, grid.h);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Vector v(grid.n);
    for (int i = 0; i < grid.n; ++i) v[i] = U(rng);

    // gamma = 0: identity
    CHECK((frac_power_apply(basis, 0.0, v) - v).cwiseAbs().maxCoeff() < 1e-10);
    // gamma = 1 reproduces A v
    CHECK((frac_power_apply(basis, 1.0, v) - d.A.apply(v)).cwiseAbs().maxCoeff() <
          1e-10 * d.A.apply(v).cwiseAbs().maxCoeff());
    // inverse relation
    Vector w = frac_power_apply(basis, -0.7, frac_power_apply(basis, 0.7, v));
    CHECK((w - v).cwiseAbs().maxCoeff() < 1e-9);
    // semigroup: half power twice
    Vector h2 = frac_power_apply(basis, 0.5, frac_power_apply(basis, 0.5, v));
    CHECK((h2 - frac_power_apply(basis, 1.0, v)).cwiseAbs().maxCoeff() <
          1e-9 * h2.cwiseAbs().maxCoeff());
    CHECK_THROWS_AS(frac_power_apply(basis, 1.5, v), spec_error);

    // sobolev norms
    Vector phi1 = basis.vectors.col(0);
    CHECK(sobolev_norm(basis, 0.0, phi1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sobolev_norm(basis, 1.0, phi1) == doctest::Approx(basis.eigenvalues[0]).epsilon(1e-12));
    Vector psum = basis.vectors.col(0) + basis.vectors.col(1);
    CHECK(sobolev_norm(basis, 0.5, psum) ==
          doctest::Approx(std::sqrt(basis.eigenvalues[0] + basis.eigenvalues[1])).epsilon(1e-12));
    CHECK(sobolev_norm(basis, 0.0, v) == doctest::Approx(basis.norm(v)).epsilon(1e-12));
}

TEST_CASE("solution operator") {
    Grid1D grid(0.0, M_PI, 40);
    auto d = assemble(laplace_spec(), grid);
    auto basis = eigendecompose(d.A, grid.h);
    double a1 = 0.7;
    Vector a = d.initial;

    // S(z->0+) v -> v
    CVector s0 = solution_operator(basis, a1, 0, complex(1e-8, 0.0), a);
    CHECK((s0.real() - a).cwiseAbs().maxCoeff() < 1e-5 * a.cwiseAbs().maxCoeff());

    // sector boundary rejected
    CHECK_THROWS_AS(solution_operator(basis, a1, 0, complex(0.0, 1.0), a), std::domain_error);
    CHECK_THROWS_AS(solution_operator(basis, a1, 0, complex(0.0), a), std::domain_error);
    CHECK_THROWS_AS(solution_operator(basis, 1.0, 0, complex(1.0), a), spec_error);

    // initial data sin(x) is (close to) the first discrete eigenvector:
    // S(t) sin = E_{a,1}(-lambda_1 t^a) sin
    double lam1 = basis.eigenvalues[0];
    for (double t : {0.1, 1.0, 5.0}) {
        CVector st = solution_operator(basis, a1, 0, complex(t, 0.0), a);
        double e = mittag_leffler(MLParams(a1, 1.0), complex(-lam1 * std::pow(t, a1), 0.0)).value.real();
        CHECK((st.real() - e * a).cwiseAbs().maxCoeff() < 1e-8);
    }

    // first derivative vs central difference in t
    double t = 0.8, dt = 1e-5;
    CVector s1 = solution_operator(basis, a1, 1, complex(t, 0.0), a);
    CVector sp = solution_operator(basis, a1, 0, complex(t + dt, 0.0), a);
    CVector sm = solution_operator(basis, a1, 0, complex(t - dt, 0.0), a);
    CVector fd = (sp - sm) / (2.0 * dt);
    CHECK((s1 - fd).cwiseAbs().maxCoeff() < 1e-6);

    // second derivative vs second difference
    CVector s2 = solution_operator(basis, a1, 2, complex(t, 0.0), a);
    CVector sc = solution_operator(basis, a1, 0, complex(t, 0.0), a);
    CVector fd2 = (sp - 2.0 * sc + sm) / (dt * dt);
    CHECK((s2 - fd2).cwiseAbs().maxCoeff() < 1e-3 * s2.cwiseAbs().maxCoeff() + 1e-6);
}

TEST_CASE("smoothing estimate slopes") {
    // || A^{gamma-1} S^{(j)}(t) || ~ t^{alpha1 - j - alpha1 gamma}.  The clean
    // scaling regime needs spectrum on both sides of t^{-alpha1}, so use a
    // wide domain (small lambda_1) and a fine grid (large lambda_N).
    Grid1D grid(0.0, 8.0 * M_PI, 256);
    auto spec = laplace_spec();
    spec.x_hi = 8.0 * M_PI;
    auto d = assemble(spec, grid);
    auto basis = eigendecompose(d.A, grid.h);
    double a1 = 0.6;
    for (double gamma : {0.0, 0.5, 1.0}) {
        for (int j : {1, 2}) {
            // operator norm = sup over eigenmodes (the basis diagonalizes it)
            std::vector<double> ts, ns;
            for (double t = 1e-2; t <= 1e1 * 1.0001; t *= std::pow(10.0, 0.25)) {
                double sup = 0.0;
                for (int n = 0; n < basis.n(); ++n) {
                    double lam = basis.eigenvalues[n];
                    auto e = detail::ml_eval(a1, a1 - j + 1, complex(-lam * std::pow(t, a1), 0.0), 1e-9);
                    double v = std::pow(lam, gamma) * std::pow(t, a1 - j) * std::abs(e.value);
                    sup = std::max(sup, v);
                }
                ts.push_back(std::log(t));
                ns.push_back(std::log(sup));
            }
            // least-squares slope
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int m = (int)ts.size();
            for (int i = 0; i < m; ++i) { sx += ts[i]; sy += ns[i]; sxx += ts[i] * ts[i]; sxy += ts[i] * ns[i]; }
            double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            double want = a1 - j - a1 * gamma;
            CHECK(std::abs(slope - want) < 0.05);
        }
    }
}

TEST_CASE("shifted solves") {
    Grid1D grid(0.0, M_PI, 40);
    auto d = assemble(laplace_spec(), grid);
    auto basis = eigendecompose(d.A, grid.h);
    double a1 = 0.5;

    // rhs = 0 -> w = 0
    CVector zero = solve_shifted(d, complex(2.0, 0.5), CVector::Zero(grid.n));
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

    // out-of-sector s rejected (alpha1=0.8 -> sector half-angle pi/1.6)
    {
        auto sp = laplace_spec();
        sp.orders = OrderSet({0.8});
        auto d8 = assemble(sp, grid);
        CHECK_THROWS_AS(solve_shifted(d8, std::polar(1.0, M_PI / 1.6 + 0.05), CVector::Ones(grid.n)),
                        std::domain_error);
    }

    // single-term constant coefficients: eigenexpansion oracle
    for (complex s : {complex(3.0, 0.0), std::polar(2.0, 0.8), complex(0.05, 0.02)}) {
        CVector rhs = laplace_rhs(d, s);
        CVector w = solve_shifted(d, s, rhs);
        Vector c = basis.project(d.initial);
        CVector want = CVector::Zero(grid.n);
        complex sa = std::pow(s, a1);
        for (int n = 0; n < basis.n(); ++n) {
            complex coef = std::pow(s, a1 - 1.0) / (sa + basis.eigenvalues[n]) * c[n];
            want += coef * basis.vectors.col(n).cast<complex>();
        }
        CHECK((w - want).cwiseAbs().maxCoeff() < 1e-10 * want.cwiseAbs().maxCoeff() + 1e-12);
    }

    // s real large: w -> a / s
    {
        complex s(1e6, 0.0);
        CVector w = solve_shifted(d, s, laplace_rhs(d, s));
        CHECK((w - d.initial.cast<complex>() / s).cwiseAbs().maxCoeff() < 1e-9);
    }

    // positivity for real s > 0 with nonnegative initial data
    {
        complex s(0.3, 0.0);
        CVector w = solve_shifted(d, s, laplace_rhs(d, s));
        for (int i = 0; i < grid.n; ++i) CHECK(w[i].real() > 0.0);
    }

    // elliptic_solve inverts A_h - b
    Vector f = Vector::Ones(grid.n);
    Vector w = elliptic_solve(d, f);
    CHECK((d.A.apply(w) - f).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("problem validation") {
    Grid1D grid(0.0, M_PI, 8);
    CHECK_THROWS_AS(OrderSet({0.5, 0.7}), spec_error);     // not decreasing
    CHECK_THROWS_AS(OrderSet({1.2}), spec_error);          // outside (0,1)
    CHECK_THROWS_AS(OrderSet(std::vector<double>{}), spec_error);
    auto s = laplace_spec();
    s.convection = ProblemSpec::constant(1.0);
    CHECK_THROWS_AS(s.validate_sign_hypotheses(grid), spec_error);
    auto s2 = laplace_spec();
    s2.potential = ProblemSpec::constant(0.5);
    CHECK_THROWS_AS(s2.validate_sign_hypotheses(grid), spec_error);
    CHECK_NOTHROW(laplace_spec().validate_sign_hypotheses(grid));
}
