#ifndef MTFD_GAUSS_JACOBI_HPP
#define MTFD_GAUSS_JACOBI_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mtfd/errors.hpp"
#include "mtfd/special_functions.hpp"

namespace mtfd {

// Gauss-Jacobi rule for  int_0^1 (1-x)^A x^B f(x) dx,  A, B > -1.
// Nodes and weights via Golub-Welsch on the Jacobi recurrence.
struct JacobiRule {
    std::vector<double> nodes;    // in (0,1)
    std::vector<double> weights;  // absorb the (1-x)^A x^B factor

    JacobiRule(double A, double B, int m) {
        if (!(A > -1.0 && B > -1.0)) throw spec_error("JacobiRule: exponents must exceed -1");
        if (m < 1) throw spec_error("JacobiRule: need at least one node");
        Eigen::VectorXd diag(m), off(std::max(0, m - 1));
        double s = A + B;
        diag[0] = (B - A) / (s + 2);
        for (int k = 1; k < m; ++k)
            diag[k] = (B * B - A * A) / ((2 * k + s) * (2 * k + s + 2));
        for (int k = 1; k < m; ++k) {
            double num = 4.0 * k * (k + A) * (k + B) * (k + s);
            double den = (2 * k + s) * (2 * k + s) * (2 * k + s + 1) * (2 * k + s - 1);
            off[k - 1] = std::sqrt(num / den);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) throw numeric_error("JacobiRule: eigensolver failed");
        double mu0 = std::exp((s + 1) * std::log(2.0) + log_gamma(A + 1.0) + log_gamma(B + 1.0) -
                              log_gamma(s + 2.0));
        nodes.resize(m);
        weights.resize(m);
        double scale = mu0 / std::pow(2.0, s + 1);  // map [-1,1] -> [0,1]
        for (int k = 0; k < m; ++k) {
            nodes[k] = 0.5 * (1.0 + es.eigenvalues()[k]);
            double v = es.eigenvectors()(0, k);
            weights[k] = scale * v * v;
        }
    }
};

}  // namespace mtfd

#endif
