#ifndef MTFD_FIELD_HPP
#define MTFD_FIELD_HPP

#include <Eigen/Dense>
#include <cmath>

#include "mtfd/errors.hpp"
#include "mtfd/grid.hpp"

namespace mtfd {

// Space-time sample table u(x_i, t_k) on the interior nodes of a Grid1D.
// Dirichlet boundary values are identically zero and not stored.
struct Field {
    Grid1D grid;
    TimeGrid times;
    Eigen::MatrixXd values;  // grid.n rows, times.size() columns

    Field(const Grid1D& g, const TimeGrid& t)
        : grid(g), times(t), values(Eigen::MatrixXd::Zero(g.n, (int)t.times.size())) {}

    int time_count() const { return (int)times.times.size(); }
    Eigen::VectorXd at_time(int k) const { return values.col(k); }
    // h-weighted discrete L2 norm of the time slice
    double l2_norm(int k) const { return std::sqrt(grid.h) * values.col(k).norm(); }

    void check_finite() const {
        if (!values.allFinite()) throw numeric_error("Field: non-finite entries");
    }
};

}  // namespace mtfd

#endif
