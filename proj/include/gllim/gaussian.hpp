#pragma once

#include <Eigen/Dense>

#include "gllim/errors.hpp"

namespace gllim {

// Log-weights smaller than this are treated as exact zeros in mixture sums.
constexpr double kLogZero = -700.0;

// Relative eigenvalue floor applied to covariance matrices: floor = kSpdFloorRel * tr(M)/dim.
constexpr double kSpdFloorRel = 1e-8;

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

// Symmetrizes and clamps eigenvalues from below so the result is safely SPD.
Eigen::MatrixXd spd_floor(const Eigen::MatrixXd& m, double rel_floor = kSpdFloorRel);

// True when all eigenvalues exceed the relative floor (after symmetrization).
bool is_spd(const Eigen::MatrixXd& m, double rel_floor = kSpdFloorRel);

// Cholesky of an SPD matrix; throws IllConditionedError naming `what` on failure.
Eigen::LLT<Eigen::MatrixXd> spd_cholesky(const Eigen::MatrixXd& m, const std::string& what);

// log N(x; mean, cov) through a Cholesky factorization.
double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::LLT<Eigen::MatrixXd>& chol);
double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov);

// log(sum_i exp(v_i)), stable; returns -inf for an empty or all -inf input.
double log_sum_exp(const Eigen::VectorXd& v);

} // namespace gllim
