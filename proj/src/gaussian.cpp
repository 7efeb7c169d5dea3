#include "gllim/gaussian.hpp"

#include <cmath>
#include <limits>

namespace gllim {

Eigen::MatrixXd spd_floor(const Eigen::MatrixXd& m, double rel_floor) {
    Eigen::MatrixXd sym = symmetrize(m);
    const auto dim = sym.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    // Base the floor on the positive part of the spectrum so a strongly
    // indefinite input still ends up comfortably SPD by the relative test.
    double pos_trace = eig.eigenvalues().cwiseMax(0.0).sum();
    double floor = rel_floor * pos_trace / static_cast<double>(dim);
    if (floor <= 0.0)
        floor = rel_floor;
    Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(floor);
    return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

bool is_spd(const Eigen::MatrixXd& m, double rel_floor) {
    if (m.rows() != m.cols())
        return false;
    Eigen::MatrixXd sym = symmetrize(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    double floor = rel_floor * std::max(sym.trace() / static_cast<double>(m.rows()), 0.0);
    // The slack keeps a matrix that was just clamped to the floor classified
    // as SPD even though clamping itself raises the trace-relative floor.
    return eig.eigenvalues().minCoeff() > floor * (1.0 - 1e-6) &&
           eig.eigenvalues().minCoeff() > 0.0;
}

Eigen::LLT<Eigen::MatrixXd> spd_cholesky(const Eigen::MatrixXd& m, const std::string& what) {
    Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(m));
    if (llt.info() != Eigen::Success)
        throw IllConditionedError("matrix is not positive definite: " + what);
    return llt;
}

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::LLT<Eigen::MatrixXd>& chol) {
    if (x.size() != mean.size())
        throw DimensionError("log_gaussian: point/mean size mismatch");
    const Eigen::Index dim = x.size();
    Eigen::VectorXd diff = x - mean;
    // half log|cov| from the Cholesky diagonal
    double half_log_det = chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double quad = chol.matrixL().solve(diff).squaredNorm();
    return -0.5 * (static_cast<double>(dim) * std::log(2.0 * M_PI) + quad) - half_log_det;
}

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov) {
    return log_gaussian(x, mean, spd_cholesky(cov, "gaussian covariance"));
}

double log_sum_exp(const Eigen::VectorXd& v) {
    if (v.size() == 0)
        return -std::numeric_limits<double>::infinity();
    double m = v.maxCoeff();
    if (!std::isfinite(m))
        return m;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += std::exp(v[i] - m);
    return m + std::log(s);
}

} // namespace gllim
