#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gllim/em.hpp"

namespace gllim {

// Per-component residual covariance eigenstructure from the marginal M pass.
struct ResidualStats {
    std::vector<Eigen::MatrixXd> C;        // K DxD residual covariances
    std::vector<Eigen::VectorXd> eigvals;  // descending
    std::vector<Eigen::MatrixXd> U;        // K DxL_w leading eigenvectors
    std::vector<Eigen::VectorXd> Lambda;   // K leading eigenvalues (diagonal)
};

struct RegressionUpdate {
    std::vector<Eigen::MatrixXd> A_t;  // K DxL_t (empty matrices when L_t = 0)
    std::vector<Eigen::VectorXd> b;    // K vectors of size D
};

struct ResidualUpdate {
    std::vector<Eigen::MatrixXd> A_w;     // K DxL_w factor loadings
    Eigen::VectorXd sigma2;               // K isotropic noise variances
    ResidualStats stats;
    int clamped_columns = 0;  // factor columns zeroed because lambda < sigma^2
};

// Weighted affine regression from t to y per component.
RegressionUpdate m_regression_step(const Responsibilities& r, const Dataset& data);

// Residuals u_kn = sqrt(r_nk / r_k) (y_n - A^t_k t_n - b_k), one DxN block per
// component, as consumed by the residual step.
std::vector<Eigen::MatrixXd> component_residuals(const Responsibilities& r,
                                                 const Dataset& data,
                                                 const RegressionUpdate& reg);

// Closed-form PPCA maximizer of the residual objective for isotropic noise.
ResidualUpdate m_residual_step(const std::vector<Eigen::MatrixXd>& residuals, int L_w);

// The per-component residual objective maximized by m_residual_step:
// -1/2 (log|sigma^2 I + A A^T| + sum_n u_n^T (sigma^2 I + A A^T)^-1 u_n).
double residual_objective(double sigma2, const Eigen::MatrixXd& A_w,
                          const Eigen::MatrixXd& residuals);

struct KMeansResult {
    Eigen::VectorXi labels;
    Eigen::MatrixXd centers;
    double inertia = 0.0;
};

// k-means++ with restarts; ties between restarts go to the lowest index.
KMeansResult kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed,
                    int restarts = 10, int max_iter = 100);

struct InitConfig {
    bool cluster_on_joint = true;  // cluster [y; t] rows, or t alone
    int kmeans_restarts = 10;
    int reseed_limit = 5;
    ConstraintSpec constraint_sigma = ConstraintSpec::isotropic(/*shared=*/true);
    ConstraintSpec constraint_gamma = ConstraintSpec::full();
};

// One marginal M pass (GMM + regression + residual) from given responsibilities.
GLLiMParams marginal_m_pass(const Responsibilities& r, const Dataset& data, int L_w,
                            const ConstraintSpec& constraint_sigma,
                            const ConstraintSpec& constraint_gamma);

// Full initializer: k-means responsibilities followed by one marginal M pass.
GLLiMParams initialize(const Dataset& data, int K, int L_w, std::uint64_t seed,
                       const InitConfig& config = {});

// Responsibilities (one-hot) from the k-means clustering used by initialize.
Responsibilities initial_responsibilities(const Dataset& data, int K, std::uint64_t seed,
                                          const InitConfig& config = {});

} // namespace gllim
