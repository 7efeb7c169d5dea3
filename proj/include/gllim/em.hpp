#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gllim/dataset.hpp"
#include "gllim/model.hpp"
#include "gllim/params.hpp"

namespace gllim {

// Posterior component memberships r_nk and their column sums.
struct Responsibilities {
    Eigen::MatrixXd r;       // N x K, rows sum to 1
    Eigen::VectorXd r_col;   // K column sums
    int underflow_rows = 0;  // rows replaced by the uniform fallback

    void validate() const;
    static Responsibilities from_matrix(Eigen::MatrixXd r);
};

// Gaussian posterior of the latent block w given (y, t, Z = k).
struct LatentPosterior {
    std::vector<Eigen::MatrixXd> mu_w;  // K matrices, each N x L_w
    std::vector<Eigen::MatrixXd> S_w;   // K L_w x L_w SPD matrices

    bool empty() const { return mu_w.empty(); }
};

struct FitConfig {
    int max_iter = 200;
    double rel_tol = 1e-6;
    ConstraintSpec constraint_sigma = ConstraintSpec::isotropic(/*shared=*/true);
    ConstraintSpec constraint_gamma = ConstraintSpec::full();
    // Optional per-iteration sink: (iteration, loglik, K_effective).
    std::function<void(int, double, int)> trace_sink;
};

struct FitReport {
    std::vector<double> loglik_trace;
    int iterations = 0;
    int K_effective = 0;
    bool converged = false;
    double final_loglik = 0.0;
    double final_bic = 0.0;
    int removed_components = 0;
    int underflow_rows = 0;
};

struct FitResult {
    GLLiMParams theta;
    FitReport report;
};

// E-W step: posterior over the latent block. Empty when L_w = 0.
LatentPosterior e_w_step(const GLLiMParams& theta, const Dataset& data);

// E-Z step: responsibilities from the marginal (w integrated out) densities.
Responsibilities e_z_step(const GLLiMParams& theta, const Dataset& data);

struct GmmUpdate {
    Eigen::VectorXd pi;
    std::vector<Eigen::VectorXd> c_t;
    std::vector<Eigen::MatrixXd> Gamma_t;
};

// M-GMM step: standard weighted GMM updates on t, constraint-projected.
GmmUpdate m_gmm_step(const Responsibilities& r, const Dataset& data,
                     const ConstraintSpec& gamma_constraint);

struct MappingUpdate {
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::VectorXd> b;
    std::vector<Eigen::MatrixXd> Sigma;
};

// M-mapping step: closed-form update of (A, b, Sigma) from the imputed
// x_nk = [t_n; mu^w_nk] with the latent-covariance correction terms.
MappingUpdate m_mapping_step(const Responsibilities& r, const LatentPosterior& post_w,
                             const Dataset& data, const GLLiMParams& theta,
                             const ConstraintSpec& sigma_constraint);

// Full general EM loop from an initial parameter vector.
FitResult fit(const Dataset& data, const GLLiMParams& theta0, const FitConfig& config = {});

// Overload starting from initial responsibilities: runs one marginal M pass
// (GMM + regression + residual) to build theta0, then the general loop.
FitResult fit(const Dataset& data, int L_w, const Responsibilities& r0,
              const FitConfig& config = {});

} // namespace gllim
