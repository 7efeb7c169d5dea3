#pragma once

#include <Eigen/Dense>

#include "gllim/dataset.hpp"
#include "gllim/params.hpp"

namespace gllim {

// Prediction of a conditional-expectation query. `degenerate` is set when all
// mixture weights underflowed and the value fell back to the affine map of the
// component with the largest (still underflowed) log weight.
struct Expectation {
    Eigen::VectorXd value;
    bool degenerate = false;
};

// Closed-form forward parameters: the high-to-low conditional of the joint
// model induced by the inverse parameters.
ForwardParams derive_forward(const GLLiMParams& theta);

// p(y | x; theta), log-domain. Optionally exposes the per-component log terms
// log(w_k(x)) + log N(y; A_k x + b_k, Sigma_k).
double inverse_density(const GLLiMParams& theta, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y, Eigen::VectorXd* log_terms = nullptr);

// p(x | y; theta*), log-domain.
double forward_density(const ForwardParams& theta_star, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x, Eigen::VectorXd* log_terms = nullptr);

// E[Y | X = x; theta].
Expectation inverse_expectation(const GLLiMParams& theta, const Eigen::VectorXd& x);

// E[X | Y = y] computed from precomputed forward parameters.
Expectation forward_expectation(const ForwardParams& theta_star, const Eigen::VectorXd& y);

// Convenience: derives theta* internally.
Expectation forward_expectation(const GLLiMParams& theta, const Eigen::VectorXd& y);

// Equivalent joint Gaussian mixture on [x; y].
JointGMMParams to_joint_gmm(const GLLiMParams& theta);

// Inverse conversion; L is the size of the x block of psi.
GLLiMParams from_joint_gmm(const JointGMMParams& psi, int L);

// Observed-data log-likelihood sum_n log p(y_n, t_n; theta), with the latent
// block of x marginalized out.
double log_likelihood(const GLLiMParams& theta, const Dataset& data);

} // namespace gllim
