#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gllim/constraint.hpp"

namespace gllim {

// Inverse-model parameters of the locally-affine mixture y = A_k x + b_k + noise,
// with the low-dimensional variable split as x = [t; w] (t observed, w latent).
struct GLLiMParams {
    int K = 0;
    int D = 0;
    int L_t = 0;
    int L_w = 0;

    Eigen::VectorXd pi;                  // K component priors
    std::vector<Eigen::VectorXd> c;      // K vectors of size L = L_t + L_w, stacked [c^t; c^w]
    std::vector<Eigen::MatrixXd> Gamma;  // K LxL block-diagonal SPD matrices
    std::vector<Eigen::MatrixXd> A;      // K DxL matrices, column blocks [A^t | A^w]
    std::vector<Eigen::VectorXd> b;      // K vectors of size D
    std::vector<Eigen::MatrixXd> Sigma;  // K DxD SPD matrices

    ConstraintSpec constraint_sigma;
    ConstraintSpec constraint_gamma;

    int L() const { return L_t + L_w; }

    // Block views of the t/w split.
    Eigen::VectorXd c_t(int k) const { return c[k].head(L_t); }
    Eigen::VectorXd c_w(int k) const { return c[k].tail(L_w); }
    Eigen::MatrixXd Gamma_t(int k) const { return Gamma[k].topLeftCorner(L_t, L_t); }
    Eigen::MatrixXd Gamma_w(int k) const { return Gamma[k].bottomRightCorner(L_w, L_w); }
    Eigen::MatrixXd A_t(int k) const { return A[k].leftCols(L_t); }
    Eigen::MatrixXd A_w(int k) const { return A[k].rightCols(L_w); }

    // Effective noise covariance of y | t, Z=k with w marginalized out:
    // Sigma_k + A^w_k Gamma^w_k A^w_k^T.
    Eigen::MatrixXd inflated_sigma(int k) const;

    // Checks all structural invariants (weights, SPD blocks, zero off-diagonal
    // t/w coupling in Gamma, fixed c^w / Gamma^w values); throws on violation.
    void validate() const;

    // Allocates zeroed parameters of the requested shape with identity covariances.
    static GLLiMParams zeros(int K, int D, int L_t, int L_w);
};

// Parameters of the derived forward (high-to-low) conditional mixture.
struct ForwardParams {
    int K = 0;
    int D = 0;
    int L = 0;

    Eigen::VectorXd pi;
    std::vector<Eigen::VectorXd> c;      // K vectors of size D
    std::vector<Eigen::MatrixXd> Gamma;  // K DxD SPD
    std::vector<Eigen::MatrixXd> A;      // K LxD
    std::vector<Eigen::VectorXd> b;      // K vectors of size L
    std::vector<Eigen::MatrixXd> Sigma;  // K LxL SPD

    void validate() const;
};

// Unconstrained Gaussian mixture on the joint variable [x; y].
struct JointGMMParams {
    int K = 0;
    int L = 0;
    int D = 0;

    Eigen::VectorXd rho;
    std::vector<Eigen::VectorXd> m;  // K vectors of size L + D
    std::vector<Eigen::MatrixXd> V;  // K (L+D)x(L+D) SPD matrices

    void validate() const;
};

} // namespace gllim
