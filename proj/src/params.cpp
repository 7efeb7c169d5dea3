#include "gllim/params.hpp"

#include <cmath>

#include "gllim/errors.hpp"
#include "gllim/gaussian.hpp"

namespace gllim {

namespace {

void check_weights(const Eigen::VectorXd& w, int K, const char* name) {
    if (w.size() != K)
        throw InvalidParametersError(std::string(name) + ": weight vector size mismatch");
    if ((w.array() < 0.0).any())
        throw InvalidParametersError(std::string(name) + ": negative mixture weight");
    if (std::abs(w.sum() - 1.0) > 1e-8)
        throw InvalidParametersError(std::string(name) + ": mixture weights do not sum to 1");
}

void check_spd(const Eigen::MatrixXd& m, int dim, const std::string& what) {
    if (m.rows() != dim || m.cols() != dim)
        throw InvalidParametersError(what + ": wrong shape");
    if (!is_spd(m))
        throw InvalidParametersError(what + ": not symmetric positive definite");
}

} // namespace

Eigen::MatrixXd GLLiMParams::inflated_sigma(int k) const {
    if (L_w == 0)
        return Sigma[k];
    return symmetrize(Sigma[k] + A_w(k) * Gamma_w(k) * A_w(k).transpose());
}

void GLLiMParams::validate() const {
    if (K < 1 || D < 1 || L_t < 0 || L_w < 0 || L() < 1)
        throw InvalidParametersError("GLLiMParams: invalid dimensions");
    check_weights(pi, K, "GLLiMParams");
    if (static_cast<int>(c.size()) != K || static_cast<int>(Gamma.size()) != K ||
        static_cast<int>(A.size()) != K || static_cast<int>(b.size()) != K ||
        static_cast<int>(Sigma.size()) != K)
        throw InvalidParametersError("GLLiMParams: component list size mismatch");
    for (int k = 0; k < K; ++k) {
        const std::string kk = " (component " + std::to_string(k) + ")";
        if (c[k].size() != L())
            throw InvalidParametersError("GLLiMParams: c size mismatch" + kk);
        if (A[k].rows() != D || A[k].cols() != L())
            throw InvalidParametersError("GLLiMParams: A shape mismatch" + kk);
        if (b[k].size() != D)
            throw InvalidParametersError("GLLiMParams: b size mismatch" + kk);
        check_spd(Gamma[k], L(), "GLLiMParams: Gamma" + kk);
        check_spd(Sigma[k], D, "GLLiMParams: Sigma" + kk);
        if (L_t > 0 && L_w > 0) {
            if (Gamma[k].topRightCorner(L_t, L_w).cwiseAbs().maxCoeff() != 0.0 ||
                Gamma[k].bottomLeftCorner(L_w, L_t).cwiseAbs().maxCoeff() != 0.0)
                throw InvalidParametersError(
                    "GLLiMParams: Gamma has nonzero t/w coupling" + kk);
        }
        // The latent-block prior is fixed for identifiability: all components
        // must carry the same c^w and Gamma^w values.
        if (L_w > 0 && k > 0) {
            if ((c_w(k) - c_w(0)).cwiseAbs().maxCoeff() != 0.0 ||
                (Gamma_w(k) - Gamma_w(0)).cwiseAbs().maxCoeff() != 0.0)
                throw InvalidParametersError(
                    "GLLiMParams: latent-block prior differs across components" + kk);
        }
    }
    constraint_sigma.validate();
    constraint_gamma.validate();
}

GLLiMParams GLLiMParams::zeros(int K, int D, int L_t, int L_w) {
    GLLiMParams p;
    p.K = K;
    p.D = D;
    p.L_t = L_t;
    p.L_w = L_w;
    const int L = L_t + L_w;
    p.pi = Eigen::VectorXd::Constant(K, 1.0 / K);
    p.c.assign(K, Eigen::VectorXd::Zero(L));
    p.Gamma.assign(K, Eigen::MatrixXd::Identity(L, L));
    p.A.assign(K, Eigen::MatrixXd::Zero(D, L));
    p.b.assign(K, Eigen::VectorXd::Zero(D));
    p.Sigma.assign(K, Eigen::MatrixXd::Identity(D, D));
    return p;
}

void ForwardParams::validate() const {
    if (K < 1 || D < 1 || L < 1)
        throw InvalidParametersError("ForwardParams: invalid dimensions");
    check_weights(pi, K, "ForwardParams");
    for (int k = 0; k < K; ++k) {
        const std::string kk = " (component " + std::to_string(k) + ")";
        check_spd(Gamma[k], D, "ForwardParams: Gamma*" + kk);
        check_spd(Sigma[k], L, "ForwardParams: Sigma*" + kk);
        if (c[k].size() != D || b[k].size() != L || A[k].rows() != L || A[k].cols() != D)
            throw InvalidParametersError("ForwardParams: shape mismatch" + kk);
    }
}

void JointGMMParams::validate() const {
    if (K < 1 || L < 1 || D < 1)
        throw InvalidParametersError("JointGMMParams: invalid dimensions");
    check_weights(rho, K, "JointGMMParams");
    for (int k = 0; k < K; ++k) {
        const std::string kk = " (component " + std::to_string(k) + ")";
        if (m[k].size() != L + D)
            throw InvalidParametersError("JointGMMParams: m size mismatch" + kk);
        check_spd(V[k], L + D, "JointGMMParams: V" + kk);
    }
}

} // namespace gllim
