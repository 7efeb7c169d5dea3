#include "gllim/model.hpp"

#include <cmath>

#include "gllim/errors.hpp"
#include "gllim/gaussian.hpp"

namespace gllim {

namespace {

// Normalizes unnormalized log mixture terms into weights, treating terms more
// than 700 nats below zero as exact zeros. Returns false when every term
// underflows; `argmax` then still points at the least-bad component.
bool normalize_log_weights(const Eigen::VectorXd& log_terms, Eigen::VectorXd& weights,
                           int& argmax) {
    Eigen::Index imax = 0;
    double max_term = log_terms.maxCoeff(&imax);
    argmax = static_cast<int>(imax);
    weights = Eigen::VectorXd::Zero(log_terms.size());
    if (!(max_term > kLogZero))
        return false;
    double lse = log_sum_exp(log_terms);
    for (Eigen::Index k = 0; k < log_terms.size(); ++k) {
        double lw = log_terms[k] - lse;
        weights[k] = lw > kLogZero ? std::exp(lw) : 0.0;
    }
    return true;
}

} // namespace

ForwardParams derive_forward(const GLLiMParams& theta) {
    ForwardParams fwd;
    fwd.K = theta.K;
    fwd.D = theta.D;
    fwd.L = theta.L();
    fwd.pi = theta.pi;
    fwd.c.resize(theta.K);
    fwd.Gamma.resize(theta.K);
    fwd.A.resize(theta.K);
    fwd.b.resize(theta.K);
    fwd.Sigma.resize(theta.K);
    for (int k = 0; k < theta.K; ++k) {
        const std::string kk = "component " + std::to_string(k);
        auto gamma_chol = spd_cholesky(theta.Gamma[k], "Gamma, " + kk);
        auto sigma_chol = spd_cholesky(theta.Sigma[k], "Sigma, " + kk);

        fwd.c[k] = theta.A[k] * theta.c[k] + theta.b[k];
        fwd.Gamma[k] =
            symmetrize(theta.Sigma[k] + theta.A[k] * theta.Gamma[k] * theta.A[k].transpose());

        // Sigma*_k = (Gamma^-1 + A^T Sigma^-1 A)^-1; the precision sum is needed
        // explicitly, so invert through its own Cholesky.
        Eigen::MatrixXd sigma_inv_A = sigma_chol.solve(theta.A[k]);
        Eigen::MatrixXd precision = symmetrize(
            gamma_chol.solve(Eigen::MatrixXd::Identity(fwd.L, fwd.L)) +
            theta.A[k].transpose() * sigma_inv_A);
        auto prec_chol = spd_cholesky(precision, "forward precision, " + kk);
        fwd.Sigma[k] = symmetrize(prec_chol.solve(Eigen::MatrixXd::Identity(fwd.L, fwd.L)));
        fwd.A[k] = fwd.Sigma[k] * sigma_inv_A.transpose();
        fwd.b[k] = fwd.Sigma[k] *
                   (gamma_chol.solve(theta.c[k]) - sigma_inv_A.transpose() * theta.b[k]);
    }
    return fwd;
}

double inverse_density(const GLLiMParams& theta, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y, Eigen::VectorXd* log_terms) {
    if (x.size() != theta.L() || y.size() != theta.D)
        throw DimensionError("inverse_density: query dimensions do not match the model");
    Eigen::VectorXd log_prior(theta.K), log_lik(theta.K);
    for (int k = 0; k < theta.K; ++k) {
        log_prior[k] = std::log(theta.pi[k]) + log_gaussian(x, theta.c[k], theta.Gamma[k]);
        log_lik[k] = log_gaussian(y, theta.A[k] * x + theta.b[k], theta.Sigma[k]);
    }
    Eigen::VectorXd terms = (log_prior.array() - log_sum_exp(log_prior)) + log_lik.array();
    if (log_terms)
        *log_terms = terms;
    return std::exp(log_sum_exp(terms));
}

double forward_density(const ForwardParams& theta_star, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x, Eigen::VectorXd* log_terms) {
    if (y.size() != theta_star.D || x.size() != theta_star.L)
        throw DimensionError("forward_density: query dimensions do not match the model");
    Eigen::VectorXd log_prior(theta_star.K), log_lik(theta_star.K);
    for (int k = 0; k < theta_star.K; ++k) {
        log_prior[k] =
            std::log(theta_star.pi[k]) + log_gaussian(y, theta_star.c[k], theta_star.Gamma[k]);
        log_lik[k] =
            log_gaussian(x, theta_star.A[k] * y + theta_star.b[k], theta_star.Sigma[k]);
    }
    Eigen::VectorXd terms = (log_prior.array() - log_sum_exp(log_prior)) + log_lik.array();
    if (log_terms)
        *log_terms = terms;
    return std::exp(log_sum_exp(terms));
}

Expectation inverse_expectation(const GLLiMParams& theta, const Eigen::VectorXd& x) {
    if (x.size() != theta.L())
        throw DimensionError("inverse_expectation: query dimension does not match the model");
    Eigen::VectorXd log_terms(theta.K);
    for (int k = 0; k < theta.K; ++k)
        log_terms[k] = std::log(theta.pi[k]) + log_gaussian(x, theta.c[k], theta.Gamma[k]);
    Eigen::VectorXd weights;
    int argmax = 0;
    Expectation out;
    if (!normalize_log_weights(log_terms, weights, argmax)) {
        // Query far outside the prior support: fall back to the nearest
        // component's affine map and flag the result.
        out.value = theta.A[argmax] * x + theta.b[argmax];
        out.degenerate = true;
        return out;
    }
    out.value = Eigen::VectorXd::Zero(theta.D);
    for (int k = 0; k < theta.K; ++k)
        if (weights[k] > 0.0)
            out.value += weights[k] * (theta.A[k] * x + theta.b[k]);
    return out;
}

Expectation forward_expectation(const ForwardParams& theta_star, const Eigen::VectorXd& y) {
    if (y.size() != theta_star.D)
        throw DimensionError("forward_expectation: query dimension does not match the model");
    Eigen::VectorXd log_terms(theta_star.K);
    for (int k = 0; k < theta_star.K; ++k)
        log_terms[k] =
            std::log(theta_star.pi[k]) + log_gaussian(y, theta_star.c[k], theta_star.Gamma[k]);
    Eigen::VectorXd weights;
    int argmax = 0;
    Expectation out;
    if (!normalize_log_weights(log_terms, weights, argmax)) {
        out.value = theta_star.A[argmax] * y + theta_star.b[argmax];
        out.degenerate = true;
        return out;
    }
    out.value = Eigen::VectorXd::Zero(theta_star.L);
    for (int k = 0; k < theta_star.K; ++k)
        if (weights[k] > 0.0)
            out.value += weights[k] * (theta_star.A[k] * y + theta_star.b[k]);
    return out;
}

Expectation forward_expectation(const GLLiMParams& theta, const Eigen::VectorXd& y) {
    return forward_expectation(derive_forward(theta), y);
}

JointGMMParams to_joint_gmm(const GLLiMParams& theta) {
    JointGMMParams psi;
    psi.K = theta.K;
    psi.L = theta.L();
    psi.D = theta.D;
    psi.rho = theta.pi;
    psi.m.resize(theta.K);
    psi.V.resize(theta.K);
    const int L = theta.L();
    const int D = theta.D;
    for (int k = 0; k < theta.K; ++k) {
        psi.m[k].resize(L + D);
        psi.m[k].head(L) = theta.c[k];
        psi.m[k].tail(D) = theta.A[k] * theta.c[k] + theta.b[k];
        Eigen::MatrixXd AG = theta.A[k] * theta.Gamma[k];
        psi.V[k].resize(L + D, L + D);
        psi.V[k].topLeftCorner(L, L) = theta.Gamma[k];
        psi.V[k].topRightCorner(L, D) = AG.transpose();
        psi.V[k].bottomLeftCorner(D, L) = AG;
        psi.V[k].bottomRightCorner(D, D) =
            symmetrize(theta.Sigma[k] + AG * theta.A[k].transpose());
    }
    return psi;
}

GLLiMParams from_joint_gmm(const JointGMMParams& psi, int L) {
    const int D = static_cast<int>(psi.m.at(0).size()) - L;
    if (L < 1 || D < 1)
        throw DimensionError("from_joint_gmm: block split is inconsistent with psi");
    GLLiMParams theta = GLLiMParams::zeros(psi.K, D, L, 0);
    theta.pi = psi.rho;
    for (int k = 0; k < psi.K; ++k) {
        const Eigen::MatrixXd& V = psi.V[k];
        if (V.rows() != L + D)
            throw DimensionError("from_joint_gmm: V block size mismatch");
        if (!is_spd(V))
            throw InvalidParametersError("from_joint_gmm: V is not SPD (component " +
                                         std::to_string(k) + ")");
        Eigen::MatrixXd Vxx = V.topLeftCorner(L, L);
        Eigen::MatrixXd Vxy = V.topRightCorner(L, D);
        Eigen::MatrixXd Vyy = V.bottomRightCorner(D, D);
        auto xx_chol = spd_cholesky(Vxx, "V^xx, component " + std::to_string(k));
        theta.c[k] = psi.m[k].head(L);
        theta.Gamma[k] = symmetrize(Vxx);
        theta.A[k] = xx_chol.solve(Vxy).transpose();
        theta.b[k] = psi.m[k].tail(D) - theta.A[k] * theta.c[k];
        theta.Sigma[k] = symmetrize(Vyy - Vxy.transpose() * xx_chol.solve(Vxy));
    }
    return theta;
}

double log_likelihood(const GLLiMParams& theta, const Dataset& data) {
    if (data.N() < 1)
        throw InvalidParametersError("log_likelihood: empty dataset");
    if (data.D() != theta.D || data.L_t() != theta.L_t)
        throw DimensionError("log_likelihood: dataset dimensions do not match the model");

    // Per-component factorizations are reused across samples.
    std::vector<Eigen::LLT<Eigen::MatrixXd>> gamma_t_chol, noise_chol;
    std::vector<Eigen::VectorXd> y_offset(theta.K);
    for (int k = 0; k < theta.K; ++k) {
        if (theta.L_t > 0)
            gamma_t_chol.push_back(
                spd_cholesky(theta.Gamma_t(k), "Gamma^t, component " + std::to_string(k)));
        noise_chol.push_back(spd_cholesky(theta.inflated_sigma(k),
                                          "inflated Sigma, component " + std::to_string(k)));
        y_offset[k] = theta.b[k];
        if (theta.L_w > 0)
            y_offset[k] += theta.A_w(k) * theta.c_w(k);
    }

    double total = 0.0;
    Eigen::VectorXd terms(theta.K);
    for (int n = 0; n < data.N(); ++n) {
        for (int k = 0; k < theta.K; ++k) {
            double t_term = 0.0;
            Eigen::VectorXd mean = y_offset[k];
            if (theta.L_t > 0) {
                Eigen::VectorXd t_n = data.T.row(n).transpose();
                t_term = log_gaussian(t_n, theta.c_t(k), gamma_t_chol[k]);
                mean += theta.A_t(k) * t_n;
            }
            terms[k] = std::log(theta.pi[k]) + t_term +
                       log_gaussian(data.Y.row(n).transpose(), mean, noise_chol[k]);
        }
        total += log_sum_exp(terms);
    }
    return total;
}

} // namespace gllim
