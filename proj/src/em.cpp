#include "gllim/em.hpp"

#include <cmath>
#include <string>

#include "gllim/errors.hpp"
#include "gllim/gaussian.hpp"
#include "gllim/init.hpp"

namespace gllim {

namespace {

// Eigenvalue floor that preserves the structural family: diagonal/isotropic
// matrices are clamped entrywise, full matrices spectrally.
Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& m, CovStructure structure) {
    const auto dim = m.rows();
    double floor = kSpdFloorRel * std::max(m.trace() / static_cast<double>(dim), 0.0);
    if (floor <= 0.0)
        floor = kSpdFloorRel;
    if (structure == CovStructure::Full)
        return spd_floor(m);
    Eigen::MatrixXd out = m;
    for (Eigen::Index i = 0; i < dim; ++i)
        out(i, i) = std::max(out(i, i), floor);
    return out;
}

// Unnormalized log posterior terms log pi_k + log N(t_n) + log N(y_n | t_n),
// the w block marginalized out. Shared by the E-Z step.
Eigen::MatrixXd marginal_log_terms(const GLLiMParams& theta, const Dataset& data) {
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
    Eigen::MatrixXd terms(data.N(), theta.K);
    for (int n = 0; n < data.N(); ++n) {
        for (int k = 0; k < theta.K; ++k) {
            double t_term = 0.0;
            Eigen::VectorXd mean = y_offset[k];
            if (theta.L_t > 0) {
                Eigen::VectorXd t_n = data.T.row(n).transpose();
                t_term = log_gaussian(t_n, theta.c_t(k), gamma_t_chol[k]);
                mean += theta.A_t(k) * t_n;
            }
            terms(n, k) = std::log(theta.pi[k]) + t_term +
                          log_gaussian(data.Y.row(n).transpose(), mean, noise_chol[k]);
        }
    }
    return terms;
}

} // namespace

void Responsibilities::validate() const {
    if (r.rows() < 1 || r.cols() < 1)
        throw InvalidParametersError("responsibilities are empty");
    if ((r.array() < 0.0).any() || (r.array() > 1.0 + 1e-12).any())
        throw InvalidParametersError("responsibilities outside [0, 1]");
    for (Eigen::Index n = 0; n < r.rows(); ++n)
        if (std::abs(r.row(n).sum() - 1.0) > 1e-12)
            throw InvalidParametersError("responsibility row " + std::to_string(n) +
                                         " does not sum to 1");
    if ((r_col - r.colwise().sum().transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidParametersError("responsibility column sums are stale");
}

Responsibilities Responsibilities::from_matrix(Eigen::MatrixXd r) {
    Responsibilities out;
    out.r = std::move(r);
    out.r_col = out.r.colwise().sum().transpose();
    return out;
}

LatentPosterior e_w_step(const GLLiMParams& theta, const Dataset& data) {
    LatentPosterior post;
    if (theta.L_w == 0)
        return post;
    if (data.D() != theta.D || data.L_t() != theta.L_t)
        throw DimensionError("e_w_step: dataset dimensions do not match the model");

    post.mu_w.resize(theta.K);
    post.S_w.resize(theta.K);
    for (int k = 0; k < theta.K; ++k) {
        const std::string kk = "component " + std::to_string(k);
        auto sigma_chol = spd_cholesky(theta.Sigma[k], "Sigma, " + kk);
        auto gamma_w_chol = spd_cholesky(theta.Gamma_w(k), "Gamma^w, " + kk);
        Eigen::MatrixXd Aw = theta.A_w(k);
        Eigen::MatrixXd sigma_inv_Aw = sigma_chol.solve(Aw);
        Eigen::MatrixXd precision = symmetrize(
            gamma_w_chol.solve(Eigen::MatrixXd::Identity(theta.L_w, theta.L_w)) +
            Aw.transpose() * sigma_inv_Aw);
        auto prec_chol = spd_cholesky(precision, "latent posterior precision, " + kk);
        post.S_w[k] =
            symmetrize(prec_chol.solve(Eigen::MatrixXd::Identity(theta.L_w, theta.L_w)));

        Eigen::VectorXd prior_pull = gamma_w_chol.solve(theta.c_w(k));
        post.mu_w[k].resize(data.N(), theta.L_w);
        for (int n = 0; n < data.N(); ++n) {
            Eigen::VectorXd resid = data.Y.row(n).transpose() - theta.b[k];
            if (theta.L_t > 0)
                resid -= theta.A_t(k) * data.T.row(n).transpose();
            post.mu_w[k].row(n) =
                (post.S_w[k] * (sigma_inv_Aw.transpose() * resid + prior_pull)).transpose();
        }
    }
    return post;
}

Responsibilities e_z_step(const GLLiMParams& theta, const Dataset& data) {
    Eigen::MatrixXd terms = marginal_log_terms(theta, data);
    Responsibilities resp;
    resp.r.resize(data.N(), theta.K);
    for (int n = 0; n < data.N(); ++n) {
        Eigen::VectorXd row = terms.row(n).transpose();
        if (!(row.maxCoeff() > -std::numeric_limits<double>::infinity())) {
            resp.r.row(n).setConstant(1.0 / theta.K);
            ++resp.underflow_rows;
            continue;
        }
        double lse = log_sum_exp(row);
        for (int k = 0; k < theta.K; ++k) {
            double lw = row[k] - lse;
            resp.r(n, k) = lw > kLogZero ? std::exp(lw) : 0.0;
        }
        resp.r.row(n) /= resp.r.row(n).sum();
    }
    resp.r_col = resp.r.colwise().sum().transpose();
    return resp;
}

GmmUpdate m_gmm_step(const Responsibilities& r, const Dataset& data,
                     const ConstraintSpec& gamma_constraint) {
    const int K = static_cast<int>(r.r.cols());
    const int N = data.N();
    const int L_t = data.L_t();
    GmmUpdate upd;
    upd.pi = r.r_col / static_cast<double>(N);
    if (L_t == 0)
        return upd;

    upd.c_t.resize(K);
    std::vector<Eigen::MatrixXd> scatter(K);
    for (int k = 0; k < K; ++k) {
        const double rk = r.r_col[k];
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(L_t);
        for (int n = 0; n < N; ++n)
            mean += r.r(n, k) * data.T.row(n).transpose();
        mean /= rk;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(L_t, L_t);
        for (int n = 0; n < N; ++n) {
            Eigen::VectorXd d = data.T.row(n).transpose() - mean;
            cov += r.r(n, k) * (d * d.transpose());
        }
        upd.c_t[k] = mean;
        scatter[k] = symmetrize(cov / rk);
    }
    upd.Gamma_t = project_constraint(scatter, gamma_constraint, upd.pi);
    for (auto& g : upd.Gamma_t)
        g = floor_covariance(g, gamma_constraint.structure);
    return upd;
}

MappingUpdate m_mapping_step(const Responsibilities& r, const LatentPosterior& post_w,
                             const Dataset& data, const GLLiMParams& theta,
                             const ConstraintSpec& sigma_constraint) {
    const int K = static_cast<int>(r.r.cols());
    const int N = data.N();
    const int L_t = theta.L_t;
    const int L_w = theta.L_w;
    const int L = L_t + L_w;
    const int D = data.D();
    if (L_w > 0 && post_w.empty())
        throw InvalidParametersError("m_mapping_step: missing latent posterior");

    MappingUpdate upd;
    upd.A.resize(K);
    upd.b.resize(K);
    upd.Sigma.resize(K);
    std::vector<Eigen::MatrixXd> sigma_raw(K);
    for (int k = 0; k < K; ++k) {
        const double rk = r.r_col[k];

        // Imputed regressors x_nk = [t_n; mu^w_nk] and their weighted moments.
        Eigen::MatrixXd X(L, N);
        for (int n = 0; n < N; ++n) {
            if (L_t > 0)
                X.block(0, n, L_t, 1) = data.T.row(n).transpose();
            if (L_w > 0)
                X.block(L_t, n, L_w, 1) = post_w.mu_w[k].row(n).transpose();
        }
        Eigen::VectorXd w = (r.r.col(k) / rk).cwiseSqrt();
        Eigen::VectorXd xbar = Eigen::VectorXd::Zero(L);
        Eigen::VectorXd ybar = Eigen::VectorXd::Zero(D);
        for (int n = 0; n < N; ++n) {
            xbar += (r.r(n, k) / rk) * X.col(n);
            ybar += (r.r(n, k) / rk) * data.Y.row(n).transpose();
        }
        Eigen::MatrixXd Xc(L, N), Yc(D, N);
        for (int n = 0; n < N; ++n) {
            Xc.col(n) = w[n] * (X.col(n) - xbar);
            Yc.col(n) = w[n] * (data.Y.row(n).transpose() - ybar);
        }

        Eigen::MatrixXd gram = Xc * Xc.transpose();
        if (L_w > 0)
            gram.bottomRightCorner(L_w, L_w) += post_w.S_w[k];
        gram = symmetrize(gram);
        gram += (1e-10 * gram.trace() / L) * Eigen::MatrixXd::Identity(L, L);
        Eigen::LLT<Eigen::MatrixXd> gram_chol(gram);
        if (gram_chol.info() != Eigen::Success)
            throw IllConditionedError("m_mapping_step: rank-deficient regressors in component " +
                                      std::to_string(k));
        upd.A[k] = gram_chol.solve((Yc * Xc.transpose()).transpose()).transpose();
        upd.b[k] = ybar - upd.A[k] * xbar;

        Eigen::MatrixXd resid_cov = Eigen::MatrixXd::Zero(D, D);
        for (int n = 0; n < N; ++n) {
            Eigen::VectorXd e = data.Y.row(n).transpose() - upd.A[k] * X.col(n) - upd.b[k];
            resid_cov += (r.r(n, k) / rk) * (e * e.transpose());
        }
        if (L_w > 0) {
            Eigen::MatrixXd Aw = upd.A[k].rightCols(L_w);
            resid_cov += Aw * post_w.S_w[k] * Aw.transpose();
        }
        sigma_raw[k] = symmetrize(resid_cov);
    }
    upd.Sigma = project_constraint(sigma_raw, sigma_constraint,
                                   r.r_col / static_cast<double>(N));
    for (auto& s : upd.Sigma)
        s = floor_covariance(s, sigma_constraint.structure);
    return upd;
}

namespace {

// Drops the listed components and renormalizes the priors.
GLLiMParams remove_components(const GLLiMParams& theta, const std::vector<bool>& keep) {
    int kept = 0;
    for (bool k : keep)
        kept += k ? 1 : 0;
    if (kept == 0)
        throw FitError("all mixture components were removed");
    GLLiMParams out = theta;
    out.K = kept;
    out.pi.resize(kept);
    out.c.clear();
    out.Gamma.clear();
    out.A.clear();
    out.b.clear();
    out.Sigma.clear();
    int j = 0;
    for (int k = 0; k < theta.K; ++k) {
        if (!keep[k])
            continue;
        out.pi[j++] = theta.pi[k];
        out.c.push_back(theta.c[k]);
        out.Gamma.push_back(theta.Gamma[k]);
        out.A.push_back(theta.A[k]);
        out.b.push_back(theta.b[k]);
        out.Sigma.push_back(theta.Sigma[k]);
    }
    out.pi /= out.pi.sum();
    return out;
}

} // namespace

FitResult fit(const Dataset& data, const GLLiMParams& theta0, const FitConfig& config) {
    data.validate();
    theta0.validate();
    if (config.max_iter < 1)
        throw InvalidParametersError("fit: max_iter must be at least 1");

    GLLiMParams theta = theta0;
    theta.constraint_sigma = config.constraint_sigma;
    theta.constraint_gamma = config.constraint_gamma;

    FitResult result;
    FitReport& report = result.report;
    const double removal_threshold = std::max<double>(theta.L() + 1, 3.0);
    std::vector<int> floor_hits(theta.K, 0);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        Responsibilities resp = e_z_step(theta, data);
        report.underflow_rows += resp.underflow_rows;

        // Degenerate components: too few effective samples, or a t-covariance
        // repeatedly collapsed to the eigenvalue floor.
        std::vector<bool> keep(theta.K, true);
        bool removed = false;
        for (int k = 0; k < theta.K; ++k) {
            if (resp.r_col[k] < removal_threshold || floor_hits[k] >= 2) {
                keep[k] = false;
                removed = true;
            }
        }
        if (removed) {
            int before = theta.K;
            theta = remove_components(theta, keep);
            report.removed_components += before - theta.K;
            std::vector<int> kept_hits;
            for (int k = 0; k < before; ++k)
                if (keep[k])
                    kept_hits.push_back(floor_hits[k]);
            floor_hits = kept_hits;
            resp = e_z_step(theta, data);
        }

        LatentPosterior post_w = e_w_step(theta, data);
        GmmUpdate gmm = m_gmm_step(resp, data, config.constraint_gamma);
        MappingUpdate mapping =
            m_mapping_step(resp, post_w, data, theta, config.constraint_sigma);

        theta.pi = gmm.pi;
        for (int k = 0; k < theta.K; ++k) {
            if (theta.L_t > 0) {
                theta.c[k].head(theta.L_t) = gmm.c_t[k];
                // Track covariances that needed the floor, for the removal rule.
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
                    gmm.Gamma_t[k], Eigen::EigenvaluesOnly);
                double floor =
                    kSpdFloorRel * gmm.Gamma_t[k].trace() / std::max(theta.L_t, 1);
                if (eig.eigenvalues().minCoeff() <= floor * (1.0 + 1e-6))
                    ++floor_hits[k];
                else
                    floor_hits[k] = 0;
                theta.Gamma[k].topLeftCorner(theta.L_t, theta.L_t) = gmm.Gamma_t[k];
            }
            theta.A[k] = mapping.A[k];
            theta.b[k] = mapping.b[k];
            theta.Sigma[k] = mapping.Sigma[k];
        }

        double ll = log_likelihood(theta, data);
        if (!std::isfinite(ll))
            throw FitError("non-finite log-likelihood at iteration " + std::to_string(iter));
        report.loglik_trace.push_back(ll);
        report.iterations = iter;
        if (config.trace_sink)
            config.trace_sink(iter, ll, theta.K);

        if (iter > 1 && std::isfinite(prev_ll)) {
            double rel = (ll - prev_ll) / std::abs(prev_ll);
            if (rel < config.rel_tol && !removed) {
                report.converged = true;
                prev_ll = ll;
                break;
            }
        }
        prev_ll = ll;
    }

    report.K_effective = theta.K;
    report.final_loglik = prev_ll;
    result.theta = theta;
    return result;
}

FitResult fit(const Dataset& data, int L_w, const Responsibilities& r0,
              const FitConfig& config) {
    GLLiMParams theta0 = marginal_m_pass(r0, data, L_w, config.constraint_sigma,
                                         config.constraint_gamma);
    return fit(data, theta0, config);
}

} // namespace gllim
