#include "gllim/init.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "gllim/errors.hpp"
#include "gllim/gaussian.hpp"

namespace gllim {

RegressionUpdate m_regression_step(const Responsibilities& r, const Dataset& data) {
    const int K = static_cast<int>(r.r.cols());
    const int N = data.N();
    const int L_t = data.L_t();
    const int D = data.D();

    RegressionUpdate upd;
    upd.A_t.resize(K);
    upd.b.resize(K);
    for (int k = 0; k < K; ++k) {
        const double rk = r.r_col[k];
        Eigen::VectorXd ybar = Eigen::VectorXd::Zero(D);
        for (int n = 0; n < N; ++n)
            ybar += (r.r(n, k) / rk) * data.Y.row(n).transpose();
        if (L_t == 0) {
            upd.A_t[k].resize(D, 0);
            upd.b[k] = ybar;
            continue;
        }
        Eigen::VectorXd tbar = Eigen::VectorXd::Zero(L_t);
        for (int n = 0; n < N; ++n)
            tbar += (r.r(n, k) / rk) * data.T.row(n).transpose();
        Eigen::MatrixXd Tc(L_t, N), Yc(D, N);
        for (int n = 0; n < N; ++n) {
            double w = std::sqrt(r.r(n, k) / rk);
            Tc.col(n) = w * (data.T.row(n).transpose() - tbar);
            Yc.col(n) = w * (data.Y.row(n).transpose() - ybar);
        }
        Eigen::MatrixXd gram = symmetrize(Tc * Tc.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(gram.trace() / L_t, 1.0))
            throw IllConditionedError(
                "m_regression_step: singular weighted Gram in component " + std::to_string(k));
        upd.A_t[k] = gram.llt().solve(Tc * Yc.transpose()).transpose();
        upd.b[k] = ybar - upd.A_t[k] * tbar;
    }
    return upd;
}

std::vector<Eigen::MatrixXd> component_residuals(const Responsibilities& r,
                                                 const Dataset& data,
                                                 const RegressionUpdate& reg) {
    const int K = static_cast<int>(r.r.cols());
    const int N = data.N();
    const int D = data.D();
    std::vector<Eigen::MatrixXd> residuals(K);
    for (int k = 0; k < K; ++k) {
        residuals[k].resize(D, N);
        for (int n = 0; n < N; ++n) {
            Eigen::VectorXd u = data.Y.row(n).transpose() - reg.b[k];
            if (data.L_t() > 0)
                u -= reg.A_t[k] * data.T.row(n).transpose();
            residuals[k].col(n) = std::sqrt(r.r(n, k) / r.r_col[k]) * u;
        }
    }
    return residuals;
}

ResidualUpdate m_residual_step(const std::vector<Eigen::MatrixXd>& residuals, int L_w) {
    const int K = static_cast<int>(residuals.size());
    if (K == 0)
        throw InvalidParametersError("m_residual_step: no residual blocks");
    const int D = static_cast<int>(residuals[0].rows());
    if (L_w >= D)
        throw InvalidParametersError("m_residual_step: requires L_w < D");

    ResidualUpdate upd;
    upd.A_w.resize(K);
    upd.sigma2.resize(K);
    upd.stats.C.resize(K);
    upd.stats.eigvals.resize(K);
    upd.stats.U.resize(K);
    upd.stats.Lambda.resize(K);
    for (int k = 0; k < K; ++k) {
        Eigen::MatrixXd C = symmetrize(residuals[k] * residuals[k].transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
        // Eigen returns ascending order; flip to descending.
        Eigen::VectorXd vals = eig.eigenvalues().reverse().cwiseMax(0.0);
        Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();
        // Sign convention: largest-magnitude entry of each eigenvector positive.
        for (int j = 0; j < vecs.cols(); ++j) {
            Eigen::Index imax = 0;
            vecs.col(j).cwiseAbs().maxCoeff(&imax);
            if (vecs(imax, j) < 0.0)
                vecs.col(j) = -vecs.col(j);
        }

        double sigma2 = vals.tail(D - L_w).sum() / static_cast<double>(D - L_w);
        sigma2 = std::max(sigma2, kSpdFloorRel * std::max(C.trace() / D, 0.0));

        Eigen::MatrixXd A_w(D, L_w);
        for (int j = 0; j < L_w; ++j) {
            double excess = vals[j] - sigma2;
            if (excess < 0.0) {
                A_w.col(j).setZero();
                ++upd.clamped_columns;
            } else {
                A_w.col(j) = vecs.col(j) * std::sqrt(excess);
            }
        }
        upd.A_w[k] = A_w;
        upd.sigma2[k] = sigma2;
        upd.stats.C[k] = C;
        upd.stats.eigvals[k] = vals;
        upd.stats.U[k] = vecs.leftCols(L_w);
        upd.stats.Lambda[k] = vals.head(L_w);
    }
    return upd;
}

double residual_objective(double sigma2, const Eigen::MatrixXd& A_w,
                          const Eigen::MatrixXd& residuals) {
    const int D = static_cast<int>(residuals.rows());
    Eigen::MatrixXd M = sigma2 * Eigen::MatrixXd::Identity(D, D);
    if (A_w.cols() > 0)
        M += A_w * A_w.transpose();
    auto chol = spd_cholesky(M, "residual objective covariance");
    double log_det = 2.0 * chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double quad = 0.0;
    for (Eigen::Index n = 0; n < residuals.cols(); ++n)
        quad += chol.matrixL().solve(residuals.col(n)).squaredNorm();
    return -0.5 * (log_det + quad);
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed, int restarts,
                    int max_iter) {
    const int N = static_cast<int>(points.rows());
    const int P = static_cast<int>(points.cols());
    if (K < 1 || K > N)
        throw InvalidParametersError("kmeans: need 1 <= K <= N");

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < restarts; ++restart) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(restart) * 0x9e3779b97f4a7c15ULL);

        // k-means++ seeding
        Eigen::MatrixXd centers(K, P);
        std::uniform_int_distribution<int> first(0, N - 1);
        centers.row(0) = points.row(first(rng));
        Eigen::VectorXd dist2 =
            (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
        for (int k = 1; k < K; ++k) {
            double total = dist2.sum();
            int pick = 0;
            if (total > 0.0) {
                std::uniform_real_distribution<double> u(0.0, total);
                double target = u(rng);
                double acc = 0.0;
                for (int n = 0; n < N; ++n) {
                    acc += dist2[n];
                    if (acc >= target) {
                        pick = n;
                        break;
                    }
                }
            } else {
                pick = first(rng);
            }
            centers.row(k) = points.row(pick);
            dist2 = dist2.cwiseMin(
                (points.rowwise() - centers.row(k)).rowwise().squaredNorm());
        }

        Eigen::VectorXi labels = Eigen::VectorXi::Zero(N);
        double inertia = 0.0;
        for (int iter = 0; iter < max_iter; ++iter) {
            bool changed = false;
            inertia = 0.0;
            for (int n = 0; n < N; ++n) {
                int arg = 0;
                double bestd = std::numeric_limits<double>::infinity();
                for (int k = 0; k < K; ++k) {
                    double d = (points.row(n) - centers.row(k)).squaredNorm();
                    if (d < bestd) {
                        bestd = d;
                        arg = k;
                    }
                }
                if (labels[n] != arg) {
                    labels[n] = arg;
                    changed = true;
                }
                inertia += bestd;
            }
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, P);
            Eigen::VectorXi counts = Eigen::VectorXi::Zero(K);
            for (int n = 0; n < N; ++n) {
                sums.row(labels[n]) += points.row(n);
                ++counts[labels[n]];
            }
            for (int k = 0; k < K; ++k) {
                if (counts[k] == 0) {
                    // Re-seat an empty center at the point farthest from its center.
                    int far = 0;
                    double fard = -1.0;
                    for (int n = 0; n < N; ++n) {
                        double d = (points.row(n) - centers.row(labels[n])).squaredNorm();
                        if (d > fard) {
                            fard = d;
                            far = n;
                        }
                    }
                    centers.row(k) = points.row(far);
                    changed = true;
                } else {
                    centers.row(k) = sums.row(k) / counts[k];
                }
            }
            if (!changed && iter > 0)
                break;
        }
        if (inertia < best.inertia) {
            best.labels = labels;
            best.centers = centers;
            best.inertia = inertia;
        }
    }
    return best;
}

Responsibilities initial_responsibilities(const Dataset& data, int K, std::uint64_t seed,
                                          const InitConfig& config) {
    Eigen::MatrixXd features;
    if (config.cluster_on_joint || data.L_t() == 0) {
        features.resize(data.N(), data.D() + data.L_t());
        features.leftCols(data.D()) = data.Y;
        if (data.L_t() > 0)
            features.rightCols(data.L_t()) = data.T;
    } else {
        features = data.T;
    }
    features = Standardizer::fit(features).apply(features);

    KMeansResult km = kmeans(features, K, seed, config.kmeans_restarts);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(data.N(), K);
    for (int n = 0; n < data.N(); ++n)
        r(n, km.labels[n]) = 1.0;
    return Responsibilities::from_matrix(std::move(r));
}

GLLiMParams marginal_m_pass(const Responsibilities& r, const Dataset& data, int L_w,
                            const ConstraintSpec& constraint_sigma,
                            const ConstraintSpec& constraint_gamma) {
    const int K = static_cast<int>(r.r.cols());
    const int L_t = data.L_t();
    const int D = data.D();

    GLLiMParams theta = GLLiMParams::zeros(K, D, L_t, L_w);
    theta.constraint_sigma = constraint_sigma;
    theta.constraint_gamma = constraint_gamma;

    GmmUpdate gmm = m_gmm_step(r, data, constraint_gamma);
    theta.pi = gmm.pi;
    RegressionUpdate reg = m_regression_step(r, data);
    ResidualUpdate res = m_residual_step(component_residuals(r, data, reg), L_w);

    std::vector<Eigen::MatrixXd> sigma(K);
    for (int k = 0; k < K; ++k) {
        if (L_t > 0) {
            theta.c[k].head(L_t) = gmm.c_t[k];
            theta.Gamma[k].topLeftCorner(L_t, L_t) = gmm.Gamma_t[k];
            theta.A[k].leftCols(L_t) = reg.A_t[k];
        }
        if (L_w > 0)
            theta.A[k].rightCols(L_w) = res.A_w[k];
        theta.b[k] = reg.b[k];
        sigma[k] = res.sigma2[k] * Eigen::MatrixXd::Identity(D, D);
    }
    theta.Sigma = project_constraint(sigma, constraint_sigma, theta.pi);
    return theta;
}

GLLiMParams initialize(const Dataset& data, int K, int L_w, std::uint64_t seed,
                       const InitConfig& config) {
    data.validate();
    if (K < 1)
        throw InvalidParametersError("initialize: K must be at least 1");
    std::string last_error;
    for (int attempt = 0; attempt <= config.reseed_limit; ++attempt) {
        try {
            Responsibilities r0 = initial_responsibilities(
                data, K, seed + static_cast<std::uint64_t>(attempt) * 1000003ULL, config);
            GLLiMParams theta = marginal_m_pass(r0, data, L_w, config.constraint_sigma,
                                                config.constraint_gamma);
            theta.validate();
            return theta;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw FitError("initialize: failed after " + std::to_string(config.reseed_limit + 1) +
                   " attempts (" + last_error + ")");
}

} // namespace gllim
