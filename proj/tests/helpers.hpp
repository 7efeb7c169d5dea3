#pragma once

// Shared oracles for the test suites. Everything here is deliberately written
// the slow, obvious way (scalar loops, hand-rolled elimination, quadrature,
// simplex search) so it shares no code path with the library under test.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gllim/params.hpp"

namespace oracle {

// Gauss-Jordan inverse with partial pivoting; also returns log|M|.
inline Eigen::MatrixXd gauss_jordan_inverse(Eigen::MatrixXd m, double* log_det = nullptr) {
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
    double ld = 0.0;
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(pivot, col)))
                pivot = r;
        if (std::abs(m(pivot, col)) < 1e-300)
            throw std::runtime_error("oracle: singular matrix");
        if (pivot != col) {
            m.row(pivot).swap(m.row(col));
            inv.row(pivot).swap(inv.row(col));
            sign = -sign;
        }
        const double p = m(col, col);
        ld += std::log(std::abs(p));
        if (p < 0)
            sign = -sign;
        m.row(col) /= p;
        inv.row(col) /= p;
        for (int r = 0; r < n; ++r) {
            if (r == col)
                continue;
            const double f = m(r, col);
            m.row(r) -= f * m.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    if (sign < 0)
        throw std::runtime_error("oracle: negative determinant for a covariance");
    if (log_det)
        *log_det = ld;
    return inv;
}

// Scalar-loop Gaussian log-density.
inline double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov) {
    const int d = static_cast<int>(x.size());
    double log_det = 0.0;
    Eigen::MatrixXd prec = gauss_jordan_inverse(cov, &log_det);
    double quad = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            quad += (x[i] - mean[i]) * prec(i, j) * (x[j] - mean[j]);
    return -0.5 * (d * std::log(2.0 * M_PI) + log_det + quad);
}

// Conditional of a joint Gaussian on [a; b]: distribution of the first p
// coordinates given the trailing q coordinates equal `b_value`.
struct Conditional {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

inline Conditional condition_first_given_second(const Eigen::VectorXd& m,
                                                const Eigen::MatrixXd& V, int p, int q,
                                                const Eigen::VectorXd& b_value) {
    Eigen::MatrixXd V11 = V.topLeftCorner(p, p);
    Eigen::MatrixXd V12 = V.topRightCorner(p, q);
    Eigen::MatrixXd V22 = V.bottomRightCorner(q, q);
    Eigen::MatrixXd V22inv = gauss_jordan_inverse(V22);
    Conditional out;
    out.mean = m.head(p) + V12 * V22inv * (b_value - m.tail(q));
    out.cov = V11 - V12 * V22inv * V12.transpose();
    return out;
}

inline Eigen::MatrixXd random_spd(int dim, std::mt19937_64& rng, double jitter = 0.5) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = gauss(rng);
    return a * a.transpose() / dim + jitter * Eigen::MatrixXd::Identity(dim, dim);
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            a(i, j) = gauss(rng);
    return a;
}

inline Eigen::VectorXd random_vector(int size, std::mt19937_64& rng) {
    return random_matrix(size, 1, rng).col(0);
}

// A random fully-valid parameter set with block-diagonal Gamma and the latent
// block pinned to its canonical value.
inline gllim::GLLiMParams random_params(int K, int D, int L_t, int L_w,
                                        std::mt19937_64& rng) {
    gllim::GLLiMParams t = gllim::GLLiMParams::zeros(K, D, L_t, L_w);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int k = 0; k < K; ++k)
        t.pi[k] = u(rng);
    t.pi /= t.pi.sum();
    for (int k = 0; k < K; ++k) {
        t.c[k].head(L_t) = random_vector(L_t, rng);
        if (L_t > 0)
            t.Gamma[k].topLeftCorner(L_t, L_t) = random_spd(L_t, rng);
        t.A[k] = random_matrix(D, L_t + L_w, rng);
        t.b[k] = random_vector(D, rng);
        t.Sigma[k] = random_spd(D, rng, 0.3);
    }
    return t;
}

// Draws one sample from the generative process of theta; returns (x, y).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_joint(
    const gllim::GLLiMParams& t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double target = u01(rng);
    int k = 0;
    double acc = 0.0;
    for (; k < t.K - 1; ++k) {
        acc += t.pi[k];
        if (target <= acc)
            break;
    }
    const int L = t.L();
    Eigen::LLT<Eigen::MatrixXd> gamma_chol(t.Gamma[k]);
    Eigen::VectorXd z(L);
    for (int i = 0; i < L; ++i)
        z[i] = gauss(rng);
    Eigen::VectorXd x = t.c[k] + gamma_chol.matrixL() * z;
    Eigen::LLT<Eigen::MatrixXd> sigma_chol(t.Sigma[k]);
    Eigen::VectorXd e(t.D);
    for (int i = 0; i < t.D; ++i)
        e[i] = gauss(rng);
    Eigen::VectorXd y = t.A[k] * x + t.b[k] + sigma_chol.matrixL() * e;
    return {x, y};
}

// Composite Simpson quadrature on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals = 2000) {
    if (intervals % 2 != 0)
        ++intervals;
    const double h = (b - a) / intervals;
    double sum = f(a) + f(b);
    for (int i = 1; i < intervals; ++i)
        sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// Plain Nelder-Mead minimizer, used to cross-check closed-form maximizers by
// seeding the simplex at (and around) the candidate optimum.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& start, double step = 0.05,
                                   int max_iter = 4000, double tol = 1e-12) {
    const int n = static_cast<int>(start.size());
    std::vector<Eigen::VectorXd> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    for (int i = 0; i < n; ++i)
        pts[i + 1][i] += step;
    for (int i = 0; i <= n; ++i)
        vals[i] = f(pts[i]);

    for (int iter = 0; iter < max_iter; ++iter) {
        // Order the simplex.
        std::vector<int> idx(n + 1);
        for (int i = 0; i <= n; ++i)
            idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        std::vector<Eigen::VectorXd> sp(n + 1);
        std::vector<double> sv(n + 1);
        for (int i = 0; i <= n; ++i) {
            sp[i] = pts[idx[i]];
            sv[i] = vals[idx[i]];
        }
        pts = sp;
        vals = sv;
        if (std::abs(vals[n] - vals[0]) < tol * (std::abs(vals[0]) + tol))
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i)
            centroid += pts[i];
        centroid /= n;

        Eigen::VectorXd refl = centroid + (centroid - pts[n]);
        double frefl = f(refl);
        if (frefl < vals[0]) {
            Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - pts[n]);
            double fexp = f(exp_pt);
            if (fexp < frefl) {
                pts[n] = exp_pt;
                vals[n] = fexp;
            } else {
                pts[n] = refl;
                vals[n] = frefl;
            }
        } else if (frefl < vals[n - 1]) {
            pts[n] = refl;
            vals[n] = frefl;
        } else {
            Eigen::VectorXd contr = centroid + 0.5 * (pts[n] - centroid);
            double fcontr = f(contr);
            if (fcontr < vals[n]) {
                pts[n] = contr;
                vals[n] = fcontr;
            } else {
                for (int i = 1; i <= n; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (vals[i] < vals[best])
            best = i;
    return pts[best];
}

} // namespace oracle
