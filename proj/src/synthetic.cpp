#include "gllim/synthetic.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "gllim/errors.hpp"
#include "gllim/model.hpp"

namespace gllim {

FunctionKind function_kind_from_string(const std::string& s) {
    if (s == "f")
        return FunctionKind::F;
    if (s == "g")
        return FunctionKind::G;
    if (s == "h")
        return FunctionKind::H;
    throw InvalidParametersError("unknown function kind '" + s + "' (expected f, g or h)");
}

std::string to_string(FunctionKind kind) {
    switch (kind) {
    case FunctionKind::F: return "f";
    case FunctionKind::G: return "g";
    case FunctionKind::H: return "h";
    }
    return "?";
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = seed;
    h ^= (a + 0x9e3779b97f4a7c15ULL) + (h << 6) + (h >> 2);
    h ^= (b + 0x9e3779b97f4a7c15ULL) + (h << 6) + (h >> 2);
    return h;
}

} // namespace

SyntheticFunctionSpec gen_function(FunctionKind kind, int D, std::uint64_t seed) {
    if (D < 1)
        throw InvalidParametersError("gen_function: D must be at least 1");
    SyntheticFunctionSpec spec;
    spec.kind = kind;
    spec.D = D;
    spec.seed = seed;
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(kind)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    spec.alpha.resize(D);
    spec.eta.resize(D);
    spec.phi.resize(D);
    spec.beta.resize(D);
    spec.gamma.resize(D);
    for (int d = 0; d < D; ++d) {
        spec.alpha[d] = 2.0 * u01(rng);
        spec.eta[d] = 4.0 * M_PI * u01(rng);
        spec.phi[d] = 2.0 * M_PI * u01(rng);
        spec.beta[d] = M_PI * u01(rng);
        spec.gamma[d] = 2.0 * u01(rng);
    }
    return spec;
}

Eigen::VectorXd evaluate_function(const SyntheticFunctionSpec& spec, double t,
                                  const Eigen::VectorXd& w) {
    if (w.size() != spec.latent_dim())
        throw DimensionError("evaluate_function: expected latent dimension " +
                             std::to_string(spec.latent_dim()) + ", got " +
                             std::to_string(w.size()));
    Eigen::VectorXd y(spec.D);
    for (int d = 0; d < spec.D; ++d) {
        switch (spec.kind) {
        case FunctionKind::F:
            y[d] = spec.alpha[d] * std::cos(spec.eta[d] * t / 10.0 + spec.phi[d]) +
                   spec.gamma[d] * w[0] * w[0] * w[0];
            break;
        case FunctionKind::G:
            y[d] = spec.alpha[d] *
                   std::cos(spec.eta[d] * t / 10.0 + spec.beta[d] * w[0] + spec.phi[d]);
            break;
        case FunctionKind::H:
            y[d] = spec.alpha[d] *
                       std::cos(spec.eta[d] * t / 10.0 + spec.beta[d] * w[0] + spec.phi[d]) +
                   spec.gamma[d] * w[1] * w[1] * w[1];
            break;
        }
    }
    return y;
}

Dataset sample_dataset(const SyntheticFunctionSpec& spec, int N, double snr_db,
                       std::uint64_t seed) {
    if (N < 1)
        throw InvalidParametersError("sample_dataset: N must be at least 1");
    const int L_w = spec.latent_dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t_dist(0.0, 10.0);
    std::uniform_real_distribution<double> w_dist(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset data;
    data.T.resize(N, 1);
    data.Y.resize(N, spec.D);
    Eigen::MatrixXd W(N, L_w);
    for (int n = 0; n < N; ++n) {
        data.T(n, 0) = t_dist(rng);
        for (int j = 0; j < L_w; ++j)
            W(n, j) = w_dist(rng);
        data.Y.row(n) = evaluate_function(spec, data.T(n, 0), W.row(n).transpose()).transpose();
    }
    data.Wtrue = W;

    if (std::isfinite(snr_db)) {
        Eigen::MatrixXd noise(N, spec.D);
        for (int n = 0; n < N; ++n)
            for (int d = 0; d < spec.D; ++d)
                noise(n, d) = gauss(rng);
        // Scale the noise so the realized aggregate ratio of signal energy to
        // noise energy equals the requested SNR exactly.
        double signal_energy = data.Y.squaredNorm();
        double noise_energy = noise.squaredNorm();
        double ratio = std::pow(10.0, snr_db / 10.0);
        double scale = std::sqrt(signal_energy / (noise_energy * ratio));
        data.Y += scale * noise;
    }
    return data;
}

Metrics compute_metrics(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& truth,
                        double extreme_threshold) {
    if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols())
        throw DimensionError("compute_metrics: prediction/truth shape mismatch");
    const int N = static_cast<int>(truth.rows());
    if (N < 2)
        throw InvalidParametersError("compute_metrics: need at least 2 samples");

    Eigen::VectorXd errors = (predictions - truth).rowwise().norm();
    Metrics m;
    m.avg = errors.mean();
    m.std_dev = std::sqrt((errors.array() - m.avg).square().sum() / N);
    m.extreme_rate =
        static_cast<double>((errors.array() > extreme_threshold).count()) / N;

    m.nrmse.resize(truth.cols());
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        double mean = truth.col(j).mean();
        double denom = (truth.col(j).array() - mean).square().sum();
        if (denom <= 0.0)
            throw InvalidParametersError("compute_metrics: constant truth column " +
                                         std::to_string(j) + ", NRMSE undefined");
        m.nrmse[j] = std::sqrt((predictions.col(j) - truth.col(j)).squaredNorm() / denom);
    }
    return m;
}

std::string BenchmarkReport::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "method,function_kind,avg,std,extreme_rate,n_trials,n_failures\n";
    for (const auto& row : rows)
        out << row.method << ',' << to_string(row.kind) << ',' << row.avg << ','
            << row.std_dev << ',' << row.extreme_rate << ',' << row.n_trials << ','
            << row.n_failures << '\n';
    return out.str();
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    if (config.n_functions < 1 || config.N < 1 || config.N_test < 1 || config.K < 1)
        throw InvalidParametersError("run_benchmark: all counts must be at least 1");
    if (config.lw_list.empty())
        throw InvalidParametersError("run_benchmark: empty method list");

    const std::size_t n_methods = config.lw_list.size();
    // Pooled absolute errors per method, in trial order.
    std::vector<std::vector<Eigen::VectorXd>> errors(n_methods,
                                                     std::vector<Eigen::VectorXd>(
                                                         config.n_functions));
    std::vector<std::vector<bool>> failed(n_methods,
                                          std::vector<bool>(config.n_functions, false));

    auto run_trial = [&](int trial) {
        SyntheticFunctionSpec spec =
            gen_function(config.kind, config.D, config.seed + static_cast<std::uint64_t>(trial));
        Dataset train = sample_dataset(spec, config.N, config.snr_db,
                                       mix_seed(config.seed, trial, 1));
        Dataset test = sample_dataset(spec, config.N_test, config.snr_db,
                                      mix_seed(config.seed, trial, 2));
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            const int lw = config.lw_list[mi];
            try {
                InitConfig init_cfg = config.init;
                init_cfg.constraint_sigma = config.fit.constraint_sigma;
                init_cfg.constraint_gamma = config.fit.constraint_gamma;
                GLLiMParams theta0 = initialize(train, config.K, lw,
                                                mix_seed(config.seed, trial, 10 + lw), init_cfg);
                FitResult fitted = fit(train, theta0, config.fit);
                ForwardParams fwd = derive_forward(fitted.theta);
                Eigen::VectorXd errs(config.N_test);
                for (int n = 0; n < config.N_test; ++n) {
                    Expectation pred = forward_expectation(fwd, test.Y.row(n).transpose());
                    errs[n] = std::abs(pred.value[0] - test.T(n, 0));
                }
                errors[mi][trial] = std::move(errs);
            } catch (const std::exception&) {
                failed[mi][trial] = true;
            }
        }
    };

    const int threads = std::max(1, config.threads);
    if (threads == 1) {
        for (int trial = 0; trial < config.n_functions; ++trial)
            run_trial(trial);
    } else {
        for (int start = 0; start < config.n_functions; start += threads) {
            std::vector<std::thread> pool;
            for (int trial = start; trial < std::min(config.n_functions, start + threads);
                 ++trial)
                pool.emplace_back(run_trial, trial);
            for (auto& t : pool)
                t.join();
        }
    }

    BenchmarkReport report;
    report.trial_avg.resize(config.n_functions, n_methods);
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
        const int lw = config.lw_list[mi];
        BenchmarkRow row;
        row.method = lw == 0 ? "MLE" : "hGLLiM-" + std::to_string(lw);
        row.kind = config.kind;
        std::vector<double> pooled;
        for (int trial = 0; trial < config.n_functions; ++trial) {
            if (failed[mi][trial]) {
                ++row.n_failures;
                report.trial_avg(trial, mi) = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            ++row.n_trials;
            const Eigen::VectorXd& errs = errors[mi][trial];
            report.trial_avg(trial, mi) = errs.mean();
            pooled.insert(pooled.end(), errs.data(), errs.data() + errs.size());
        }
        if (!pooled.empty()) {
            Eigen::Map<Eigen::VectorXd> e(pooled.data(), pooled.size());
            row.avg = e.mean();
            row.std_dev = std::sqrt((e.array() - row.avg).square().sum() / e.size());
            row.extreme_rate = static_cast<double>(
                                   (e.array() > Metrics::kDefaultExtremeThreshold).count()) /
                               e.size();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace gllim
