#include "gllim/selection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "gllim/errors.hpp"

namespace gllim {

namespace {

long long covariance_count(int P, int K, const ConstraintSpec& spec) {
    if (spec.fixed)
        return 0;
    long long per = 0;
    switch (spec.structure) {
    case CovStructure::Full: per = static_cast<long long>(P) * (P + 1) / 2; break;
    case CovStructure::Diagonal: per = P; break;
    case CovStructure::Isotropic: per = 1; break;
    }
    return spec.shared ? per : per * K;
}

} // namespace

long long parameter_count(int K, int D, int L_t, int L_w,
                          const ConstraintSpec& sigma_constraint,
                          const ConstraintSpec& gamma_constraint,
                          RegressionDirection direction) {
    if (K < 1 || D < 1 || L_t < 0 || L_w < 0 || L_t + L_w < 1)
        throw InvalidParametersError("parameter_count: invalid dimensions");
    const int L = L_t + L_w;
    if (direction == RegressionDirection::HighToLow) {
        // Directly-parameterized high-to-low model: full D x D prior
        // covariances, isotropic shared noise on the L-dimensional response.
        if (L_w != 0)
            throw InvalidParametersError(
                "parameter_count: high-to-low direction has no latent split");
        return (K - 1)                                              // priors
               + static_cast<long long>(K) * D                      // c*
               + static_cast<long long>(K) * D * (D + 1) / 2        // Gamma*
               + static_cast<long long>(K) * L * D                  // A*
               + static_cast<long long>(K) * L                      // b*
               + 1;                                                 // shared iso Sigma*
    }
    // c^w and Gamma^w are fixed for identifiability and carry no free parameters.
    return (K - 1)                                      // priors
           + static_cast<long long>(K) * L_t            // c^t
           + covariance_count(L_t, K, gamma_constraint) // Gamma^t
           + static_cast<long long>(K) * D * L          // A
           + static_cast<long long>(K) * D              // b
           + covariance_count(D, K, sigma_constraint);  // Sigma
}

long long parameter_count(const GLLiMParams& theta) {
    return parameter_count(theta.K, theta.D, theta.L_t, theta.L_w, theta.constraint_sigma,
                           theta.constraint_gamma);
}

double bic(const GLLiMParams& theta, double loglik, long long n_samples) {
    if (n_samples < 1)
        throw InvalidParametersError("bic: N must be at least 1");
    return -2.0 * loglik +
           static_cast<double>(parameter_count(theta)) * std::log(static_cast<double>(n_samples));
}

std::string SelectionResult::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "L_w,loglik,param_count,bic,iterations,K_effective,chosen\n";
    for (const auto& rec : records) {
        out << rec.L_w << ',';
        if (rec.failed)
            out << "nan,0,nan,0,0,0\n";
        else
            out << rec.loglik << ',' << rec.param_count << ',' << rec.bic_value << ','
                << rec.iterations << ',' << rec.K_effective << ','
                << (rec.L_w == chosen_lw ? 1 : 0) << '\n';
    }
    return out.str();
}

SelectionResult select_lw(const Dataset& data, int K, const std::vector<int>& lw_range,
                          const SelectConfig& config) {
    if (lw_range.empty())
        throw InvalidParametersError("select_lw: empty candidate range");
    for (int lw : lw_range)
        if (lw < 0 || lw >= data.D())
            throw InvalidParametersError("select_lw: candidate L_w " + std::to_string(lw) +
                                         " outside [0, D)");

    std::vector<int> candidates = lw_range;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    SelectionResult result;
    result.records.resize(candidates.size());
    std::vector<std::optional<GLLiMParams>> thetas(candidates.size());

    auto run_one = [&](std::size_t i) {
        CandidateRecord rec;
        rec.L_w = candidates[i];
        try {
            // Deterministic per-candidate sub-seed so the sweep is parallel-safe.
            std::uint64_t sub_seed =
                config.seed + 0x100000001b3ULL * static_cast<std::uint64_t>(rec.L_w + 1);
            InitConfig init_cfg = config.init;
            init_cfg.constraint_sigma = config.fit.constraint_sigma;
            init_cfg.constraint_gamma = config.fit.constraint_gamma;
            GLLiMParams theta0 = initialize(data, K, rec.L_w, sub_seed, init_cfg);
            FitResult fitted = fit(data, theta0, config.fit);
            rec.loglik = fitted.report.final_loglik;
            rec.param_count = parameter_count(fitted.theta);
            rec.bic_value = bic(fitted.theta, rec.loglik, data.N());
            rec.iterations = fitted.report.iterations;
            rec.K_effective = fitted.report.K_effective;
            thetas[i] = std::move(fitted.theta);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        result.records[i] = std::move(rec);
    };

    const int threads = std::max(1, config.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i)
            run_one(i);
    } else {
        for (std::size_t start = 0; start < candidates.size();
             start += static_cast<std::size_t>(threads)) {
            std::vector<std::thread> pool;
            for (std::size_t i = start;
                 i < std::min(candidates.size(), start + static_cast<std::size_t>(threads)); ++i)
                pool.emplace_back(run_one, i);
            for (auto& t : pool)
                t.join();
        }
    }

    double best_bic = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& rec = result.records[i];
        if (rec.failed)
            continue;
        // Strict comparison with ascending candidates: ties keep the smaller L_w.
        if (rec.bic_value < best_bic) {
            best_bic = rec.bic_value;
            result.chosen_lw = rec.L_w;
            result.chosen_theta = thetas[i];
        }
    }
    if (result.chosen_lw < 0)
        throw FitError("select_lw: every candidate fit failed");
    return result;
}

} // namespace gllim
