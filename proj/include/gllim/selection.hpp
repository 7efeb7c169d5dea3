#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gllim/em.hpp"
#include "gllim/init.hpp"

namespace gllim {

enum class RegressionDirection { LowToHigh, HighToLow };

// Free-parameter count of the mixture model. Counts K-1 free priors, the
// per-component GMM block on the observed response, the affine maps, and the
// covariance families under their structural constraints. HighToLow counts the
// directly-parameterized swap (full D x D priors covariance, isotropic shared
// noise on the response), matching the tractability comparison it supports.
// Unsupported combinations throw rather than return a wrong count.
long long parameter_count(int K, int D, int L_t, int L_w,
                          const ConstraintSpec& sigma_constraint,
                          const ConstraintSpec& gamma_constraint,
                          RegressionDirection direction = RegressionDirection::LowToHigh);

long long parameter_count(const GLLiMParams& theta);

// -2 loglik + parameter_count * log N.
double bic(const GLLiMParams& theta, double loglik, long long n_samples);

struct CandidateRecord {
    int L_w = 0;
    double loglik = 0.0;
    long long param_count = 0;
    double bic_value = 0.0;
    int iterations = 0;
    int K_effective = 0;
    bool failed = false;
    std::string error;
};

struct SelectionResult {
    std::vector<CandidateRecord> records;  // one per requested L_w, ascending
    int chosen_lw = -1;
    std::optional<GLLiMParams> chosen_theta;

    std::string to_csv() const;
};

struct SelectConfig {
    FitConfig fit;
    InitConfig init;
    std::uint64_t seed = 0;
    int threads = 1;
};

// Fits one model per candidate latent dimension and picks the BIC minimizer;
// ties go to the smaller L_w. Per-candidate failures are recorded, and an
// error is raised only when every candidate fails.
SelectionResult select_lw(const Dataset& data, int K, const std::vector<int>& lw_range,
                          const SelectConfig& config);

} // namespace gllim
