#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gllim/dataset.hpp"
#include "gllim/em.hpp"
#include "gllim/init.hpp"

namespace gllim {

enum class FunctionKind { F, G, H };

FunctionKind function_kind_from_string(const std::string& s);
std::string to_string(FunctionKind kind);

// A randomly drawn member of one of the three test function families
// mapping (t, w) to a D-dimensional observation.
struct SyntheticFunctionSpec {
    FunctionKind kind = FunctionKind::F;
    int D = 1;
    std::uint64_t seed = 0;
    Eigen::VectorXd alpha;  // [0, 2]
    Eigen::VectorXd eta;    // [0, 4 pi]
    Eigen::VectorXd phi;    // [0, 2 pi]
    Eigen::VectorXd beta;   // [0, pi], unused by f
    Eigen::VectorXd gamma;  // [0, 2], unused by g

    int latent_dim() const { return kind == FunctionKind::H ? 2 : 1; }
};

SyntheticFunctionSpec gen_function(FunctionKind kind, int D, std::uint64_t seed);

Eigen::VectorXd evaluate_function(const SyntheticFunctionSpec& spec, double t,
                                  const Eigen::VectorXd& w);

// Use as snr_db for a noise-free dataset.
constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

// Draws t ~ U[0,10], w ~ U[-1,1]^Lw, adds isotropic Gaussian noise scaled so
// the realized aggregate SNR 10 log10(sum ||y||^2 / sum ||e||^2) equals snr_db
// exactly. Ground-truth w is kept in Wtrue.
Dataset sample_dataset(const SyntheticFunctionSpec& spec, int N, double snr_db,
                       std::uint64_t seed);

struct Metrics {
    double avg = 0.0;           // mean absolute error
    double std_dev = 0.0;
    double extreme_rate = 0.0;  // fraction of errors strictly above the threshold
    Eigen::VectorXd nrmse;      // per response coordinate

    static constexpr double kDefaultExtremeThreshold = 10.0 / 3.0;
};

Metrics compute_metrics(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& truth,
                        double extreme_threshold = Metrics::kDefaultExtremeThreshold);

struct BenchmarkConfig {
    FunctionKind kind = FunctionKind::F;
    int n_functions = 10;
    int D = 50;
    int N = 200;
    int N_test = 200;
    double snr_db = 6.0;
    int K = 5;
    std::vector<int> lw_list = {0, 1};
    std::uint64_t seed = 0;
    int threads = 1;
    FitConfig fit;
    InitConfig init;
};

struct BenchmarkRow {
    std::string method;
    FunctionKind kind;
    double avg = 0.0;
    double std_dev = 0.0;
    double extreme_rate = 0.0;
    int n_trials = 0;
    int n_failures = 0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;  // one per method, lw_list order
    // Per-trial, per-method mean absolute error (NaN on failure); trials in
    // seed order, methods in lw_list order.
    Eigen::MatrixXd trial_avg;

    std::string to_csv() const;
};

// Fits hGLLiM-L_w for each configured latent dimension on freshly sampled
// train/test pairs and aggregates the error metrics across function draws.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

} // namespace gllim
