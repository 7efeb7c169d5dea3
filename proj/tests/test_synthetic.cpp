#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gllim/errors.hpp"
#include "gllim/synthetic.hpp"
#include "helpers.hpp"

using namespace gllim;

TEST_CASE("function kind string conversion") {
    CHECK(function_kind_from_string("f") == FunctionKind::F);
    CHECK(function_kind_from_string("g") == FunctionKind::G);
    CHECK(function_kind_from_string("h") == FunctionKind::H);
    CHECK(to_string(FunctionKind::G) == "g");
    CHECK_THROWS_AS(function_kind_from_string("x"), InvalidParametersError);
}

TEST_CASE("gen_function draws coefficients in the documented ranges") {
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        SyntheticFunctionSpec spec = gen_function(FunctionKind::H, 40, seed);
        CHECK(spec.D == 40);
        CHECK(spec.latent_dim() == 2);
        for (int d = 0; d < 40; ++d) {
            CHECK(spec.alpha[d] >= 0.0);
            CHECK(spec.alpha[d] <= 2.0);
            CHECK(spec.eta[d] >= 0.0);
            CHECK(spec.eta[d] <= 4.0 * M_PI);
            CHECK(spec.phi[d] >= 0.0);
            CHECK(spec.phi[d] <= 2.0 * M_PI);
            CHECK(spec.beta[d] >= 0.0);
            CHECK(spec.beta[d] <= M_PI);
            CHECK(spec.gamma[d] >= 0.0);
            CHECK(spec.gamma[d] <= 2.0);
        }
    }

    // Deterministic per seed, different across seeds and kinds.
    SyntheticFunctionSpec a = gen_function(FunctionKind::F, 10, 5);
    SyntheticFunctionSpec b = gen_function(FunctionKind::F, 10, 5);
    CHECK((a.alpha - b.alpha).norm() == 0.0);
    SyntheticFunctionSpec c = gen_function(FunctionKind::F, 10, 6);
    CHECK((a.alpha - c.alpha).norm() != 0.0);
    SyntheticFunctionSpec d = gen_function(FunctionKind::G, 10, 5);
    CHECK((a.alpha - d.alpha).norm() != 0.0);

    CHECK_THROWS_AS(gen_function(FunctionKind::F, 0, 1), InvalidParametersError);
    CHECK(gen_function(FunctionKind::F, 3, 0).latent_dim() == 1);
}

TEST_CASE("evaluate_function computes the three families coordinate-wise") {
    SyntheticFunctionSpec spec = gen_function(FunctionKind::F, 5, 7);
    double t = 3.7;
    Eigen::VectorXd w(1);
    w << 0.4;
    Eigen::VectorXd y = evaluate_function(spec, t, w);
    for (int d = 0; d < 5; ++d) {
        double want = spec.alpha[d] * std::cos(spec.eta[d] * t / 10.0 + spec.phi[d]) +
                      spec.gamma[d] * 0.4 * 0.4 * 0.4;
        CHECK(y[d] == doctest::Approx(want).epsilon(1e-15));
    }

    spec.kind = FunctionKind::G;
    y = evaluate_function(spec, t, w);
    for (int d = 0; d < 5; ++d) {
        double want =
            spec.alpha[d] * std::cos(spec.eta[d] * t / 10.0 + spec.beta[d] * 0.4 + spec.phi[d]);
        CHECK(y[d] == doctest::Approx(want).epsilon(1e-15));
    }

    spec.kind = FunctionKind::H;
    Eigen::VectorXd w2(2);
    w2 << 0.4, -0.3;
    y = evaluate_function(spec, t, w2);
    for (int d = 0; d < 5; ++d) {
        double want =
            spec.alpha[d] *
                std::cos(spec.eta[d] * t / 10.0 + spec.beta[d] * 0.4 + spec.phi[d]) +
            spec.gamma[d] * (-0.3) * (-0.3) * (-0.3);
        CHECK(y[d] == doctest::Approx(want).epsilon(1e-15));
    }

    CHECK_THROWS_AS(evaluate_function(spec, t, w), DimensionError);
}

TEST_CASE("sample_dataset hits the requested SNR exactly") {
    SyntheticFunctionSpec spec = gen_function(FunctionKind::G, 12, 3);
    for (double snr : {-10.0, 0.0, 6.0, 20.0}) {
        Dataset data = sample_dataset(spec, 300, snr, 17);
        REQUIRE(data.Wtrue.has_value());
        CHECK(data.T.minCoeff() >= 0.0);
        CHECK(data.T.maxCoeff() <= 10.0);
        CHECK(data.Wtrue->minCoeff() >= -1.0);
        CHECK(data.Wtrue->maxCoeff() <= 1.0);

        // Recompute the clean signal from the stored latent draws and check
        // the realized energy ratio.
        double signal = 0.0, noise = 0.0;
        for (int n = 0; n < 300; ++n) {
            Eigen::VectorXd clean =
                evaluate_function(spec, data.T(n, 0), data.Wtrue->row(n).transpose());
            signal += clean.squaredNorm();
            noise += (data.Y.row(n).transpose() - clean).squaredNorm();
        }
        double realized = 10.0 * std::log10(signal / noise);
        CHECK(realized == doctest::Approx(snr).epsilon(1e-10));
    }

    Dataset clean = sample_dataset(spec, 50, kNoiselessSnr, 17);
    for (int n = 0; n < 50; ++n) {
        Eigen::VectorXd want =
            evaluate_function(spec, clean.T(n, 0), clean.Wtrue->row(n).transpose());
        CHECK((clean.Y.row(n).transpose() - want).norm() == 0.0);
    }

    CHECK_THROWS_AS(sample_dataset(spec, 0, 6.0, 1), InvalidParametersError);
}

TEST_CASE("compute_metrics matches hand-computed values") {
    Eigen::MatrixXd truth(4, 1), pred(4, 1);
    truth << 1.0, 2.0, 3.0, 4.0;
    pred << 1.5, 2.0, 3.0, 0.0;  // errors 0.5, 0, 0, 4
    Metrics m = compute_metrics(pred, truth);
    CHECK(m.avg == doctest::Approx(4.5 / 4.0).epsilon(1e-14));
    double mean = 4.5 / 4.0;
    double var = (std::pow(0.5 - mean, 2) + 2.0 * mean * mean + std::pow(4.0 - mean, 2)) / 4.0;
    CHECK(m.std_dev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    // Only the error of 4 exceeds the 10/3 threshold.
    CHECK(m.extreme_rate == doctest::Approx(0.25));

    double denom = 0.0;
    for (int n = 0; n < 4; ++n)
        denom += std::pow(truth(n, 0) - 2.5, 2);
    CHECK(m.nrmse[0] ==
          doctest::Approx(std::sqrt((0.25 + 16.0) / denom)).epsilon(1e-12));

    // Threshold comparison is strict.
    Eigen::MatrixXd at(2, 1), base(2, 1);
    base << 0.0, 1.0;
    at << 10.0 / 3.0, 1.0;
    CHECK(compute_metrics(at, base).extreme_rate == 0.0);
    CHECK(compute_metrics(at, base, 3.0).extreme_rate == doctest::Approx(0.5));

    CHECK_THROWS_AS(compute_metrics(pred, truth.topRows(3)), DimensionError);
    CHECK_THROWS_AS(compute_metrics(pred.topRows(1), truth.topRows(1)),
                    InvalidParametersError);
    Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(4, 1);
    CHECK_THROWS_AS(compute_metrics(pred, constant), InvalidParametersError);
}

TEST_CASE("perfect predictions give zero metrics") {
    std::mt19937_64 rng(51);
    Eigen::MatrixXd truth = oracle::random_matrix(20, 3, rng);
    Metrics m = compute_metrics(truth, truth);
    CHECK(m.avg == 0.0);
    CHECK(m.std_dev == 0.0);
    CHECK(m.extreme_rate == 0.0);
    CHECK(m.nrmse.norm() == 0.0);
}

TEST_CASE("run_benchmark aggregates per-method errors and stays deterministic") {
    BenchmarkConfig cfg;
    cfg.kind = FunctionKind::F;
    cfg.n_functions = 2;
    cfg.D = 8;
    cfg.N = 120;
    cfg.N_test = 60;
    cfg.snr_db = 10.0;
    cfg.K = 4;
    cfg.lw_list = {0, 1};
    cfg.seed = 3;
    cfg.fit.max_iter = 40;

    BenchmarkReport a = run_benchmark(cfg);
    REQUIRE(a.rows.size() == 2);
    CHECK(a.rows[0].method == "MLE");
    CHECK(a.rows[1].method == "hGLLiM-1");
    CHECK(a.trial_avg.rows() == 2);
    CHECK(a.trial_avg.cols() == 2);
    for (const auto& row : a.rows) {
        CHECK(row.n_trials == 2);
        CHECK(row.n_failures == 0);
        CHECK(row.avg > 0.0);
        CHECK(std::isfinite(row.std_dev));
        CHECK(row.extreme_rate >= 0.0);
        CHECK(row.extreme_rate <= 1.0);
    }

    cfg.threads = 2;
    BenchmarkReport b = run_benchmark(cfg);
    CHECK(a.rows[0].avg == b.rows[0].avg);
    CHECK(a.rows[1].avg == b.rows[1].avg);
    CHECK((a.trial_avg - b.trial_avg).norm() == 0.0);

    std::string csv = a.to_csv();
    CHECK(csv.find("method,function_kind") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    BenchmarkConfig bad = cfg;
    bad.lw_list.clear();
    CHECK_THROWS_AS(run_benchmark(bad), InvalidParametersError);
    bad = cfg;
    bad.n_functions = 0;
    CHECK_THROWS_AS(run_benchmark(bad), InvalidParametersError);
}

TEST_CASE("run_benchmark counts per-trial failures instead of aborting") {
    BenchmarkConfig cfg;
    cfg.kind = FunctionKind::F;
    cfg.n_functions = 2;
    cfg.D = 6;
    cfg.N = 8;  // far too small for K components with a latent block
    cfg.N_test = 10;
    cfg.snr_db = 10.0;
    cfg.K = 4;
    cfg.lw_list = {4};
    cfg.seed = 1;
    cfg.fit.max_iter = 10;
    BenchmarkReport report = run_benchmark(cfg);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].n_failures == 2);
    CHECK(report.rows[0].n_trials == 0);
    CHECK(std::isnan(report.trial_avg(0, 0)));
}
