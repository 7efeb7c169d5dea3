#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gllim/errors.hpp"
#include "gllim/selection.hpp"
#include "gllim/synthetic.hpp"
#include "helpers.hpp"

using namespace gllim;

TEST_CASE("parameter_count reproduces the reference anchors") {
    // Low-to-high with K=10, L=2, D=1000 and shared isotropic noise.
    CHECK(parameter_count(10, 1000, 2, 0, ConstraintSpec::isotropic(true),
                          ConstraintSpec::full()) == 30060);
    // The directly-parameterized high-to-low counterpart.
    CHECK(parameter_count(10, 1000, 2, 0, ConstraintSpec::isotropic(true),
                          ConstraintSpec::full(), RegressionDirection::HighToLow) ==
          5035030);
    // Minimal model: K=1, D=1, L_t=1.
    CHECK(parameter_count(1, 1, 1, 0, ConstraintSpec::isotropic(true),
                          ConstraintSpec::full()) == 5);
}

TEST_CASE("parameter_count composes from hand-counted blocks") {
    // K=3, D=4, L_t=2, L_w=1 (L=3), full Gamma on t, per-component diagonal Sigma:
    // priors 2, means 3*2, Gamma 3*3, A 3*4*3, b 3*4, Sigma 3*4.
    CHECK(parameter_count(3, 4, 2, 1, ConstraintSpec::diagonal(), ConstraintSpec::full()) ==
          2 + 6 + 9 + 36 + 12 + 12);
    // Same with full shared Sigma: covariance block is 4*5/2 = 10.
    CHECK(parameter_count(3, 4, 2, 1, ConstraintSpec::parse("full,shared"),
                          ConstraintSpec::full()) == 2 + 6 + 9 + 36 + 12 + 10);
    // Isotropic per-component Gamma on t: 3 instead of 9.
    CHECK(parameter_count(3, 4, 2, 1, ConstraintSpec::diagonal(),
                          ConstraintSpec::isotropic()) == 2 + 6 + 3 + 36 + 12 + 12);
    // Fixed covariances contribute nothing.
    CHECK(parameter_count(3, 4, 2, 1,
                          ConstraintSpec::fixed_at(Eigen::MatrixXd::Identity(4, 4)),
                          ConstraintSpec::full()) == 2 + 6 + 9 + 36 + 12);
    // Unsupervised: no observed-response block at all.
    CHECK(parameter_count(2, 3, 0, 2, ConstraintSpec::isotropic(true),
                          ConstraintSpec::full()) == 1 + 0 + 0 + 12 + 6 + 1);

    CHECK_THROWS_AS(parameter_count(3, 4, 2, 1, ConstraintSpec::isotropic(true),
                                    ConstraintSpec::full(),
                                    RegressionDirection::HighToLow),
                    InvalidParametersError);
    CHECK_THROWS_AS(parameter_count(0, 4, 2, 0, ConstraintSpec::full(),
                                    ConstraintSpec::full()),
                    InvalidParametersError);
}

TEST_CASE("parameter_count(theta) uses the stored constraints") {
    std::mt19937_64 rng(41);
    GLLiMParams theta = oracle::random_params(3, 4, 2, 1, rng);
    theta.constraint_sigma = ConstraintSpec::diagonal();
    theta.constraint_gamma = ConstraintSpec::full();
    CHECK(parameter_count(theta) == parameter_count(3, 4, 2, 1, theta.constraint_sigma,
                                                    theta.constraint_gamma));
}

TEST_CASE("bic formula") {
    std::mt19937_64 rng(42);
    GLLiMParams theta = oracle::random_params(2, 3, 1, 0, rng);
    theta.constraint_sigma = ConstraintSpec::isotropic(true);
    long long d = parameter_count(theta);
    double want = -2.0 * (-123.5) + static_cast<double>(d) * std::log(50.0);
    CHECK(bic(theta, -123.5, 50) == doctest::Approx(want).epsilon(1e-14));
    CHECK_THROWS_AS(bic(theta, -1.0, 0), InvalidParametersError);
}

TEST_CASE("bic penalty grows monotonically in the latent dimension") {
    long long prev = -1;
    for (int lw = 0; lw < 5; ++lw) {
        long long d = parameter_count(5, 20, 1, lw, ConstraintSpec::isotropic(true),
                                      ConstraintSpec::full());
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("select_lw picks the BIC minimizer on latent-structured data") {
    SyntheticFunctionSpec spec = gen_function(FunctionKind::F, 20, 12);
    Dataset data = sample_dataset(spec, 220, 6.0, 21);
    SelectConfig cfg;
    cfg.fit.max_iter = 80;
    cfg.seed = 5;
    SelectionResult result = select_lw(data, 6, {0, 1, 2}, cfg);

    REQUIRE(result.records.size() == 3);
    CHECK(result.records[0].L_w == 0);
    CHECK(result.records[1].L_w == 1);
    CHECK(result.records[2].L_w == 2);
    double best_bic = std::numeric_limits<double>::infinity();
    for (const auto& rec : result.records) {
        CHECK_FALSE(rec.failed);
        CHECK(rec.param_count > 0);
        CHECK(std::isfinite(rec.bic_value));
        best_bic = std::min(best_bic, rec.bic_value);
    }
    int chosen_idx = -1;
    for (std::size_t i = 0; i < result.records.size(); ++i)
        if (result.records[i].L_w == result.chosen_lw)
            chosen_idx = static_cast<int>(i);
    REQUIRE(chosen_idx >= 0);
    CHECK(result.records[chosen_idx].bic_value == doctest::Approx(best_bic));
    REQUIRE(result.chosen_theta.has_value());
    CHECK(result.chosen_theta->L_w == result.chosen_lw);

    // The report serializes with one line per candidate plus a header.
    std::string csv = result.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("bic") != std::string::npos);
}

TEST_CASE("select_lw deduplicates candidates and rejects invalid ones") {
    SyntheticFunctionSpec spec = gen_function(FunctionKind::F, 5, 2);
    Dataset data = sample_dataset(spec, 120, 10.0, 4);
    SelectConfig cfg;
    cfg.fit.max_iter = 40;

    SelectionResult result = select_lw(data, 3, {1, 0, 1, 2, 0}, cfg);
    REQUIRE(result.records.size() == 3);
    CHECK(result.records[0].L_w == 0);
    CHECK(result.records[1].L_w == 1);
    CHECK(result.records[2].L_w == 2);

    // Candidates outside [0, D) are malformed input, not fit failures.
    CHECK_THROWS_AS(select_lw(data, 3, {0, 5}, cfg), InvalidParametersError);
    CHECK_THROWS_AS(select_lw(data, 3, {-1}, cfg), InvalidParametersError);
    CHECK_THROWS_AS(select_lw(data, 3, {}, cfg), InvalidParametersError);
}

TEST_CASE("select_lw records per-candidate fit failures without sinking the sweep") {
    // Two tight blobs of four samples each: with L_w = 4 every component needs
    // at least L + 1 = 6 effective samples, so both starve and that candidate
    // fails, while L_w = 0 still fits.
    std::mt19937_64 rng(44);
    Dataset data;
    data.T.resize(8, 1);
    data.Y.resize(8, 6);
    for (int n = 0; n < 8; ++n) {
        double mode = n < 4 ? -3.0 : 3.0;
        data.T(n, 0) = mode + 0.01 * oracle::random_vector(1, rng)[0];
        data.Y.row(n) =
            (Eigen::VectorXd::Constant(6, mode) + 0.01 * oracle::random_vector(6, rng))
                .transpose();
    }
    SelectConfig cfg;
    cfg.fit.max_iter = 20;
    SelectionResult result = select_lw(data, 2, {0, 4}, cfg);
    REQUIRE(result.records.size() == 2);
    CHECK_FALSE(result.records[0].failed);
    CHECK(result.records[1].failed);
    CHECK_FALSE(result.records[1].error.empty());
    CHECK(result.chosen_lw == 0);

    // Every candidate failing is a hard error.
    CHECK_THROWS_AS(select_lw(data, 2, {4, 5}, cfg), FitError);
}

TEST_CASE("select_lw is deterministic for a fixed seed, threaded or not") {
    SyntheticFunctionSpec spec = gen_function(FunctionKind::F, 8, 6);
    Dataset data = sample_dataset(spec, 150, 8.0, 14);
    SelectConfig cfg;
    cfg.fit.max_iter = 40;
    cfg.seed = 9;
    SelectionResult serial = select_lw(data, 4, {0, 1, 2}, cfg);
    cfg.threads = 3;
    SelectionResult threaded = select_lw(data, 4, {0, 1, 2}, cfg);
    REQUIRE(serial.records.size() == threaded.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        CHECK(serial.records[i].loglik == threaded.records[i].loglik);
        CHECK(serial.records[i].bic_value == threaded.records[i].bic_value);
    }
    CHECK(serial.chosen_lw == threaded.chosen_lw);
}
