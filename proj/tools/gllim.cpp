#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gllim/dataset.hpp"
#include "gllim/em.hpp"
#include "gllim/errors.hpp"
#include "gllim/init.hpp"
#include "gllim/model.hpp"
#include "gllim/model_io.hpp"
#include "gllim/selection.hpp"
#include "gllim/synthetic.hpp"

namespace {

using nlohmann::json;

void write_text_atomic(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw gllim::ParseError("cannot write '" + tmp + "'");
        out << text;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw gllim::ParseError("cannot rename '" + tmp + "' to '" + path + "'");
}

std::vector<int> parse_lw_range(const std::string& text) {
    std::vector<int> out;
    std::size_t dash = text.find('-');
    if (dash != std::string::npos && dash > 0) {
        int lo = std::stoi(text.substr(0, dash));
        int hi = std::stoi(text.substr(dash + 1));
        for (int v = lo; v <= hi; ++v)
            out.push_back(v);
        return out;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos)
            comma = text.size();
        out.push_back(std::stoi(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

int default_threads() {
    if (const char* env = std::getenv("GLLIM_THREADS"))
        return std::max(1, std::atoi(env));
    return 1;
}

struct CommonOpts {
    std::string train_t, train_y;
    int K = 5;
    std::string sigma_constraint = "iso,shared";
    std::string gamma_constraint = "full";
    std::uint64_t seed = 0;
    int max_iter = 200;
    double tol = 1e-6;
    bool standardize = false;
    bool header = false;
    int threads = default_threads();
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_data = true) {
    if (with_data) {
        cmd->add_option("--train-t", opts.train_t,
                        "CSV of observed responses (omit for unsupervised)");
        cmd->add_option("--train-y", opts.train_y, "CSV of observations")->required();
        cmd->add_option("-K,--components", opts.K, "number of mixture components");
        cmd->add_flag("--standardize", opts.standardize,
                      "standardize columns to zero mean, unit variance");
        cmd->add_flag("--header", opts.header, "skip the first CSV line");
    }
    cmd->add_option("--sigma-constraint", opts.sigma_constraint,
                    "noise covariance constraint: {iso,diag,full}[,shared]");
    cmd->add_option("--gamma-constraint", opts.gamma_constraint,
                    "prior covariance constraint: {iso,diag,full}[,shared]");
    cmd->add_option("--seed", opts.seed, "base RNG seed");
    cmd->add_option("--max-iter", opts.max_iter, "EM iteration cap");
    cmd->add_option("--tol", opts.tol, "relative log-likelihood convergence tolerance");
    cmd->add_option("--threads", opts.threads, "parallelism cap (1 = deterministic)");
}

gllim::FitConfig make_fit_config(const CommonOpts& opts) {
    gllim::FitConfig cfg;
    cfg.max_iter = opts.max_iter;
    cfg.rel_tol = opts.tol;
    cfg.constraint_sigma = gllim::ConstraintSpec::parse(opts.sigma_constraint);
    cfg.constraint_gamma = gllim::ConstraintSpec::parse(opts.gamma_constraint);
    return cfg;
}

json report_to_json(const gllim::FitReport& report) {
    json j;
    j["iterations"] = report.iterations;
    j["K_effective"] = report.K_effective;
    j["converged"] = report.converged;
    j["final_loglik"] = report.final_loglik;
    j["final_bic"] = report.final_bic;
    j["removed_components"] = report.removed_components;
    j["underflow_rows"] = report.underflow_rows;
    j["loglik_trace"] = report.loglik_trace;
    return j;
}

int run_fit(const CommonOpts& opts, int lw, const std::string& model_path,
            const std::string& trace_path) {
    gllim::Dataset data = gllim::load_dataset(opts.train_t, opts.train_y, opts.header);
    gllim::ModelFile model;
    if (opts.standardize) {
        model.standardize_y = gllim::Standardizer::fit(data.Y);
        data.Y = model.standardize_y->apply(data.Y);
        if (data.L_t() > 0) {
            model.standardize_t = gllim::Standardizer::fit(data.T);
            data.T = model.standardize_t->apply(data.T);
        }
    }

    gllim::FitConfig fit_cfg = make_fit_config(opts);
    std::ofstream trace_file;
    if (!trace_path.empty()) {
        trace_file.open(trace_path);
        fit_cfg.trace_sink = [&trace_file](int iter, double ll, int k_eff) {
            trace_file << iter << ' ' << std::setprecision(17) << ll << ' ' << k_eff << '\n';
        };
    }

    gllim::InitConfig init_cfg;
    init_cfg.constraint_sigma = fit_cfg.constraint_sigma;
    init_cfg.constraint_gamma = fit_cfg.constraint_gamma;
    gllim::GLLiMParams theta0 = gllim::initialize(data, opts.K, lw, opts.seed, init_cfg);
    gllim::FitResult result = gllim::fit(data, theta0, fit_cfg);
    result.report.final_bic =
        gllim::bic(result.theta, result.report.final_loglik, data.N());

    model.theta = result.theta;
    gllim::save_model(model_path, model);
    write_text_atomic(model_path + ".report.json", report_to_json(result.report).dump(2) + "\n");
    std::cout << "fit: N=" << data.N() << " D=" << data.D() << " L_t=" << data.L_t()
              << " L_w=" << lw << " K_effective=" << result.report.K_effective
              << " loglik=" << result.report.final_loglik
              << " bic=" << result.report.final_bic << '\n';
    return 0;
}

int run_predict(const std::string& model_path, const std::string& y_path,
                const std::string& out_path, bool header) {
    gllim::ModelFile model = gllim::load_model(model_path);
    Eigen::MatrixXd Y = gllim::load_csv_matrix(y_path, header);
    if (Y.cols() != model.theta.D)
        throw gllim::DimensionError("predict: CSV has " + std::to_string(Y.cols()) +
                                    " columns but the model expects " +
                                    std::to_string(model.theta.D));
    if (model.standardize_y)
        Y = model.standardize_y->apply(Y);

    gllim::ForwardParams fwd = gllim::derive_forward(model.theta);
    Eigen::MatrixXd That(Y.rows(), model.theta.L_t);
    int degenerate = 0;
    for (Eigen::Index n = 0; n < Y.rows(); ++n) {
        gllim::Expectation pred = gllim::forward_expectation(fwd, Y.row(n).transpose());
        That.row(n) = pred.value.head(model.theta.L_t).transpose();
        degenerate += pred.degenerate ? 1 : 0;
    }
    if (model.standardize_t)
        That = model.standardize_t->invert(That);
    gllim::save_csv_matrix(out_path, That);
    std::cout << "predict: wrote " << That.rows() << " rows to " << out_path;
    if (degenerate > 0)
        std::cout << " (" << degenerate << " degenerate queries)";
    std::cout << '\n';
    return 0;
}

int run_select(const CommonOpts& opts, const std::string& lw_range_text,
               const std::string& out_path) {
    gllim::Dataset data = gllim::load_dataset(opts.train_t, opts.train_y, opts.header);
    if (opts.standardize) {
        data.Y = gllim::Standardizer::fit(data.Y).apply(data.Y);
        if (data.L_t() > 0)
            data.T = gllim::Standardizer::fit(data.T).apply(data.T);
    }
    gllim::SelectConfig cfg;
    cfg.fit = make_fit_config(opts);
    cfg.seed = opts.seed;
    cfg.threads = opts.threads;
    gllim::SelectionResult result =
        gllim::select_lw(data, opts.K, parse_lw_range(lw_range_text), cfg);
    write_text_atomic(out_path, result.to_csv());
    std::cout << "select-lw: chose L_w=" << result.chosen_lw << ", wrote " << out_path << '\n';
    return 0;
}

int run_bench(const CommonOpts& opts, const std::string& kind, int n_functions, int D, int N,
              int n_test, double snr_db, const std::string& lw_list_text,
              const std::string& out_path, const std::string& manifest_path) {
    gllim::BenchmarkConfig cfg;
    cfg.kind = gllim::function_kind_from_string(kind);
    cfg.n_functions = n_functions;
    cfg.D = D;
    cfg.N = N;
    cfg.N_test = n_test;
    cfg.snr_db = snr_db;
    cfg.K = opts.K;
    cfg.lw_list = parse_lw_range(lw_list_text);
    cfg.seed = opts.seed;
    cfg.threads = opts.threads;
    cfg.fit = make_fit_config(opts);

    gllim::BenchmarkReport report = gllim::run_benchmark(cfg);
    write_text_atomic(out_path, report.to_csv());
    if (!manifest_path.empty()) {
        json manifest;
        manifest["kind"] = kind;
        manifest["n_functions"] = n_functions;
        manifest["D"] = D;
        manifest["N"] = N;
        manifest["N_test"] = n_test;
        manifest["snr_db"] = snr_db;
        manifest["K"] = opts.K;
        manifest["lw_list"] = cfg.lw_list;
        manifest["seed"] = opts.seed;
        manifest["threads"] = opts.threads;
        manifest["sigma_constraint"] = opts.sigma_constraint;
        manifest["gamma_constraint"] = opts.gamma_constraint;
        manifest["max_iter"] = opts.max_iter;
        manifest["tol"] = opts.tol;
        manifest["report_csv"] = out_path;
        write_text_atomic(manifest_path, manifest.dump(2) + "\n");
    }
    for (const auto& row : report.rows)
        std::cout << row.method << ": avg=" << row.avg << " std=" << row.std_dev
                  << " ex=" << row.extreme_rate << " failures=" << row.n_failures << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locally-linear Gaussian mapping: inverse-regression training, "
                 "forward prediction, latent-dimension selection, synthetic benchmarks"};
    app.require_subcommand(1);

    CommonOpts fit_opts;
    int fit_lw = 0;
    std::string fit_model = "model.json", fit_trace;
    CLI::App* fit_cmd = app.add_subcommand("fit", "train a model and write it as JSON");
    add_common(fit_cmd, fit_opts);
    fit_cmd->add_option("--lw", fit_lw, "latent response dimension");
    fit_cmd->add_option("--model", fit_model, "output model path");
    fit_cmd->add_option("--trace", fit_trace, "optional per-iteration trace file");

    std::string pred_model, pred_y, pred_out = "predictions.csv";
    bool pred_header = false;
    CLI::App* pred_cmd = app.add_subcommand("predict", "predict t from observations");
    pred_cmd->add_option("--model", pred_model, "model JSON path")->required();
    pred_cmd->add_option("--test-y", pred_y, "CSV of observations")->required();
    pred_cmd->add_option("--out", pred_out, "output CSV path");
    pred_cmd->add_flag("--header", pred_header, "skip the first CSV line");

    CommonOpts sel_opts;
    std::string sel_range = "0-4", sel_out = "selection.csv";
    CLI::App* sel_cmd = app.add_subcommand("select-lw", "choose the latent dimension by BIC");
    add_common(sel_cmd, sel_opts);
    sel_cmd->add_option("--lw-range", sel_range, "candidates, e.g. 0-4 or 0,1,3");
    sel_cmd->add_option("--out", sel_out, "output CSV path");

    CommonOpts bench_opts;
    std::string bench_kind = "f", bench_lw_list = "0,1", bench_out = "benchmark.csv",
                bench_manifest = "benchmark_manifest.json";
    int bench_funcs = 10, bench_D = 50, bench_N = 200, bench_Ntest = 200;
    double bench_snr = 6.0;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run the synthetic benchmark");
    add_common(bench_cmd, bench_opts, /*with_data=*/false);
    bench_cmd->add_option("-K,--components", bench_opts.K, "number of mixture components");
    bench_cmd->add_option("--kind", bench_kind, "function family: f, g or h");
    bench_cmd->add_option("--n-functions", bench_funcs, "number of function draws");
    bench_cmd->add_option("-D,--dim", bench_D, "observation dimension");
    bench_cmd->add_option("-N,--n-train", bench_N, "training samples per function");
    bench_cmd->add_option("--n-test", bench_Ntest, "test samples per function");
    bench_cmd->add_option("--snr", bench_snr, "signal-to-noise ratio in dB");
    bench_cmd->add_option("--lw-list", bench_lw_list, "latent dimensions to fit (0 = MLE)");
    bench_cmd->add_option("--out", bench_out, "report CSV path");
    bench_cmd->add_option("--manifest", bench_manifest, "run manifest JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed())
            return run_fit(fit_opts, fit_lw, fit_model, fit_trace);
        if (pred_cmd->parsed())
            return run_predict(pred_model, pred_y, pred_out, pred_header);
        if (sel_cmd->parsed())
            return run_select(sel_opts, sel_range, sel_out);
        if (bench_cmd->parsed())
            return run_bench(bench_opts, bench_kind, bench_funcs, bench_D, bench_N,
                             bench_Ntest, bench_snr, bench_lw_list, bench_out,
                             bench_manifest);
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = typeid(e).name();
        err["message"] = e.what();
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 2;
}
