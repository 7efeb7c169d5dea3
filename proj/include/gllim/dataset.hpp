#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

namespace gllim {

// Training data: rows are samples. T holds the observed part of the response
// (may have zero columns in the unsupervised case), Y the high-dimensional
// observations. Wtrue is only ever filled by synthetic generators, for
// diagnostics against ground truth.
struct Dataset {
    Eigen::MatrixXd T;  // N x L_t
    Eigen::MatrixXd Y;  // N x D
    std::optional<Eigen::MatrixXd> Wtrue;  // N x L_w, synthetic runs only

    int N() const { return static_cast<int>(Y.rows()); }
    int L_t() const { return static_cast<int>(T.cols()); }
    int D() const { return static_cast<int>(Y.cols()); }

    void validate() const;
};

// Per-column affine standardization (x - shift) / scale, invertible at
// prediction time. Columns with zero variance keep scale 1.
struct Standardizer {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& x) const;

    static Standardizer fit(const Eigen::MatrixXd& x);
    static Standardizer identity(int cols);
};

// Headerless numeric CSV (optionally skipping one header line). Errors carry
// the 1-based line number.
Eigen::MatrixXd load_csv_matrix(const std::string& path, bool skip_header = false);
void save_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Loads a dataset from CSV files; path_t empty means L_t = 0.
Dataset load_dataset(const std::string& path_t, const std::string& path_y,
                     bool skip_header = false);

} // namespace gllim
