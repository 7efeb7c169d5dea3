#include "gllim/dataset.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "gllim/errors.hpp"

namespace gllim {

void Dataset::validate() const {
    if (N() < 1)
        throw InvalidParametersError("dataset is empty");
    if (T.size() > 0 && T.rows() != Y.rows())
        throw InvalidParametersError("dataset: T and Y row counts differ");
    if (!Y.allFinite() || (T.size() > 0 && !T.allFinite()))
        throw InvalidParametersError("dataset contains non-finite entries");
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& x) const {
    return (x.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
           shift.transpose();
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    const double n = static_cast<double>(x.rows());
    s.shift = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - s.shift.transpose();
    s.scale = (centered.array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j)
        if (s.scale[j] <= 0.0)
            s.scale[j] = 1.0;
    return s;
}

Standardizer Standardizer::identity(int cols) {
    Standardizer s;
    s.shift = Eigen::VectorXd::Zero(cols);
    s.scale = Eigen::VectorXd::Ones(cols);
    return s;
}

Eigen::MatrixXd load_csv_matrix(const std::string& path, bool skip_header) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_header && line_no == 1)
            continue;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            errno = 0;
            double v = std::strtod(cell.c_str(), &end);
            while (end && *end == ' ')
                ++end;
            if (end == cell.c_str() || (end && *end != '\0') || errno != 0)
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": non-numeric cell '" + cell + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                             std::to_string(row.size()) + " cells, expected " +
                             std::to_string(rows.front().size()) + ")");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError(path + ": no data rows");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(i, j) = rows[i][j];
    return m;
}

void save_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    // Written through a temp file so readers never observe a partial file.
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw ParseError("cannot write '" + tmp + "'");
        out.precision(17);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j)
                    out << ',';
                out << m(i, j);
            }
            out << '\n';
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ParseError("cannot rename '" + tmp + "' to '" + path + "'");
}

Dataset load_dataset(const std::string& path_t, const std::string& path_y, bool skip_header) {
    Dataset data;
    data.Y = load_csv_matrix(path_y, skip_header);
    if (!path_t.empty()) {
        data.T = load_csv_matrix(path_t, skip_header);
        if (data.T.rows() != data.Y.rows())
            throw ParseError("row-count mismatch: '" + path_t + "' has " +
                             std::to_string(data.T.rows()) + " rows, '" + path_y + "' has " +
                             std::to_string(data.Y.rows()));
    } else {
        data.T.resize(data.Y.rows(), 0);
    }
    data.validate();
    return data;
}

} // namespace gllim
