#include "gllim/model_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "gllim/errors.hpp"

namespace gllim {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array())
        throw ParseError("model: " + what + " is not an array");
    const std::size_t rows = j.size();
    std::size_t cols = rows > 0 ? j[0].size() : 0;
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError("model: ragged matrix in " + what);
        for (std::size_t c = 0; c < cols; ++c)
            m(i, c) = j[i][c].get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array())
        throw ParseError("model: " + what + " is not an array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[i] = j[i].get<double>();
    return v;
}

json constraint_to_json(const ConstraintSpec& spec) {
    json out;
    out["spec"] = spec.to_string();
    if (spec.fixed && spec.fixed_value.has_value())
        out["fixed_value"] = matrix_to_json(*spec.fixed_value);
    return out;
}

ConstraintSpec constraint_from_json(const json& j) {
    std::string text = j.at("spec").get<std::string>();
    bool fixed = false;
    auto pos = text.find(",fixed");
    if (pos != std::string::npos) {
        fixed = true;
        text.erase(pos, 6);
    }
    ConstraintSpec spec = ConstraintSpec::parse(text);
    if (fixed) {
        spec.fixed = true;
        spec.fixed_value = matrix_from_json(j.at("fixed_value"), "constraint fixed value");
    }
    return spec;
}

json standardizer_to_json(const Standardizer& s) {
    json out;
    out["shift"] = vector_to_json(s.shift);
    out["scale"] = vector_to_json(s.scale);
    return out;
}

Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.shift = vector_from_json(j.at("shift"), "standardizer shift");
    s.scale = vector_from_json(j.at("scale"), "standardizer scale");
    if (s.shift.size() != s.scale.size())
        throw ParseError("model: standardizer shift/scale size mismatch");
    return s;
}

} // namespace

std::string model_to_json(const ModelFile& model) {
    const GLLiMParams& t = model.theta;
    json j;
    j["K"] = t.K;
    j["D"] = t.D;
    j["L_t"] = t.L_t;
    j["L_w"] = t.L_w;
    j["pi"] = vector_to_json(t.pi);
    j["c"] = json::array();
    j["Gamma"] = json::array();
    j["A"] = json::array();
    j["b"] = json::array();
    j["Sigma"] = json::array();
    for (int k = 0; k < t.K; ++k) {
        j["c"].push_back(vector_to_json(t.c[k]));
        j["Gamma"].push_back(matrix_to_json(t.Gamma[k]));
        j["A"].push_back(matrix_to_json(t.A[k]));
        j["b"].push_back(vector_to_json(t.b[k]));
        j["Sigma"].push_back(matrix_to_json(t.Sigma[k]));
    }
    j["constraints"] = {{"sigma", constraint_to_json(t.constraint_sigma)},
                        {"gamma", constraint_to_json(t.constraint_gamma)}};
    if (model.standardize_t)
        j["standardize_t"] = standardizer_to_json(*model.standardize_t);
    if (model.standardize_y)
        j["standardize_y"] = standardizer_to_json(*model.standardize_y);
    return j.dump(2);
}

ModelFile model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: invalid JSON: ") + e.what());
    }
    ModelFile model;
    GLLiMParams& t = model.theta;
    try {
        t.K = j.at("K").get<int>();
        t.D = j.at("D").get<int>();
        t.L_t = j.at("L_t").get<int>();
        t.L_w = j.at("L_w").get<int>();
        t.pi = vector_from_json(j.at("pi"), "pi");
        for (int k = 0; k < t.K; ++k) {
            t.c.push_back(vector_from_json(j.at("c").at(k), "c"));
            t.Gamma.push_back(matrix_from_json(j.at("Gamma").at(k), "Gamma"));
            t.A.push_back(matrix_from_json(j.at("A").at(k), "A"));
            t.b.push_back(vector_from_json(j.at("b").at(k), "b"));
            t.Sigma.push_back(matrix_from_json(j.at("Sigma").at(k), "Sigma"));
        }
        t.constraint_sigma = constraint_from_json(j.at("constraints").at("sigma"));
        t.constraint_gamma = constraint_from_json(j.at("constraints").at("gamma"));
        if (j.contains("standardize_t"))
            model.standardize_t = standardizer_from_json(j.at("standardize_t"));
        if (j.contains("standardize_y"))
            model.standardize_y = standardizer_from_json(j.at("standardize_y"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: missing or malformed field: ") + e.what());
    }
    t.validate();
    return model;
}

void save_model(const std::string& path, const ModelFile& model) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw ParseError("cannot write '" + tmp + "'");
        out << model_to_json(model) << '\n';
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ParseError("cannot rename '" + tmp + "' to '" + path + "'");
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

} // namespace gllim
