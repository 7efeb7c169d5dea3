#include "gllim/constraint.hpp"

#include "gllim/errors.hpp"

namespace gllim {

ConstraintSpec ConstraintSpec::fixed_at(Eigen::MatrixXd value) {
    ConstraintSpec spec;
    spec.fixed = true;
    spec.fixed_value = std::move(value);
    return spec;
}

void ConstraintSpec::validate() const {
    if (fixed && !fixed_value.has_value())
        throw InvalidParametersError("fixed constraint requires an accompanying fixed value");
}

ConstraintSpec ConstraintSpec::parse(const std::string& text) {
    ConstraintSpec spec;
    std::string structure = text;
    auto comma = text.find(',');
    if (comma != std::string::npos) {
        structure = text.substr(0, comma);
        std::string rest = text.substr(comma + 1);
        if (rest == "shared")
            spec.shared = true;
        else
            throw InvalidParametersError("unknown constraint modifier '" + rest + "'");
    }
    if (structure == "full")
        spec.structure = CovStructure::Full;
    else if (structure == "diag")
        spec.structure = CovStructure::Diagonal;
    else if (structure == "iso")
        spec.structure = CovStructure::Isotropic;
    else
        throw InvalidParametersError("unknown covariance structure '" + structure + "'");
    return spec;
}

std::string ConstraintSpec::to_string() const {
    std::string s;
    switch (structure) {
    case CovStructure::Full: s = "full"; break;
    case CovStructure::Diagonal: s = "diag"; break;
    case CovStructure::Isotropic: s = "iso"; break;
    }
    if (shared)
        s += ",shared";
    if (fixed)
        s += ",fixed";
    return s;
}

std::vector<Eigen::MatrixXd> project_constraint(const std::vector<Eigen::MatrixXd>& m,
                                                const ConstraintSpec& spec,
                                                const Eigen::VectorXd& pi) {
    const std::size_t k_count = m.size();
    if (spec.fixed) {
        if (!spec.fixed_value.has_value())
            throw InvalidParametersError("fixed constraint without a stored value");
        return std::vector<Eigen::MatrixXd>(k_count, *spec.fixed_value);
    }
    std::vector<Eigen::MatrixXd> out(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        const Eigen::MatrixXd& mk = m[k];
        const auto dim = mk.rows();
        switch (spec.structure) {
        case CovStructure::Full:
            out[k] = mk;
            break;
        case CovStructure::Diagonal:
            out[k] = mk.diagonal().asDiagonal();
            break;
        case CovStructure::Isotropic:
            out[k] = (mk.trace() / static_cast<double>(dim)) *
                     Eigen::MatrixXd::Identity(dim, dim);
            break;
        }
    }
    if (spec.shared && k_count > 0) {
        if (static_cast<std::size_t>(pi.size()) != k_count)
            throw DimensionError("project_constraint: pi size does not match component count");
        Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(m[0].rows(), m[0].cols());
        for (std::size_t k = 0; k < k_count; ++k)
            eq += pi[k] * out[k];
        for (std::size_t k = 0; k < k_count; ++k)
            out[k] = eq;
    }
    return out;
}

} // namespace gllim
