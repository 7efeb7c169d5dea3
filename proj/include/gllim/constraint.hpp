#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gllim {

enum class CovStructure { Full, Diagonal, Isotropic };

// Structural constraint on a family of covariance matrices:
// structure applied per matrix, optionally tied across components (shared),
// optionally not re-estimated at all (fixed, with a supplied value).
struct ConstraintSpec {
    CovStructure structure = CovStructure::Full;
    bool shared = false;
    bool fixed = false;
    std::optional<Eigen::MatrixXd> fixed_value;

    static ConstraintSpec full() { return {}; }
    static ConstraintSpec diagonal(bool shared_ = false) {
        return {CovStructure::Diagonal, shared_, false, std::nullopt};
    }
    static ConstraintSpec isotropic(bool shared_ = false) {
        return {CovStructure::Isotropic, shared_, false, std::nullopt};
    }
    static ConstraintSpec fixed_at(Eigen::MatrixXd value);

    void validate() const;

    // "iso", "diag", "full", optionally followed by ",shared"
    static ConstraintSpec parse(const std::string& text);
    std::string to_string() const;
};

// Projects unconstrained per-component covariance solutions M_k onto the
// constraint family. `pi` weights the shared (equal) combination.
std::vector<Eigen::MatrixXd> project_constraint(const std::vector<Eigen::MatrixXd>& m,
                                                const ConstraintSpec& spec,
                                                const Eigen::VectorXd& pi);

} // namespace gllim
