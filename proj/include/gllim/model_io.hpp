#pragma once

#include <optional>
#include <string>

#include "gllim/dataset.hpp"
#include "gllim/params.hpp"

namespace gllim {

// On-disk model: the inverse parameters plus the optional per-column
// standardizations applied to the training data, so prediction is
// self-contained.
struct ModelFile {
    GLLiMParams theta;
    std::optional<Standardizer> standardize_t;
    std::optional<Standardizer> standardize_y;
};

std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(const std::string& json_text);

// Atomic write (temp file, then rename); load validates all invariants.
void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

} // namespace gllim
