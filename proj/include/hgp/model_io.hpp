#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "hgp/model.hpp"

namespace hgp {

nlohmann::json constraint_to_json(const ConstraintExpr& c);
/// `where` prefixes schema error messages (a JSON path).
ConstraintExpr constraint_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

/// Canonical text form: two-space indented JSON with a trailing newline.
std::string model_to_string(const Model& model);

Model load_model(const std::filesystem::path& path);
void save_model(const Model& model, const std::filesystem::path& path);

/// Reads a whole file as JSON; throws LoadError naming the path.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hgp
