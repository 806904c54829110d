#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uqforge/math.hpp"
#include "uqforge/options.hpp"

namespace uqforge {

// name = [
// <one space-separated row per line, 17 significant digits>
// ];
void write_matrix_text(const std::string& name, const Matrix& data, std::ostream& os);
void write_matrix_file(const std::string& name, const Matrix& data, const std::filesystem::path& path);

// Reads one block in the format above; returns the matrix and optionally the
// variable name.
Matrix read_matrix_text(std::istream& is, std::string* name_out = nullptr);
Matrix read_matrix_file(const std::filesystem::path& path, std::string* name_out = nullptr);

// "<base>_sub<id><extension>"; a trailing '_' in the base is not doubled.
std::string sub_file_name(const std::string& base, int sub_id, const std::string& extension);

// <base>_sub<id>.txt when the base is not "." and the sub id is allowed;
// parent directories are created on demand.
std::optional<std::filesystem::path> display_file_path(const EnvSpec& env, int sub_id);
std::optional<std::ofstream> open_display_file(const EnvSpec& env, int sub_id);

// Equal-length numeric columns under the given headers.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

std::string format_double(double v, int significant_digits = 17);

}  // namespace uqforge
