#include "uqforge/output.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "uqforge/errors.hpp"

namespace uqforge {

std::string format_double(double v, int significant_digits) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, significant_digits);
  return std::string(buf, res.ptr);
}

void write_matrix_text(const std::string& name, const Matrix& data, std::ostream& os) {
  if (!data.allFinite()) throw IoError("matrix writer: refusing to write non-finite data for " + name);
  os << name << " = [\n";
  std::string line;
  for (long i = 0; i < data.rows(); ++i) {
    line.clear();
    for (long j = 0; j < data.cols(); ++j) {
      if (j) line.push_back(' ');
      line += format_double(data(i, j));
    }
    line.push_back('\n');
    os << line;
  }
  os << "];\n";
  if (!os) throw IoError("matrix writer: stream failure for " + name);
}

void write_matrix_file(const std::string& name, const Matrix& data, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_matrix_text(name, data, os);
}

Matrix read_matrix_text(std::istream& is, std::string* name_out) {
  std::string line;
  std::string header;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      header = line;
      break;
    }
  }
  const auto eq = header.find('=');
  const auto bracket = header.find('[');
  if (eq == std::string::npos || bracket == std::string::npos || bracket < eq) {
    throw IoError("matrix reader: missing 'name = [' header");
  }
  if (name_out != nullptr) {
    std::string name = header.substr(0, eq);
    const auto end = name.find_last_not_of(" \t");
    *name_out = end == std::string::npos ? std::string() : name.substr(0, end + 1);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == ']') break;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      row.push_back(std::strtod(tok.c_str(), &end));
      if (end != tok.c_str() + tok.size()) throw IoError("matrix reader: bad number '" + tok + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("matrix reader: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<long>(rows.size()), rows.empty() ? 0 : static_cast<long>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  }
  return m;
}

Matrix read_matrix_file(const std::filesystem::path& path, std::string* name_out) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_matrix_text(is, name_out);
}

std::string sub_file_name(const std::string& base, int sub_id, const std::string& extension) {
  // "_sub<id>" with no doubled separator when the base already ends in '_'
  const std::string sep = base.empty() || base.back() == '_' ? "sub" : "_sub";
  return base + sep + std::to_string(sub_id) + extension;
}

std::optional<std::filesystem::path> display_file_path(const EnvSpec& env, int sub_id) {
  if (env.display_file_base == ".") return std::nullopt;
  if (!env.display_allow_all && env.display_allowed.count(sub_id) == 0) return std::nullopt;
  return std::filesystem::path(sub_file_name(env.display_file_base, sub_id, ".txt"));
}

std::optional<std::ofstream> open_display_file(const EnvSpec& env, int sub_id) {
  const auto path = display_file_path(env, sub_id);
  if (!path) return std::nullopt;
  if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
  std::ofstream os(*path);
  if (!os) throw IoError("cannot open display file " + path->string());
  return os;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size() || columns.empty()) {
    throw IoError("csv writer: one header per column required");
  }
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw IoError("csv writer: column lengths differ");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) os << ',';
    os << header[j];
  }
  os << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) os << ',';
      os << format_double(columns[j][i]);
    }
    os << '\n';
  }
  if (!os) throw IoError("csv writer: stream failure for " + path.string());
}

}  // namespace uqforge
