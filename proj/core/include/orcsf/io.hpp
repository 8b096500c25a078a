#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace orcsf::io {

/// Shortest round-trip decimal form of a double (std::to_chars); the same
/// value always prints the same bytes.
std::string format_number(double value);

/// Binary matrix container, all integers 64-bit little-endian unsigned:
///   8-byte magic "ORCSFMAT", version (1), rows, cols,
///   then rows*cols IEEE-754 binary64 values in row-major order, little-endian.
inline constexpr std::string_view kMatrixMagic = "ORCSFMAT";
inline constexpr std::uint64_t kMatrixVersion = 1;

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

/// Reads a CSV of numbers, one sample per line, and returns it transposed so
/// that samples become columns. Lines starting with '#' and a non-numeric
/// header line are skipped.
Eigen::MatrixXd load_samples_csv(const std::filesystem::path& path);

/// Flat key=value text. '#' starts a comment line; blank lines are ignored;
/// keys keep their order of appearance. Duplicate keys are an error.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(std::istream& in, const std::string& source_name);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& entries);

/// Splits "a,b,c" into its non-empty trimmed parts.
std::vector<std::string> split_list(std::string_view text, char sep = ',');

/// Writes `contents` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace orcsf::io
