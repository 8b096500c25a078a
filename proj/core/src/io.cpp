#include "orcsf/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "orcsf/error.hpp"

namespace orcsf::io {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double v) {
  auto bits = to_little(std::bit_cast<std::uint64_t>(v));
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw InvalidInput("matrix container: truncated header");
  }
  return to_little(v);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out.write(kMatrixMagic.data(), static_cast<std::streamsize>(kMatrixMagic.size()));
  put_u64(out, kMatrixVersion);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
  }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kMatrixMagic) {
    throw InvalidInput("matrix container: bad magic");
  }
  const std::uint64_t version = get_u64(in);
  if (version != kMatrixVersion) {
    throw InvalidInput("matrix container: unsupported version " + std::to_string(version));
  }
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (rows > (1ULL << 31) || cols > (1ULL << 31)) {
    throw InvalidInput("matrix container: implausible shape");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::uint64_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw InvalidInput("matrix container: truncated payload");
      }
      m(i, j) = std::bit_cast<double>(to_little(bits));
    }
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix(out, m);
  if (!out) throw Error("write failed: " + path.string());
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_matrix(in);
}

Eigen::MatrixXd load_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> values;
    bool numeric = true;
    for (const auto& field : split_list(body)) {
      double v = 0.0;
      if (!parse_double(field, v)) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InvalidInput(path.string() + ": no samples");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.front().size()),
                    static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    }
  }
  return m;
}

KeyValues parse_key_values(std::istream& in, const std::string& source_name) {
  KeyValues out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) {
      throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!seen.insert(key).second) {
      throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                         "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const KeyValues& entries) {
  for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto stop = text.find(sep, start);
    const auto piece = trim(text.substr(start, stop == std::string_view::npos ? text.npos
                                                                               : stop - start));
    if (!piece.empty()) parts.emplace_back(piece);
    if (stop == std::string_view::npos) break;
    start = stop + 1;
  }
  return parts;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace orcsf::io
