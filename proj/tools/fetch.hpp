#pragma once

#include <filesystem>
#include <string>

namespace orcsf::cli {

inline constexpr const char* kCifarUrl = "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz";
/// MD5 published for cifar-10-binary.tar.gz on the dataset page.
inline constexpr const char* kCifarMd5 = "c32a1d4ab5d03f1284b67883e8d87530";

struct Digests {
  std::string md5;
  std::string sha256;
};

/// Lower-case hex digests of a file.
Digests file_digests(const std::filesystem::path& file);
/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Downloads `url` to `dest`; throws orcsf::Error on transport failure or a
/// non-2xx status.
void download(const std::string& url, const std::filesystem::path& dest);

/// Extracts the regular files of a gzip-compressed (ustar) tar archive under
/// `directory`. Entries with absolute paths or ".." components are rejected.
/// Returns the number of files written.
std::size_t extract_tar_gz(const std::filesystem::path& archive,
                           const std::filesystem::path& directory);

}  // namespace orcsf::cli
