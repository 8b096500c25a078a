#include "fetch.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <curl/curl.h>
#include <openssl/evp.h>
#include <zlib.h>

#include "orcsf/error.hpp"

namespace orcsf::cli {
namespace {

std::string to_hex(const unsigned char* data, unsigned int size) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (unsigned int i = 0; i < size; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

struct DigestContext {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

  explicit DigestContext(const EVP_MD* md) {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1) throw Error("digest init failed");
  }
  void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx.get(), data, size); }
  std::string finish() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
    unsigned int size = 0;
    EVP_DigestFinal_ex(ctx.get(), buf.data(), &size);
    return to_hex(buf.data(), size);
  }
};

std::size_t write_to_file(char* data, std::size_t size, std::size_t count, void* user) {
  auto* out = static_cast<std::ofstream*>(user);
  out->write(data, static_cast<std::streamsize>(size * count));
  return *out ? size * count : 0;
}

std::uint64_t parse_octal(const char* field, std::size_t width) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < width && field[i] != '\0' && field[i] != ' '; ++i) {
    if (field[i] < '0' || field[i] > '7') throw Error("tar: malformed octal field");
    value = value * 8 + static_cast<std::uint64_t>(field[i] - '0');
  }
  return value;
}

bool read_exact(gzFile in, char* buf, unsigned size) {
  unsigned got = 0;
  while (got < size) {
    const int n = gzread(in, buf + got, size - got);
    if (n <= 0) return false;
    got += static_cast<unsigned>(n);
  }
  return true;
}

}  // namespace

Digests file_digests(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  DigestContext md5(EVP_md5());
  DigestContext sha(EVP_sha256());
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto n = static_cast<std::size_t>(in.gcount());
    md5.update(buf.data(), n);
    sha.update(buf.data(), n);
  }
  return {md5.finish(), sha.finish()};
}

std::string sha256_hex(const std::string& bytes) {
  DigestContext sha(EVP_sha256());
  sha.update(bytes.data(), bytes.size());
  return sha.finish();
}

void download(const std::string& url, const std::filesystem::path& dest) {
  if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw Error("cannot open " + dest.string() + " for writing");

  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
  if (!curl) throw Error("curl initialization failed");
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_to_file);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &out);
  curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 30L);
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) throw Error("download of " + url + " failed: " + curl_easy_strerror(rc));
  long status = 0;
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
  if (status < 200 || status >= 300) {
    throw Error("download of " + url + " failed with HTTP status " + std::to_string(status));
  }
}

std::size_t extract_tar_gz(const std::filesystem::path& archive,
                           const std::filesystem::path& directory) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> in(gzopen(archive.string().c_str(), "rb"), &gzclose);
  if (!in) throw Error("cannot open " + archive.string());

  std::size_t written = 0;
  std::array<char, 512> header{};
  std::vector<char> payload;
  while (read_exact(in.get(), header.data(), header.size())) {
    if (header[0] == '\0') break;  // end-of-archive block
    std::string name(header.data(), strnlen(header.data(), 100));
    const std::string prefix(header.data() + 345, strnlen(header.data() + 345, 155));
    if (!prefix.empty()) name = prefix + "/" + name;
    const std::uint64_t size = parse_octal(header.data() + 124, 12);
    const char type = header[156];

    const std::uint64_t padded = (size + 511) / 512 * 512;
    payload.resize(padded);
    if (padded > 0 && !read_exact(in.get(), payload.data(), static_cast<unsigned>(padded))) {
      throw Error("tar: truncated archive " + archive.string());
    }
    if (type != '0' && type != '\0') continue;  // directories, links, pax headers

    const std::filesystem::path rel(name);
    if (rel.is_absolute()) throw Error("tar: absolute path entry " + name);
    for (const auto& part : rel) {
      if (part == "..") throw Error("tar: parent-directory entry " + name);
    }
    const std::filesystem::path target = directory / rel;
    std::filesystem::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary);
    if (!out) throw Error("cannot write " + target.string());
    out.write(payload.data(), static_cast<std::streamsize>(size));
    ++written;
  }
  return written;
}

}  // namespace orcsf::cli
