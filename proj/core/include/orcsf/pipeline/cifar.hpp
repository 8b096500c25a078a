#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace orcsf::pipeline {

inline constexpr int kImageSide = 32;
inline constexpr int kChannels = 3;
inline constexpr std::size_t kImageBytes = 3072;   // 3 planes of 32 x 32
inline constexpr std::size_t kRecordBytes = 3073;  // label byte + pixels
inline constexpr std::size_t kRecordsPerBatch = 10000;
inline constexpr int kClasses = 10;

enum class Split { Train, Test };

/// 32x32 RGB images in the CIFAR-10 plane layout: byte c*1024 + y*32 + x
/// holds channel c (red, green, blue) at row y, column x.
struct ImageDataset {
  std::vector<std::uint8_t> pixels;  ///< size() * kImageBytes bytes
  std::vector<std::uint8_t> labels;  ///< class ids in [0, 9]
  Split split = Split::Train;

  std::size_t size() const { return labels.size(); }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return {pixels.data() + i * kImageBytes, kImageBytes};
  }
  void append(std::span<const std::uint8_t> image, std::uint8_t label);
};

struct Cifar10 {
  ImageDataset train;
  ImageDataset test;
};

/// Parses one binary batch file. When `expected_records` is non-zero the file
/// must hold exactly that many records.
/// Throws IngestionError (missing or truncated file, with the byte offset of
/// the incomplete record) or CorruptionError (label byte > 9).
ImageDataset load_cifar_batch(const std::filesystem::path& file, Split split,
                              std::size_t expected_records = 0);

/// Loads data_batch_1..5.bin (5 x 10000 training records) and test_batch.bin
/// (10000 records) from `directory`.
Cifar10 load_cifar10(const std::filesystem::path& directory);

/// Writes `dataset` in the binary batch layout.
void write_cifar_batch(const std::filesystem::path& file, const ImageDataset& dataset);

/// `count` distinct images chosen uniformly with `seed`, kept in their
/// original order. count >= size() returns a copy.
ImageDataset subsample(const ImageDataset& dataset, std::size_t count, std::uint64_t seed);

/// Locates a CIFAR-10 batch directory: `explicit_dir` if non-empty, then
/// $ORCSF_CIFAR10_DIR, then ./data/cifar-10-batches-bin. Empty if none holds
/// the six batch files.
std::filesystem::path find_cifar10(const std::filesystem::path& explicit_dir = {});

}  // namespace orcsf::pipeline
