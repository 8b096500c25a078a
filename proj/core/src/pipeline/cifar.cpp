#include "orcsf/pipeline/cifar.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "orcsf/error.hpp"
#include "orcsf/rng.hpp"

namespace orcsf::pipeline {
namespace {

const char* const kTrainFiles[] = {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                                   "data_batch_4.bin", "data_batch_5.bin"};
const char* const kTestFile = "test_batch.bin";

bool has_all_batches(const std::filesystem::path& dir) {
  std::error_code ec;
  for (const char* name : kTrainFiles) {
    if (!std::filesystem::is_regular_file(dir / name, ec)) return false;
  }
  return std::filesystem::is_regular_file(dir / kTestFile, ec);
}

}  // namespace

void ImageDataset::append(std::span<const std::uint8_t> image, std::uint8_t label) {
  if (image.size() != kImageBytes) throw InvalidInput("ImageDataset: image must be 3072 bytes");
  if (label >= kClasses) throw InvalidInput("ImageDataset: label must be in [0, 9]");
  pixels.insert(pixels.end(), image.begin(), image.end());
  labels.push_back(label);
}

ImageDataset load_cifar_batch(const std::filesystem::path& file, Split split,
                              std::size_t expected_records) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + file.string(), file.string(), 0);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const std::size_t complete = bytes.size() / kRecordBytes;
  if (bytes.size() % kRecordBytes != 0) {
    const std::uint64_t offset = complete * kRecordBytes;
    throw IngestionError(file.string() + ": truncated record at byte offset " +
                             std::to_string(offset),
                         file.string(), offset);
  }
  if (expected_records != 0 && complete != expected_records) {
    const std::uint64_t offset = bytes.size();
    throw IngestionError(file.string() + ": expected " + std::to_string(expected_records) +
                             " records, found " + std::to_string(complete),
                         file.string(), offset);
  }

  ImageDataset out;
  out.split = split;
  out.labels.reserve(complete);
  out.pixels.reserve(complete * kImageBytes);
  for (std::size_t r = 0; r < complete; ++r) {
    const std::size_t offset = r * kRecordBytes;
    const auto label = static_cast<std::uint8_t>(bytes[offset]);
    if (label >= kClasses) {
      throw CorruptionError(file.string() + ": label " + std::to_string(label) +
                                " out of range at byte offset " + std::to_string(offset),
                            file.string(), offset);
    }
    out.labels.push_back(label);
    const auto* first = reinterpret_cast<const std::uint8_t*>(bytes.data() + offset + 1);
    out.pixels.insert(out.pixels.end(), first, first + kImageBytes);
  }
  return out;
}

Cifar10 load_cifar10(const std::filesystem::path& directory) {
  Cifar10 data;
  data.train.split = Split::Train;
  for (const char* name : kTrainFiles) {
    ImageDataset batch = load_cifar_batch(directory / name, Split::Train, kRecordsPerBatch);
    data.train.pixels.insert(data.train.pixels.end(), batch.pixels.begin(), batch.pixels.end());
    data.train.labels.insert(data.train.labels.end(), batch.labels.begin(), batch.labels.end());
  }
  data.test = load_cifar_batch(directory / kTestFile, Split::Test, kRecordsPerBatch);
  return data;
}

void write_cifar_batch(const std::filesystem::path& file, const ImageDataset& dataset) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.put(static_cast<char>(dataset.labels[i]));
    const auto image = dataset.image(i);
    out.write(reinterpret_cast<const char*>(image.data()),
              static_cast<std::streamsize>(image.size()));
  }
  if (!out) throw Error("write failed: " + file.string());
}

ImageDataset subsample(const ImageDataset& dataset, std::size_t count, std::uint64_t seed) {
  if (count >= dataset.size()) return dataset;
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());

  ImageDataset out;
  out.split = dataset.split;
  out.labels.reserve(count);
  out.pixels.reserve(count * kImageBytes);
  for (std::size_t idx : order) out.append(dataset.image(idx), dataset.labels[idx]);
  return out;
}

std::filesystem::path find_cifar10(const std::filesystem::path& explicit_dir) {
  if (!explicit_dir.empty()) return has_all_batches(explicit_dir) ? explicit_dir : std::filesystem::path{};
  if (const char* env = std::getenv("ORCSF_CIFAR10_DIR"); env != nullptr && *env != '\0') {
    if (has_all_batches(env)) return env;
  }
  const std::filesystem::path fallback = "data/cifar-10-batches-bin";
  if (has_all_batches(fallback)) return fallback;
  return {};
}

}  // namespace orcsf::pipeline
