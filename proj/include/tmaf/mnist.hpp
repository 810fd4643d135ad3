#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tmaf/data.hpp"
#include "tmaf/error.hpp"

namespace tmaf {

enum class IdxErrorKind { kIo, kBadMagic, kTruncated, kCountMismatch, kBadLabel };

const char* to_string(IdxErrorKind kind);

class IdxError : public Error {
 public:
  IdxError(IdxErrorKind kind, const std::string& message)
      : Error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}
  IdxErrorKind kind() const { return kind_; }

 private:
  IdxErrorKind kind_;
};

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

/// Images as rows of pixels scaled to [0, 1]; digits 0-9 stored as classes 1-10.
struct MnistSet {
  Batch images;
  std::vector<int> labels;
  std::size_t image_rows = 28;
  std::size_t image_cols = 28;

  Dataset to_dataset() const { return Dataset{images, Batch(), labels}; }
};

/// IDX files, plain or gzip-compressed.
MnistSet load_mnist(const std::string& images_path, const std::string& labels_path);
MnistSet decode_mnist(const std::vector<std::uint8_t>& image_bytes,
                      const std::vector<std::uint8_t>& label_bytes);

std::vector<std::uint8_t> encode_idx_images(const MnistSet& set);
std::vector<std::uint8_t> encode_idx_labels(const MnistSet& set);

/// Whole file contents, gunzipped when the file is gzip-compressed.
std::vector<std::uint8_t> read_file_bytes(const std::string& path);

}  // namespace tmaf
