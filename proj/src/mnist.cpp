#include "tmaf/mnist.hpp"

#include <cmath>
#include <cstdint>

#include <zlib.h>

namespace tmaf {
namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t offset) {
  return (static_cast<std::uint32_t>(b[offset]) << 24) |
         (static_cast<std::uint32_t>(b[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(b[offset + 2]) << 8) | static_cast<std::uint32_t>(b[offset + 3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void need(const std::vector<std::uint8_t>& b, std::size_t n, const char* what) {
  if (b.size() < n) {
    throw IdxError(IdxErrorKind::kTruncated, std::string(what) + ": expected at least " +
                                                 std::to_string(n) + " bytes, got " +
                                                 std::to_string(b.size()));
  }
}

}  // namespace

const char* to_string(IdxErrorKind kind) {
  switch (kind) {
    case IdxErrorKind::kIo: return "idx io error";
    case IdxErrorKind::kBadMagic: return "idx bad magic";
    case IdxErrorKind::kTruncated: return "idx truncated";
    case IdxErrorKind::kCountMismatch: return "idx count mismatch";
    case IdxErrorKind::kBadLabel: return "idx bad label";
  }
  return "idx error";
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  // gzread passes uncompressed files through unchanged.
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw IdxError(IdxErrorKind::kIo, "cannot open " + path);
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.insert(out.end(), buf, buf + n);
  int err = Z_OK;
  const char* msg = gzerror(f, &err);
  gzclose(f);
  if (n < 0 || (err != Z_OK && err != Z_STREAM_END)) {
    throw IdxError(IdxErrorKind::kIo, path + ": " + (msg ? msg : "read failed"));
  }
  return out;
}

MnistSet decode_mnist(const std::vector<std::uint8_t>& image_bytes,
                      const std::vector<std::uint8_t>& label_bytes) {
  need(image_bytes, 16, "image header");
  need(label_bytes, 8, "label header");
  const auto image_magic = read_be32(image_bytes, 0);
  if (image_magic != kIdxImageMagic) {
    throw IdxError(IdxErrorKind::kBadMagic, "image file magic " + std::to_string(image_magic) +
                                                ", expected " + std::to_string(kIdxImageMagic));
  }
  const auto label_magic = read_be32(label_bytes, 0);
  if (label_magic != kIdxLabelMagic) {
    throw IdxError(IdxErrorKind::kBadMagic, "label file magic " + std::to_string(label_magic) +
                                                ", expected " + std::to_string(kIdxLabelMagic));
  }
  const std::size_t count = read_be32(image_bytes, 4);
  const std::size_t rows = read_be32(image_bytes, 8);
  const std::size_t cols = read_be32(image_bytes, 12);
  const std::size_t label_count = read_be32(label_bytes, 4);
  if (count != label_count) {
    throw IdxError(IdxErrorKind::kCountMismatch, std::to_string(count) + " images but " +
                                                     std::to_string(label_count) + " labels");
  }
  const std::size_t pixels = rows * cols;
  if (pixels != 0 && count > (SIZE_MAX - 16) / pixels) {
    throw IdxError(IdxErrorKind::kTruncated, "header declares an impossible image payload");
  }
  need(image_bytes, 16 + count * pixels, "image data");
  need(label_bytes, 8 + count, "label data");

  MnistSet set;
  set.image_rows = rows;
  set.image_cols = cols;
  set.images = Batch(count, pixels);
  auto dst = set.images.data();
  for (std::size_t i = 0; i < count * pixels; ++i) dst[i] = image_bytes[16 + i] / 255.0;
  set.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int digit = label_bytes[8 + i];
    if (digit > 9) {
      throw IdxError(IdxErrorKind::kBadLabel,
                     "label " + std::to_string(digit) + " at index " + std::to_string(i) +
                         " is not a digit");
    }
    set.labels[i] = digit + 1;
  }
  return set;
}

MnistSet load_mnist(const std::string& images_path, const std::string& labels_path) {
  return decode_mnist(read_file_bytes(images_path), read_file_bytes(labels_path));
}

std::vector<std::uint8_t> encode_idx_images(const MnistSet& set) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + set.images.size());
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(set.images.rows()));
  put_be32(out, static_cast<std::uint32_t>(set.image_rows));
  put_be32(out, static_cast<std::uint32_t>(set.image_cols));
  for (double v : set.images.data()) {
    out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const MnistSet& set) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + set.labels.size());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(set.labels.size()));
  for (int c : set.labels) out.push_back(static_cast<std::uint8_t>(c - 1));
  return out;
}

}  // namespace tmaf
