#ifndef NLPR_AUTODIFF_CHECKPOINT_HPP
#define NLPR_AUTODIFF_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"

namespace nlpr::ad {

struct NamedMatrix {
  std::string name;
  Matrix<double> value;
};

/// Flat file of named tensors plus a free-form metadata string (JSON by convention).
///
/// Layout, all integers little-endian:
///   "NLPRCKP1" | u32 meta_len | meta bytes | u32 count |
///   count x ( u32 name_len | name | u32 ndim | u64 dims[ndim] | f64 data[prod(dims)] )
/// Data is row-major. A text manifest "<path>.manifest" lists "name d0xd1" per line.
struct Checkpoint {
  std::string metadata;
  std::vector<NamedMatrix> tensors;

  const Matrix<double>& at(const std::string& name) const;
  bool contains(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Serialized bytes of a checkpoint; the on-disk file is exactly this buffer.
std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);

std::string manifest_text(const Checkpoint& checkpoint);

}  // namespace nlpr::ad

#endif  // NLPR_AUTODIFF_CHECKPOINT_HPP
