#ifndef NLPR_DATA_PREP_HPP
#define NLPR_DATA_PREP_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "nlpr/data/dataset.hpp"

namespace nlpr::data {

struct PrepOptions {
  double min_area = 5000.0;  // persons with a smaller ground-truth box are dropped
};

struct PrepResult {
  std::vector<Scene> scenes;
  std::size_t persons_kept = 0;
  std::size_t persons_dropped = 0;
};

/// Raw annotation lines share the dataset layout except that each person carries
/// "mask": [[x, y], ...] (segmentation pixels) instead of "gt_box". The box is the mask's
/// extent with exclusive max edges.
PrepResult prepare_annotations(const std::string& text, const PrepOptions& options = {});
PrepResult prepare_annotation_file(const std::filesystem::path& path, const PrepOptions& options = {});

}  // namespace nlpr::data

#endif  // NLPR_DATA_PREP_HPP
