#ifndef NLPR_VISUAL_PPM_HPP
#define NLPR_VISUAL_PPM_HPP

#include <filesystem>
#include <string>

#include "nlpr/visual/attention_map.hpp"

namespace nlpr::visual {

/// Binary P6 image of the map scaled so its maximum is white; each cell becomes a
/// cell_px x cell_px block.
std::string attention_ppm(const AttentionMap& map, int cell_px = 8);
void write_attention_ppm(const std::filesystem::path& path, const AttentionMap& map, int cell_px = 8);

}  // namespace nlpr::visual

#endif  // NLPR_VISUAL_PPM_HPP
