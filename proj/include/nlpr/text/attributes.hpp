#ifndef NLPR_TEXT_ATTRIBUTES_HPP
#define NLPR_TEXT_ATTRIBUTES_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlpr::text {

// Canonical category order; attribute sequences are always serialized in it.
enum class Category : int {
  Gender = 0,
  Hair,
  UpperBody,
  LowerBody,
  Carrying,
  Age,
  Accessories,
  Location,
};

inline constexpr int kCategoryCount = 8;
inline constexpr int kCatalogueSize = 25;
inline constexpr std::string_view kUnknownValue = "unknown";

/// One value or unknown (nullopt) per category, indexed by Category.
using Attributes = std::array<std::optional<std::string>, kCategoryCount>;

std::string_view category_name(Category c);
/// Accepts the canonical names with any case/spacing ("Upper Body", "upper_body") and
/// "where" for Location. Throws ContractError for anything else.
Category category_from_name(std::string_view name);
std::span<const std::string_view> catalogue_values(Category c);
std::array<Category, kCategoryCount> all_categories();

/// Lowercases and joins words with underscores: "On right side" -> "on_right_side".
std::string normalize_value(std::string_view value);
std::optional<Category> category_of_value(std::string_view value);

/// Places each catalogue value in its category; input order is irrelevant.
/// Throws ContractError on a non-catalogue value or two values for one category.
Attributes attributes_from_values(std::span<const std::string> values);

/// Fixed-order token sequence of length kCategoryCount; unknown slots become <unk>.
std::vector<std::string> attribute_tokens(const Attributes& attributes);

}  // namespace nlpr::text

#endif  // NLPR_TEXT_ATTRIBUTES_HPP
