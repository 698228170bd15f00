#include "nlpr/text/attributes.hpp"

#include <cctype>

#include "nlpr/error.hpp"
#include "nlpr/text/vocabulary.hpp"

namespace nlpr::text {

namespace {

constexpr std::string_view kNames[kCategoryCount] = {
    "gender", "hair", "upper_body", "lower_body", "carrying", "age", "accessories", "location"};

constexpr std::string_view kGender[] = {"male", "female"};
constexpr std::string_view kHair[] = {"long_hair", "short_hair", "bald"};
constexpr std::string_view kUpper[] = {"shirt", "t_shirt", "suit"};
constexpr std::string_view kLower[] = {"jeans", "short", "skirt", "pant"};
constexpr std::string_view kCarrying[] = {"backpack", "single_shoulder_bag", "handbag"};
constexpr std::string_view kAge[] = {"baby", "teenage", "adult", "elderly"};
constexpr std::string_view kAccessories[] = {"sunglasses", "head_phones", "hat"};
constexpr std::string_view kLocation[] = {"on_right_side", "on_left_side", "in_the_center"};

constexpr std::span<const std::string_view> kValues[kCategoryCount] = {
    kGender, kHair, kUpper, kLower, kCarrying, kAge, kAccessories, kLocation};

}  // namespace

std::string_view category_name(Category c) { return kNames[static_cast<int>(c)]; }

std::array<Category, kCategoryCount> all_categories() {
  std::array<Category, kCategoryCount> out{};
  for (int i = 0; i < kCategoryCount; ++i) out[static_cast<std::size_t>(i)] = static_cast<Category>(i);
  return out;
}

std::string normalize_value(std::string_view value) {
  std::string out;
  bool pending_sep = false;
  for (char ch : value) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (pending_sep && !out.empty()) out.push_back('_');
      pending_sep = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

Category category_from_name(std::string_view name) {
  const std::string key = normalize_value(name);
  if (key == "where") return Category::Location;
  for (int i = 0; i < kCategoryCount; ++i) {
    if (key == kNames[i]) return static_cast<Category>(i);
  }
  throw ContractError("unknown attribute category '" + std::string(name) + "'");
}

std::span<const std::string_view> catalogue_values(Category c) { return kValues[static_cast<int>(c)]; }

std::optional<Category> category_of_value(std::string_view value) {
  const std::string key = normalize_value(value);
  for (int i = 0; i < kCategoryCount; ++i) {
    for (auto v : kValues[i]) {
      if (v == key) return static_cast<Category>(i);
    }
  }
  return std::nullopt;
}

Attributes attributes_from_values(std::span<const std::string> values) {
  Attributes out;
  for (const auto& raw : values) {
    const std::string v = normalize_value(raw);
    if (v == kUnknownValue) continue;
    const auto cat = category_of_value(v);
    if (!cat) throw ContractError("'" + raw + "' is not an attribute value of any category");
    auto& slot = out[static_cast<std::size_t>(*cat)];
    if (slot && *slot != v) {
      throw ContractError("two values for category " + std::string(category_name(*cat)) + ": " +
                          *slot + ", " + v);
    }
    slot = v;
  }
  return out;
}

std::vector<std::string> attribute_tokens(const Attributes& attributes) {
  std::vector<std::string> out;
  out.reserve(kCategoryCount);
  for (const auto& a : attributes) out.push_back(a ? *a : std::string(kUnknownToken));
  return out;
}

}  // namespace nlpr::text
