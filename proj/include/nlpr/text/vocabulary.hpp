#ifndef NLPR_TEXT_VOCABULARY_HPP
#define NLPR_TEXT_VOCABULARY_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"
#include "nlpr/random.hpp"

namespace nlpr::text {

inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr int kUnknownIndex = 0;

/// Token -> row index of the embedding table. Index 0 is the padding/unknown token and
/// every out-of-vocabulary lookup lands there.
class Vocabulary {
 public:
  Vocabulary();

  /// Adds a token if absent; returns its index.
  int add(std::string_view token);
  int index_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  static Vocabulary from_tokens(std::span<const std::string> tokens);

  /// One token per line, line number = index; the first line must be <unk>.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Lowercase, split on any non-alphanumeric character.
std::vector<std::string> tokenize(std::string_view text);

struct PreparedSequence {
  std::vector<int> ids;  // exactly N entries
  int length = 0;        // min(#tokens, N); entries past it are padding
};

/// Truncates to the first N tokens or right-pads with <unk>.
PreparedSequence prepare_sequence(std::span<const std::string> tokens, const Vocabulary& vocab, int n);

struct EmbeddingFile {
  std::vector<std::string> tokens;
  ad::Matrix<double> vectors;  // one row per token
};

/// UTF-8 text, one entry per line: token, whitespace, k floats. Blank lines are skipped.
EmbeddingFile load_embedding_file(const std::filesystem::path& path);
EmbeddingFile parse_embedding_text(const std::string& text);
void save_embedding_file(const std::filesystem::path& path, const EmbeddingFile& file);

/// V x k table, uniform in [-0.08, 0.08]; rows for tokens present in `pretrained` are
/// copied from it. Returns how many rows came from the file via `matched`.
ad::Matrix<double> build_embedding_table(const Vocabulary& vocab, int dim, Rng& rng,
                                         const EmbeddingFile* pretrained = nullptr,
                                         int* matched = nullptr);

}  // namespace nlpr::text

#endif  // NLPR_TEXT_VOCABULARY_HPP
