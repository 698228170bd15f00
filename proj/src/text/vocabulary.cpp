#include "nlpr/text/vocabulary.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nlpr/error.hpp"

namespace nlpr::text {

Vocabulary::Vocabulary() { add(kUnknownToken); }

int Vocabulary::add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

int Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknownIndex : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> tokens) {
  if (tokens.empty() || tokens[0] != kUnknownToken) {
    throw ParseError("vocabulary must start with " + std::string(kUnknownToken), 1);
  }
  Vocabulary vocab;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (vocab.contains(tokens[i])) {
      throw ParseError("duplicate vocabulary token '" + tokens[i] + "'", i + 1);
    }
    vocab.add(tokens[i]);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(tokens);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

PreparedSequence prepare_sequence(std::span<const std::string> tokens, const Vocabulary& vocab, int n) {
  if (n < 1) throw ContractError("prepare_sequence: N must be >= 1");
  PreparedSequence seq;
  seq.length = static_cast<int>(std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(n)));
  seq.ids.assign(static_cast<std::size_t>(n), kUnknownIndex);
  for (int i = 0; i < seq.length; ++i) seq.ids[static_cast<std::size_t>(i)] = vocab.index_of(tokens[static_cast<std::size_t>(i)]);
  return seq;
}

EmbeddingFile parse_embedding_text(const std::string& text) {
  EmbeddingFile file;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("bad embedding value '" + field + "'", line_no);
      }
      values.push_back(v);
    }
    if (values.empty()) throw ParseError("embedding line has no values", line_no);
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw ParseError("expected " + std::to_string(dim) + " values, got " +
                           std::to_string(values.size()),
                       line_no);
    }
    file.tokens.push_back(token);
    rows.push_back(std::move(values));
  }
  file.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) file.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return file;
}

EmbeddingFile load_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embeddings " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_embedding_text(buffer.str());
}

void save_embedding_file(const std::filesystem::path& path, const EmbeddingFile& file) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write embeddings " + path.string());
  out.precision(17);
  for (std::size_t r = 0; r < file.tokens.size(); ++r) {
    out << file.tokens[r];
    for (Eigen::Index c = 0; c < file.vectors.cols(); ++c) out << ' ' << file.vectors(static_cast<Eigen::Index>(r), c);
    out << '\n';
  }
}

ad::Matrix<double> build_embedding_table(const Vocabulary& vocab, int dim, Rng& rng,
                                         const EmbeddingFile* pretrained, int* matched) {
  if (dim < 1) throw ContractError("embedding dimension must be positive");
  ad::Matrix<double> table(vocab.size(), dim);
  for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = rng.uniform(-0.08, 0.08);
  int hits = 0;
  if (pretrained) {
    if (pretrained->vectors.rows() > 0 && pretrained->vectors.cols() != dim) {
      throw ShapeError("pretrained embeddings have dimension " +
                       std::to_string(pretrained->vectors.cols()) + ", expected " +
                       std::to_string(dim));
    }
    for (std::size_t r = 0; r < pretrained->tokens.size(); ++r) {
      if (!vocab.contains(pretrained->tokens[r])) continue;
      table.row(vocab.index_of(pretrained->tokens[r])) = pretrained->vectors.row(static_cast<Eigen::Index>(r));
      ++hits;
    }
  }
  if (matched) *matched = hits;
  return table;
}

}  // namespace nlpr::text
