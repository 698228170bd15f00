#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "nlpr/autodiff/grad_check.hpp"
#include "nlpr/autodiff/ops.hpp"
#include "nlpr/text/attention.hpp"
#include "nlpr/text/attributes.hpp"
#include "nlpr/text/blstm.hpp"
#include "nlpr/text/encoder.hpp"
#include "nlpr/text/vocabulary.hpp"
#include "support.hpp"

using namespace nlpr;
using namespace nlpr::text;
using nlpr::ad::Matrix;
using nlpr::ad::Tensor;
using nlpr::testing::random_matrix;

namespace {

// Every parameter (biases included) drawn from U(-scale, scale).
BlstmParams random_blstm(int in, int hidden, Rng& rng, double scale = 0.5) {
  BlstmParams p = BlstmParams::init(in, hidden, rng, "blstm");
  for (auto t : p.parameters()) t.mutable_value() = random_matrix(rng, t.rows(), t.cols(), -scale, scale);
  return p;
}

Vocabulary small_vocab() {
  Vocabulary v;
  for (auto c : all_categories()) {
    for (auto value : catalogue_values(c)) v.add(value);
  }
  for (const char* w : {"a", "man", "in", "red", "shirt"}) v.add(w);
  return v;
}

std::vector<std::string> words(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(i % 2 ? "man" : "red");
  return out;
}

}  // namespace

TEST_CASE("vocabulary reserves index 0 for the unknown token") {
  Vocabulary v;
  CHECK(v.size() == 1);
  CHECK(v.token(0) == kUnknownToken);
  const int man = v.add("man");
  CHECK(man == 1);
  CHECK(v.add("man") == 1);
  CHECK(v.index_of("woman") == kUnknownIndex);
  CHECK(v.index_of("man") == 1);
}

TEST_CASE("vocabulary file round trip and validation") {
  nlpr::testing::TempDir dir("vocab");
  const Vocabulary v = small_vocab();
  v.save(dir / "vocab.txt");
  const Vocabulary back = Vocabulary::load(dir / "vocab.txt");
  CHECK(back.tokens() == v.tokens());
  const std::vector<std::string> bad_first{"man", "<unk>"};
  CHECK_THROWS_AS(Vocabulary::from_tokens(bad_first), ParseError);
  const std::vector<std::string> dup{"<unk>", "man", "man"};
  CHECK_THROWS_AS(Vocabulary::from_tokens(dup), ParseError);
}

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(tokenize("A man, in RED shirt.") == std::vector<std::string>{"a", "man", "in", "red", "shirt"});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("t-shirt") == std::vector<std::string>{"t", "shirt"});
}

TEST_CASE("prepare_sequence truncates and pads") {
  const Vocabulary v = small_vocab();
  const auto long_seq = prepare_sequence(words(25), v, 20);
  CHECK(long_seq.ids.size() == 20);
  CHECK(long_seq.length == 20);
  for (int i = 0; i < 20; ++i) CHECK(long_seq.ids[static_cast<std::size_t>(i)] == v.index_of(i % 2 ? "man" : "red"));

  const auto short_seq = prepare_sequence(words(5), v, 20);
  CHECK(short_seq.length == 5);
  CHECK(short_seq.ids.size() == 20);
  CHECK(std::all_of(short_seq.ids.begin() + 5, short_seq.ids.end(), [](int id) { return id == kUnknownIndex; }));

  const auto empty = prepare_sequence(std::vector<std::string>{}, v, 20);
  CHECK(empty.length == 0);
  CHECK(std::count(empty.ids.begin(), empty.ids.end(), kUnknownIndex) == 20);
  CHECK_THROWS_AS(prepare_sequence(words(3), v, 0), ContractError);
}

TEST_CASE("embedding file parsing") {
  const auto file = parse_embedding_text("man 0.5 -1\nred 2 3e-1\n\n");
  REQUIRE(file.tokens.size() == 2);
  CHECK(file.vectors(1, 1) == 0.3);
  CHECK_THROWS_AS(parse_embedding_text("man 0.5 x\n"), ParseError);
  CHECK_THROWS_AS(parse_embedding_text("man 0.5 1\nred 1\n"), ParseError);
  CHECK_THROWS_AS(parse_embedding_text("man\n"), ParseError);
  try {
    parse_embedding_text("a 1 2\nb 1 2\nc 1\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  const Vocabulary v = small_vocab();
  Rng rng(3);
  int matched = -1;
  const auto table = build_embedding_table(v, 2, rng, &file, &matched);
  CHECK(matched == 2);
  CHECK(table.rows() == v.size());
  CHECK(table(v.index_of("man"), 0) == 0.5);
  CHECK(table.maxCoeff() <= 2.0);
  Rng rng2(3);
  const auto plain = build_embedding_table(v, 4, rng2);
  CHECK(plain.cwiseAbs().maxCoeff() <= 0.08);
  CHECK_THROWS_AS(build_embedding_table(v, 3, rng2, &file), ShapeError);
}

TEST_CASE("embedding file save/load round trip") {
  nlpr::testing::TempDir dir("emb");
  Rng rng(8);
  EmbeddingFile file{{"a", "b", "c"}, random_matrix(rng, 3, 5)};
  save_embedding_file(dir / "e.txt", file);
  const auto back = load_embedding_file(dir / "e.txt");
  CHECK(back.tokens == file.tokens);
  CHECK(back.vectors == file.vectors);
}

TEST_CASE("blstm with zero parameters outputs zeros") {
  Rng rng(1);
  BlstmParams p = BlstmParams::init(4, 5, rng, "z");
  for (auto t : p.parameters()) t.mutable_value().setZero();
  const Tensor x = Tensor::constant(random_matrix(rng, 6, 4, -3, 3));
  const Tensor out = blstm_forward(x, p);
  CHECK(out.rows() == 6);
  CHECK(out.cols() == 10);
  CHECK(out.value().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("blstm single step shape and symmetric input") {
  Rng rng(2);
  BlstmParams p = random_blstm(4, 5, rng);
  const Tensor x = Tensor::constant(random_matrix(rng, 1, 4));
  const Tensor out = blstm_forward(x, p);
  CHECK(out.shape() == std::vector<Eigen::Index>{1, 10});
  // With identical cells both directions see the same single input.
  BlstmParams same = p;
  same.backward = same.forward;
  const Tensor twin = blstm_forward(x, same);
  CHECK(twin.value().leftCols(5) == twin.value().rightCols(5));
  CHECK_THROWS_AS(blstm_forward(Tensor::constant(Matrix<double>::Zero(3, 7)), p), ShapeError);
}

TEST_CASE("blstm gradients match finite differences") {
  Rng rng(3);
  BlstmParams p = random_blstm(4, 5, rng);
  const Tensor x = nlpr::testing::random_parameter(rng, 3, 4, "x");
  const Tensor probe = Tensor::constant(random_matrix(rng, 3, 10));
  auto params = p.parameters();
  params.push_back(x);
  auto loss = [&] { return ad::sum(ad::mul(blstm_forward(x, p), probe)); };
  const auto result = ad::grad_check<double>(loss, params);
  INFO("worst ", result.worst_parameter, " analytic ", result.analytic, " numeric ", result.numeric);
  CHECK(result.max_relative_error < 1e-5);
}

TEST_CASE("blstm is deterministic") {
  Rng rng(4);
  BlstmParams p = random_blstm(3, 4, rng);
  const Tensor x = Tensor::constant(random_matrix(rng, 7, 3));
  CHECK(blstm_forward(x, p).value() == blstm_forward(x, p).value());
}

TEST_CASE("reversing input and swapping directions mirrors the output") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    const int t_len = 2 + static_cast<int>(rng.below(6));
    BlstmParams p = random_blstm(3, 4, rng);
    const Matrix<double> xs = random_matrix(rng, t_len, 3);
    const Matrix<double> reversed = xs.colwise().reverse();
    BlstmParams swapped = p;
    std::swap(swapped.forward, swapped.backward);
    const Matrix<double> a = blstm_forward(Tensor::constant(xs), p).value();
    const Matrix<double> b = blstm_forward(Tensor::constant(reversed), swapped).value();
    for (int t = 0; t < t_len; ++t) {
      CHECK((a.row(t).head(4) - b.row(t_len - 1 - t).tail(4)).cwiseAbs().maxCoeff() < 1e-14);
      CHECK((a.row(t).tail(4) - b.row(t_len - 1 - t).head(4)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("blstm stays finite over long bounded sequences") {
  Rng rng(5);
  BlstmParams p = random_blstm(4, 6, rng, 3.0);
  const Tensor x = Tensor::constant(random_matrix(rng, 100, 4, -10, 10));
  const Tensor out = blstm_forward(x, p);
  CHECK(out.value().allFinite());
  CHECK(out.value().cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("word attention examples") {
  Rng rng(6);
  const Tensor beta = Tensor::constant(random_matrix(rng, 4, 1));
  Matrix<double> same(5, 4);
  for (int t = 0; t < 5; ++t) same.row(t) << 1, 2, 3, 4;
  auto pooled = word_attention(Tensor::constant(same), beta, 3);
  for (int t = 0; t < 3; ++t) CHECK(pooled.weights.value()(0, t) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(pooled.weights.value()(0, 3) == 0.0);
  CHECK(pooled.weights.value()(0, 4) == 0.0);

  const Matrix<double> states = random_matrix(rng, 5, 4);
  pooled = word_attention(Tensor::constant(states), beta, 1);
  CHECK(pooled.weights.value()(0, 0) == 1.0);
  CHECK((pooled.pooled.value() - states.row(0)).cwiseAbs().maxCoeff() == 0.0);

  pooled = word_attention(Tensor::constant(states), Tensor::constant(Matrix<double>::Zero(4, 1)), 4);
  const Matrix<double> mean = states.topRows(4).colwise().mean();
  CHECK((pooled.pooled.value() - mean).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(word_attention(Tensor::constant(states), beta, 0), DomainError);
}

TEST_CASE("attention weights sum to one and mask padding exactly") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int t_len = 1 + static_cast<int>(rng.below(20));
    const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(t_len)));
    const auto pooled = word_attention(Tensor::constant(random_matrix(rng, t_len, 6, -5, 5)),
                                       Tensor::constant(random_matrix(rng, 6, 1, -3, 3)), len);
    const auto& w = pooled.weights.value();
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
    for (int t = len; t < t_len; ++t) CHECK(w(0, t) == 0.0);
  }
}

TEST_CASE("word attention gradients") {
  Rng rng(8);
  const Tensor states = nlpr::testing::random_parameter(rng, 4, 6, "states");
  const Tensor beta = nlpr::testing::random_parameter(rng, 6, 1, "beta");
  const Tensor probe = Tensor::constant(random_matrix(rng, 1, 6));
  auto loss = [&] { return ad::sum(ad::mul(word_attention(states, beta, 3).pooled, probe)); };
  CHECK(ad::grad_check<double>(loss, {states, beta}).max_relative_error < 1e-6);
}

TEST_CASE("attribute values normalize onto the catalogue") {
  CHECK(normalize_value("On right side") == "on_right_side");
  CHECK(category_of_value("t-shirt") == Category::UpperBody);
  CHECK(category_from_name("Upper Body") == Category::UpperBody);
  CHECK_THROWS_AS(category_from_name("shoes"), ContractError);
  const std::vector<std::string> bad{"purple"};
  CHECK_THROWS_AS(attributes_from_values(bad), ContractError);
  const std::vector<std::string> clash{"male", "female"};
  CHECK_THROWS_AS(attributes_from_values(clash), ContractError);
  std::size_t total = 0;
  for (auto c : all_categories()) total += catalogue_values(c).size();
  CHECK(total == static_cast<std::size_t>(kCatalogueSize));
}

TEST_CASE("attribute encoding is order invariant") {
  const Vocabulary v = small_vocab();
  Rng rng(9);
  const Tensor table = Tensor::constant(build_embedding_table(v, 4, rng));
  const BlstmParams p = random_blstm(4, 3, rng);
  const std::vector<std::string> a{"male", "on right side"}, b{"on right side", "male"};
  CHECK(encode_attributes(a, v, table, p).value() == encode_attributes(b, v, table, p).value());
  const std::vector<std::string> tokens = attribute_tokens(attributes_from_values(a));
  CHECK(tokens.front() == "male");
  CHECK(tokens.back() == "on_right_side");
  CHECK(tokens.size() == 8);
}

TEST_CASE("all unknown attributes encode the pad embedding sequence") {
  const Vocabulary v = small_vocab();
  Rng rng(10);
  const Tensor table = Tensor::constant(build_embedding_table(v, 4, rng));
  const BlstmParams p = random_blstm(4, 3, rng);
  const std::vector<std::string> none{"unknown"};
  const Tensor out = encode_attributes(none, v, table, p);
  Matrix<double> pads(8, 4);
  for (int t = 0; t < 8; ++t) pads.row(t) = table.value().row(kUnknownIndex);
  const Matrix<double> expected = blstm_forward(Tensor::constant(pads), p).value().colwise().mean();
  CHECK((out.value() - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(out.cols() == 6);
}

TEST_CASE("attribute encoder gradients") {
  const Vocabulary v = small_vocab();
  Rng rng(11);
  const Tensor table = Tensor::parameter(random_matrix(rng, v.size(), 3), "table");
  const BlstmParams p = random_blstm(3, 2, rng);
  const Tensor probe = Tensor::constant(random_matrix(rng, 1, 4));
  const std::vector<std::string> attrs{"female", "long hair", "skirt", "handbag", "in the center"};
  auto params = p.parameters();
  params.push_back(table);
  auto loss = [&] { return ad::sum(ad::mul(encode_attributes(attrs, v, table, p), probe)); };
  CHECK(ad::grad_check<double>(loss, params).max_relative_error < 1e-5);
}

TEST_CASE("batched text encoding matches one-at-a-time encoding") {
  const Vocabulary v = small_vocab();
  Rng rng(12);
  const TextEncoderParams params = TextEncoderParams::init(build_embedding_table(v, 4, rng), 3, rng);
  const std::vector<std::string> attrs{"male"};
  std::vector<TextQuery> queries;
  for (int n : {1, 4, 7}) queries.push_back(make_text_query(words(n), attributes_from_values(attrs), v, 6));
  const auto batch = encode_text(params, queries);
  CHECK(batch.features.shape() == std::vector<Eigen::Index>{3, 12});
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto single = encode_text(params, std::span<const TextQuery>(&queries[q], 1));
    CHECK((batch.features.value().row(static_cast<Eigen::Index>(q)) - single.features.value()).cwiseAbs().maxCoeff() <
          1e-14);
  }
  CHECK(batch.word_weights.value()(0, 1) == 0.0);
}
