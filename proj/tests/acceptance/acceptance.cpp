// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and budgets are fixed
// here; the exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nlpr/autodiff/checkpoint.hpp"
#include "nlpr/autodiff/grad_check.hpp"
#include "nlpr/autodiff/ops.hpp"
#include "nlpr/data/dataset.hpp"
#include "nlpr/data/synthetic.hpp"
#include "nlpr/data/training_set.hpp"
#include "nlpr/fusion/scorer.hpp"
#include "nlpr/text/encoder.hpp"
#include "nlpr/train/evaluate.hpp"
#include "nlpr/train/trainer.hpp"
#include "nlpr/train/visual_source.hpp"
#include "nlpr/visual/attention_map.hpp"

using namespace nlpr;
using ad::Matrix;
using ad::Tensor;
using geometry::Box;

namespace {

// Criterion 1
constexpr double kGradTolerance = 1e-5;
constexpr double kGradSeconds = 30.0;
// Criterion 2
constexpr int kTrainScenes = 500;
constexpr int kTestScenes = 100;
constexpr double kMinRecAt1 = 0.85;
constexpr double kMinRecAt2 = 0.95;
constexpr int kMaxEpochs = 10;
constexpr double kTrainSeconds = 600.0;
// Criterion 3
constexpr double kIouTolerance = 1e-12;
constexpr int kIouBoxes = 1000;
constexpr int kShiftSeeds = 100;
constexpr int kShiftsPerSeed = 100;
// Criterion 4
constexpr double kIntegralTolerance = 0.01;
// Criterion 6
constexpr double kLossTolerance = 1e-9;
constexpr double kSaturatedLoss = 1e-20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string format(const char* fmt, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

Matrix<double> uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

void gradient_fidelity() {
  const auto start = Clock::now();
  Rng rng(2024);
  text::Vocabulary vocab;
  for (const char* w : {"a", "woman", "with", "hat", "female", "skirt", "hat"}) vocab.add(w);
  // T=3 words, k=4, H=5, C=4 global and local channels, d=6.
  const text::TextEncoderParams enc = text::TextEncoderParams::init(uniform(rng, vocab.size(), 4, 0.5), 5, rng);
  for (auto t : enc.parameters()) t.mutable_value() = uniform(rng, t.rows(), t.cols(), 0.6);
  const fusion::ScorerParams scorer = fusion::ScorerParams::init(4 + 4 + 8, 4 * 5, 6, rng);
  for (auto t : scorer.parameters()) t.mutable_value() = uniform(rng, t.rows(), t.cols(), 0.6);
  const Tensor global = Tensor::parameter(uniform(rng, 2, 4, 1.0), "global");
  const Tensor local = Tensor::parameter(uniform(rng, 2, 4, 1.0), "local");
  const Tensor spatial = Tensor::constant(uniform(rng, 2, 8, 1.0));
  const std::vector<std::string> words{"a", "woman", "hat"}, attrs{"female", "skirt", "hat"};
  const std::vector<text::TextQuery> queries{
      text::make_text_query(words, text::attributes_from_values(attrs), vocab, 3)};
  const std::vector<int> rows{0, 0}, labels{1, 0};
  auto loss = [&] {
    const auto encoded = text::encode_text(enc, queries);
    const Tensor text_rows = ad::gather_rows(encoded.features, rows);
    const auto scored = fusion::score(fusion::build_visual_vector(global, local, spatial), text_rows, scorer);
    return fusion::training_loss(scored.logits, labels);
  };
  auto params = enc.parameters();
  for (const auto& t : scorer.parameters()) params.push_back(t);
  params.push_back(global);
  params.push_back(local);
  std::size_t coordinates = 0;
  for (const auto& p : params) coordinates += static_cast<std::size_t>(p.size());
  const auto result = ad::grad_check<double>(loss, params);
  const double elapsed = seconds_since(start);
  // Diagnostic only: a wider step shows whether the worst coordinate is rounding noise
  // in f (error shrinks as eps grows) or a wrong derivative (error stays).
  const auto wide = ad::grad_check<double>(loss, params, 1e-4);
  report(1, "gradient fidelity", result.max_relative_error < kGradTolerance && elapsed < kGradSeconds,
         format("max rel err %.3g over %.0f coordinates at eps 1e-5 (limit %.0e), %.2f s", result.max_relative_error,
                double(coordinates), kGradTolerance, elapsed) +
             "; worst " + result.worst_parameter +
             format(" analytic %.6g numeric %.6g; diagnostic at eps 1e-4: %.3g", result.analytic, result.numeric,
                    wide.max_relative_error));
}

bool synthetic_retrieval(std::vector<train::EvalReport>& reports) {
  Rng train_rng(11), test_rng(12);
  const data::SyntheticConfig synth;
  const auto train_set = data::generate_synthetic_dataset(train_rng, synth, kTrainScenes, "train/");
  const auto test_set = data::generate_synthetic_dataset(test_rng, synth, kTestScenes, "test/");

  train::TrainConfig config;
  config.embedding_dim = 32;
  config.hidden = 32;
  config.fusion_dim = 32;
  config.max_tokens = 24;
  config.learning_rate = 3e-3;
  config.batch_size = 128;
  config.epochs = kMaxEpochs;

  // Random baseline: a uniformly random candidate per query.
  double baseline = 0.0;
  std::size_t queries = 0;
  for (const auto& scene : test_set.scenes) {
    const auto candidates = train::candidate_proposals(scene, config);
    for (const auto& person : scene.persons) {
      std::size_t good = 0;
      for (auto idx : candidates) good += geometry::iou(scene.proposals[idx], person.gt_box) >= train::kCorrectIou;
      const double share = candidates.empty() ? 0.0 : double(good) / double(candidates.size());
      baseline += share * double(person.descriptions.size());
      queries += person.descriptions.size();
    }
  }
  baseline /= double(queries);

  const auto start = Clock::now();
  train::TrainOptions options;
  options.on_epoch = [](const train::EpochLog& e) {
    std::printf("      epoch %d loss %.4f (%.1f s)\n", e.epoch, e.mean_loss, e.seconds);
    std::fflush(stdout);
  };
  const auto result = train::train(config, train_set.scenes, train_set.images, options);
  const double elapsed = seconds_since(start);
  const train::BackboneVisuals visuals(result.model, test_set.scenes, test_set.images);
  const auto eval = train::evaluate(result.model, test_set.scenes, visuals, false);
  reports.push_back(eval);
  const bool pass = eval.rec_at_1 >= kMinRecAt1 && eval.rec_at_2 >= kMinRecAt2 && elapsed < kTrainSeconds &&
                    int(result.epochs.size()) <= kMaxEpochs;
  report(2, "synthetic retrieval", pass,
         format("Rec@1 %.4f (>= %.2f), Rec@2 %.4f (>= %.2f)", eval.rec_at_1, kMinRecAt1, eval.rec_at_2, kMinRecAt2) +
             format(", random baseline Rec@1 %.3f, %.0f queries, %.0f epochs, training %.1f s", baseline,
                    double(eval.total), double(result.epochs.size()), elapsed) +
             format(" (limit %.0f s)", kTrainSeconds));
  return pass;
}

void geometry_oracle() {
  Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < kIouBoxes; ++i) {
    int c[8];
    for (int k = 0; k < 2; ++k) {
      const int x0 = int(rng.below(63)), y0 = int(rng.below(63));
      c[4 * k] = x0;
      c[4 * k + 1] = y0;
      c[4 * k + 2] = x0 + 1 + int(rng.below(std::uint64_t(64 - x0)));
      c[4 * k + 3] = y0 + 1 + int(rng.below(std::uint64_t(64 - y0)));
    }
    long both = 0, either = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const bool a = x >= c[0] && x < c[2] && y >= c[1] && y < c[3];
        const bool b = x >= c[4] && x < c[6] && y >= c[5] && y < c[7];
        both += a && b;
        either += a || b;
      }
    }
    const double oracle = double(both) / double(either);
    worst = std::max(worst, std::abs(geometry::iou(Box(c[0], c[1], c[2], c[3]), Box(c[4], c[5], c[6], c[7])) - oracle));
  }

  std::size_t samples = 0, good = 0, fallbacks = 0;
  const Box bounds(0, 0, 480, 240);
  for (int seed = 0; seed < kShiftSeeds; ++seed) {
    Rng r(std::uint64_t(1000 + seed));
    const double w = r.uniform(40, 120), h = r.uniform(80, 200);
    const double x0 = r.uniform(0, 480 - w), y0 = r.uniform(0, 240 - h);
    const Box gt(x0, y0, x0 + w, y0 + h);
    const auto shifted = geometry::augment_shift(gt, kShiftsPerSeed, 0.5, bounds, r);
    fallbacks += shifted.fell_back;
    for (const auto& b : shifted.boxes) {
      ++samples;
      good += geometry::iou(b, gt) > 0.5 && bounds.contains(b);
    }
  }
  report(3, "geometry oracle", worst < kIouTolerance && good == samples && samples == 10000u,
         format("max |iou - pixel count| %.3g over %.0f pairs; shifts with IOU > 0.5: %.0f / %.0f", worst,
                double(kIouBoxes), double(good), double(samples)) +
             format(" (%.0f seeds fell back)", double(fallbacks)));
}

void attention_identities() {
  Rng rng(5);
  double single_err = 0.0, dup_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Box> boxes;
    const int n = 1 + int(rng.below(5));
    for (int i = 0; i < n; ++i) {
      const double x0 = rng.uniform(0, 400), y0 = rng.uniform(0, 150);
      boxes.emplace_back(x0, y0, x0 + rng.uniform(20, 80), y0 + rng.uniform(40, 90));
    }
    const auto one = visual::attention_map({boxes[0]}, 16, 16, 480, 240);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        const double x = (j + 0.5) * 480 / 16, y = (i + 0.5) * 240 / 16;
        single_err = std::max(single_err, std::abs(one(i, j) - visual::gaussian_density(x, y, boxes[0])));
      }
    }
    const auto map = visual::attention_map(boxes, 16, 16, 480, 240);
    auto doubled = boxes;
    doubled.insert(doubled.end(), boxes.begin(), boxes.end());
    const double scale = map.maxCoeff();
    dup_err = std::max(dup_err, (visual::attention_map(doubled, 16, 16, 480, 240) - map).cwiseAbs().maxCoeff() / scale);
  }
  double worst_integral_gap = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const double x0 = rng.uniform(0, 100), y0 = rng.uniform(0, 100);
    const Box b(x0, y0, x0 + rng.uniform(10, 100), y0 + rng.uniform(10, 100));
    const double sx = b.width() / 2, sy = b.height() / 2;
    const int n = 600;
    const double dx = 12 * sx / n, dy = 12 * sy / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        total += visual::gaussian_density(b.center_x() - 6 * sx + (j + 0.5) * dx, b.center_y() - 6 * sy + (i + 0.5) * dy, b);
      }
    }
    worst_integral_gap = std::max(worst_integral_gap, std::abs(total * dx * dy - 1.0));
  }
  report(4, "attention-map identities",
         single_err == 0.0 && dup_err < 1e-15 && worst_integral_gap <= kIntegralTolerance,
         format("N=1 max deviation %.3g, duplicated list max relative change %.3g, worst |integral - 1| %.3g", single_err,
                dup_err, worst_integral_gap));
}

void voting_oracle() {
  std::size_t cases = 0, agree = 0;
  for (auto cat : text::all_categories()) {
    std::vector<std::string> options{"unknown"};
    for (auto v : text::catalogue_values(cat)) options.emplace_back(v);
    for (const auto& a : options) {
      for (const auto& b : options) {
        for (const auto& c : options) {
          const std::vector<std::string> votes{a, b, c};
          std::optional<std::string> expected;
          if (a != "unknown" && b != "unknown" && c != "unknown") {
            if (a == b || a == c) expected = a;
            else if (b == c) expected = b;
          }
          data::AttributeVotes all;
          for (auto& list : all) list = {"unknown"};
          all[static_cast<std::size_t>(cat)] = votes;
          agree += data::resolve_attributes(all)[static_cast<std::size_t>(cat)] == expected;
          ++cases;
        }
      }
    }
  }
  report(5, "voting oracle", agree == cases,
         format("%.0f / %.0f three-voter combinations across all 8 categories agree", double(agree), double(cases)));
}

void loss_identities() {
  const auto loss = [](double s, int label) {
    const std::vector<int> labels{label};
    return fusion::training_loss(Tensor::scalar(s), labels).item();
  };
  const double at_zero = loss(0.0, 1), at_two = loss(2.0, 0), at_fifty = loss(50.0, 1);
  const double e0 = std::abs(at_zero - std::log(2.0)), e2 = std::abs(at_two - std::log1p(std::exp(2.0)));
  report(6, "loss identities", e0 < kLossTolerance && e2 < kLossTolerance && at_fifty < kSaturatedLoss,
         format("|L(0,1) - ln 2| %.3g, |L(2,0) - log(1+e^2)| %.3g, L(50,1) %.3g", e0, e2, at_fifty));
}

void pipeline_counting() {
  data::SyntheticConfig cfg;
  cfg.persons = 2;
  cfg.descriptions = 3;
  Rng gen(21);
  const auto ds = data::generate_synthetic_dataset(gen, cfg, 1, "fixture/");
  Rng rng(22);
  const auto set = data::build_training_set(ds.scenes, rng, {3, 0.5, {}});
  std::size_t ones = 0, zeros = 0, bounded = 0, own_negatives = 0;
  for (const auto& t : set.tuples) {
    if (t.label == 1) {
      ++ones;
      bounded += geometry::iou(t.proposal, ds.scenes[t.scene].persons[t.person].gt_box) > 0.5;
    } else {
      ++zeros;
      own_negatives += t.text.scene == t.scene && t.text.person == t.person;
    }
  }
  report(7, "pipeline counting", ones == 18 && zeros == 18 && bounded == ones && own_negatives == 0,
         format("%.0f positives, %.0f negatives, %.0f positives within the IOU bound, %.0f self-paired negatives",
                double(ones), double(zeros), double(bounded), double(own_negatives)));
}

void report_mechanics(std::vector<train::EvalReport>& reports) {
  data::SyntheticConfig synth;
  Rng a(31), b(32);
  const auto train_set = data::generate_synthetic_dataset(a, synth, 20, "r/");
  const auto test_set = data::generate_synthetic_dataset(b, synth, 10, "s/");
  train::TrainConfig config;
  config.embedding_dim = 16;
  config.hidden = 16;
  config.fusion_dim = 16;
  config.max_tokens = 24;
  config.epochs = 2;
  const auto run = [&](std::string& ckpt, std::string& json) {
    const auto result = train::train(config, train_set.scenes, train_set.images);
    ckpt = ad::encode_checkpoint(train::training_checkpoint(result));
    const train::BackboneVisuals visuals(result.model, test_set.scenes, test_set.images);
    const auto eval = train::evaluate(result.model, test_set.scenes, visuals, false);
    const auto per_person = train::evaluate(result.model, test_set.scenes, visuals, true);
    reports.push_back(eval);
    reports.push_back(per_person);
    std::vector<train::BucketTable> tables;
    for (auto axis : {train::BucketAxis::DescriptionLength, train::BucketAxis::ProposalSize}) {
      tables.push_back(train::bucket_report(eval, axis, train::default_edges(axis)));
    }
    json = train::report_json(eval, tables).dump();
  };
  std::string c1, j1, c2, j2;
  run(c1, j1);
  run(c2, j2);

  bool ordered = true, partitioned = true;
  std::size_t tables = 0;
  for (const auto& r : reports) {
    ordered = ordered && r.rec_at_2 >= r.rec_at_1;
    for (auto axis : {train::BucketAxis::DescriptionLength, train::BucketAxis::ProposalSize}) {
      const auto table = train::bucket_report(r, axis, train::default_edges(axis));
      std::size_t count = 0;
      for (const auto& bucket : table.buckets) count += bucket.count;
      partitioned = partitioned && count == r.total;
      ++tables;
    }
  }
  report(8, "report mechanics", ordered && partitioned && c1 == c2 && j1 == j2,
         std::string("Rec@2 >= Rec@1 on ") + std::to_string(reports.size()) + " reports: " + (ordered ? "yes" : "no") +
             "; bucket counts partition totals in " + std::to_string(tables) + " tables: " +
             (partitioned ? "yes" : "no") + "; repeated seed gives identical checkpoint (" +
             std::to_string(c1.size()) + " bytes): " + (c1 == c2 ? "yes" : "no") +
             "; identical report: " + (j1 == j2 ? "yes" : "no"));
}

}  // namespace

int main() {
  std::vector<train::EvalReport> reports;
  const auto guarded = [](int id, const char* name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      report(id, name, false, std::string("threw: ") + e.what());
    }
  };
  guarded(1, "gradient fidelity", gradient_fidelity);
  guarded(3, "geometry oracle", geometry_oracle);
  guarded(4, "attention-map identities", attention_identities);
  guarded(5, "voting oracle", voting_oracle);
  guarded(6, "loss identities", loss_identities);
  guarded(7, "pipeline counting", pipeline_counting);
  guarded(2, "synthetic retrieval", [&] { synthetic_retrieval(reports); });
  guarded(8, "report mechanics", [&] { report_mechanics(reports); });
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
