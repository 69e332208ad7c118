#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace inkrementa {
namespace {

ModelConfig small_config(std::size_t input = 6, std::vector<std::size_t> hidden = {5}) {
  ModelConfig cfg;
  cfg.input_dim = input;
  cfg.hidden_dims = std::move(hidden);
  cfg.learning_rate = 0.1;
  cfg.batch_size = 4;
  cfg.epochs_per_stage = 1;
  return cfg;
}

/// Nudges every parameter (biases included) so no activation sits at a
/// ReLU kink and the student differs from any earlier snapshot.
void perturb(IncModel& model, SeededRng& rng, double scale) {
  model.for_each_parameter([&](std::span<double> block) {
    for (auto& p : block) p += rng.uniform(-scale, scale);
  });
}

TEST(ModelInit, SameSeedSameParameters) {
  SeededRng a(17), b(17);
  EXPECT_EQ(IncModel::init(small_config(), 3, a), IncModel::init(small_config(), 3, b));
}

TEST(ModelInit, HeadShapeAndZeroBiases) {
  SeededRng rng(1);
  ModelConfig cfg = small_config(8, {64, 32});
  const auto model = IncModel::init(cfg, 15, rng);
  EXPECT_EQ(model.head().rows(), 15u);
  EXPECT_EQ(model.head().cols(), 32u);
  for (const auto& layer : model.hidden())
    for (double b : layer.bias) EXPECT_EQ(b, 0.0);
  const double limit = std::sqrt(6.0 / 8.0);
  for (double w : model.hidden().front().weight.values()) EXPECT_LE(std::abs(w), limit);
}

TEST(ModelInit, NoHiddenLayersIsLinearOverInput) {
  SeededRng rng(2);
  const auto model = IncModel::init(small_config(4, {}), 3, rng);
  EXPECT_EQ(model.embed_dim(), 4u);
  const std::vector<double> x{1, -2, 0.5, 3};
  const auto out = model.forward(x);
  EXPECT_EQ(out.embedding, x);
  EXPECT_EQ(out.logits, matvec(model.head(), x));
}

TEST(ModelInit, InvalidConfigThrows) {
  SeededRng rng(0);
  auto cfg = small_config();
  cfg.learning_rate = 0.0;
  EXPECT_THROW(IncModel::init(cfg, 3, rng), ConfigError);
  cfg = small_config();
  cfg.batch_size = 0;
  EXPECT_THROW(IncModel::init(cfg, 3, rng), ConfigError);
  cfg = small_config(6, {5, 0});
  EXPECT_THROW(IncModel::init(cfg, 3, rng), ConfigError);
  EXPECT_THROW(IncModel::init(small_config(), 0, rng), ConfigError);
}

TEST(Forward, ZeroWeightsGiveZeroLogits) {
  auto cfg = small_config(3, {4});
  const auto model =
      make_model(cfg, {{Matrix2D(4, 3), std::vector<double>(4, 0.0)}}, Matrix2D(5, 4));
  for (double z : model.forward(std::vector<double>{1, 2, 3}).logits) EXPECT_EQ(z, 0.0);
}

TEST(Forward, HandEvaluatedOneHiddenUnit) {
  // z = 0.5*2 + 0.25*(-1) + 0.1 = 0.85; logits = [2, -1, 0] * 0.85.
  auto cfg = small_config(2, {1});
  const auto model = make_model(cfg, {{Matrix2D::from_rows({{0.5, 0.25}}), {0.1}}},
                                Matrix2D::from_rows({{2.0}, {-1.0}, {0.0}}));
  const auto out = model.forward(std::vector<double>{2.0, -1.0});
  ASSERT_EQ(out.logits.size(), 3u);
  EXPECT_NEAR(out.embedding[0], 0.85, 1e-15);
  EXPECT_NEAR(out.logits[0], 1.7, 1e-15);
  EXPECT_NEAR(out.logits[1], -0.85, 1e-15);
  EXPECT_EQ(out.logits[2], 0.0);
  // Negative pre-activation is clipped.
  EXPECT_EQ(model.forward(std::vector<double>{-2.0, 0.0}).logits[0], 0.0);
}

TEST(Forward, BatchMatchesPerSample) {
  SeededRng rng(3);
  const auto model = IncModel::init(small_config(6, {7, 5}), 4, rng);
  const auto x = oracle::random_matrix(9, 6, rng, 2.0);
  const auto batch = model.forward_batch(x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto one = model.forward(x.row(r));
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(batch.logits(r, j), one.logits[j]);
  }
}

TEST(Forward, DimensionMismatchThrows) {
  SeededRng rng(4);
  const auto model = IncModel::init(small_config(), 3, rng);
  EXPECT_THROW(model.forward(std::vector<double>{1, 2}), ShapeError);
}

TEST(ExpandHead, PreservesOldRowsBitExactly) {
  SeededRng rng(5);
  auto cfg = small_config(8, {64, 32});
  const auto base = IncModel::init(cfg, 15, rng);
  const auto grown = expand_head(base, 10, rng);
  ASSERT_EQ(grown.head().rows(), 25u);
  for (std::size_t r = 0; r < 15; ++r) {
    for (std::size_t c = 0; c < 32; ++c) EXPECT_EQ(grown.head()(r, c), base.head()(r, c));
  }
  const auto twice = expand_head(grown, 10, rng);
  EXPECT_EQ(twice.head().rows(), 35u);
  EXPECT_EQ(twice.hidden(), base.hidden());
}

TEST(ExpandHead, OldLogitsAndArgmaxUnchanged) {
  SeededRng rng(6);
  const auto base = IncModel::init(small_config(), 3, rng);
  const auto grown = expand_head(base, 4, rng);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-3, 3);
    const auto before = base.forward(x).logits;
    const auto after = grown.forward(x).logits;
    for (std::size_t j = 0; j < 3; ++j) ASSERT_EQ(before[j], after[j]);
    const auto argmax = [](const std::vector<double>& z, std::size_t n) {
      return std::max_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n)) - z.begin();
    };
    EXPECT_EQ(argmax(before, 3), argmax(after, 3));
  }
}

TEST(ExpandHead, ZeroIsAnError) {
  SeededRng rng(7);
  auto model = IncModel::init(small_config(), 3, rng);
  EXPECT_THROW(model.expand_head(0, rng), ArgumentError);
}

TEST(Snapshot, FrozenAgainstStudentUpdates) {
  SeededRng rng(8);
  auto model = IncModel::init(small_config(), 3, rng);
  const auto teacher = snapshot(model);
  const auto twin = snapshot(model);
  const auto x = oracle::random_matrix(4, 6, rng, 2.0);
  const std::vector<std::size_t> y{0, 1, 2, 1};
  std::vector<std::vector<double>> before;
  for (std::size_t r = 0; r < 4; ++r) {
    before.push_back(teacher.forward(x.row(r)).logits);
    EXPECT_EQ(before.back(), model.forward(x.row(r)).logits);
    EXPECT_EQ(before.back(), twin.forward(x.row(r)).logits);
  }
  for (int step = 0; step < 10; ++step) {
    backward_and_step(model, Batch{x, y}, nullptr, 0.0, DistillLoss::mse, 0.1);
  }
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(teacher.forward(x.row(r)).logits, before[r]);
  EXPECT_NE(model.forward(x.row(0)).logits, before[0]);
}

struct GradCase {
  const char* name;
  bool distill;
  DistillLoss loss;
};

void PrintTo(const GradCase& c, std::ostream* os) { *os << c.name; }

class GradientCheck : public ::testing::TestWithParam<GradCase> {};

TEST_P(GradientCheck, AnalyticMatchesCentralDifferences) {
  const auto param = GetParam();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SeededRng rng(100 + seed);
    auto model = IncModel::init(small_config(), 3, rng);
    perturb(model, rng, 0.3);
    const auto teacher = snapshot(model);
    model.expand_head(2, rng);
    perturb(model, rng, 0.3);
    const auto x = oracle::random_matrix(4, 6, rng, 2.0);
    const std::vector<std::size_t> y{0, 4, 2, 3};
    const double alpha = param.distill ? default_alpha(15, 10) : 0.0;
    const auto res = oracle::finite_difference_check(
        model, Batch{x, y}, param.distill ? &teacher : nullptr, alpha, param.loss);
    EXPECT_EQ(res.parameters, model.parameter_count());
    EXPECT_LE(res.max_rel_error, 1e-4) << param.name << " seed " << seed << " worst parameter "
                                      << res.worst_index;
  }
}

INSTANTIATE_TEST_SUITE_P(Losses, GradientCheck,
                         ::testing::Values(GradCase{"ce", false, DistillLoss::mse},
                                           GradCase{"ce_mse", true, DistillLoss::mse},
                                           GradCase{"ce_kld", true, DistillLoss::kld},
                                           GradCase{"ce_l1", true, DistillLoss::l1}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(GradientCheck, DeeperNetworkFullDistillation) {
  SeededRng rng(55);
  auto model = IncModel::init(small_config(5, {6, 4}), 2, rng);
  perturb(model, rng, 0.2);
  const auto teacher = snapshot(model);
  model.expand_head(3, rng);
  perturb(model, rng, 0.2);
  const auto x = oracle::random_matrix(6, 5, rng, 2.0);
  const std::vector<std::size_t> y{0, 1, 2, 3, 4, 1};
  for (auto loss : {DistillLoss::mse, DistillLoss::kld, DistillLoss::l1}) {
    const auto res = oracle::finite_difference_check(model, Batch{x, y}, &teacher, 0.5, loss);
    EXPECT_LE(res.max_rel_error, 1e-4) << to_string(loss);
  }
}

TEST(BackwardAndStep, AlphaZeroEqualsPlainCrossEntropySgd) {
  SeededRng rng(9);
  auto model = IncModel::init(small_config(6, {5, 4}), 5, rng);
  perturb(model, rng, 0.1);
  auto reference = model;
  const auto x = oracle::random_matrix(8, 6, rng, 2.0);
  const std::vector<std::size_t> y{0, 1, 2, 3, 4, 0, 1, 2};
  for (int step = 0; step < 5; ++step) {
    backward_and_step(model, Batch{x, y}, nullptr, 0.0, DistillLoss::mse, 0.05);
    oracle::plain_ce_sgd_step(reference, x, y, 0.05);
  }
  EXPECT_EQ(model, reference);
}

TEST(BackwardAndStep, IdenticalTeacherAddsNoDistillationLoss) {
  SeededRng rng(10);
  const auto model = IncModel::init(small_config(), 4, rng);
  const auto teacher = snapshot(model);
  const auto x = oracle::random_matrix(4, 6, rng, 2.0);
  const std::vector<std::size_t> y{0, 1, 2, 3};
  const double ce_only = batch_loss(model, Batch{x, y}, nullptr, 0.0, DistillLoss::mse);
  const double mixed = batch_loss(model, Batch{x, y}, &teacher, 0.3, DistillLoss::mse);
  EXPECT_DOUBLE_EQ(mixed, 0.7 * ce_only);
  auto stepped = model;
  EXPECT_DOUBLE_EQ(backward_and_step(stepped, Batch{x, y}, &teacher, 0.3, DistillLoss::mse, 0.1),
                   mixed);
}

TEST(BackwardAndStep, ArgumentErrors) {
  SeededRng rng(11);
  auto model = IncModel::init(small_config(), 3, rng);
  auto wide = IncModel::init(small_config(), 5, rng);
  const auto wide_teacher = snapshot(wide);
  const auto teacher = snapshot(model);
  const auto x = oracle::random_matrix(2, 6, rng);
  const std::vector<std::size_t> y{0, 1};
  const Batch batch{x, y};
  EXPECT_THROW(backward_and_step(model, batch, &teacher, 1.5, DistillLoss::mse, 0.1), ArgumentError);
  EXPECT_THROW(backward_and_step(model, batch, &teacher, -0.1, DistillLoss::mse, 0.1), ArgumentError);
  EXPECT_THROW(backward_and_step(model, batch, nullptr, 0.2, DistillLoss::mse, 0.1), ArgumentError);
  EXPECT_THROW(backward_and_step(model, batch, &teacher, 0.0, DistillLoss::mse, 0.1), ArgumentError);
  EXPECT_THROW(backward_and_step(model, batch, &wide_teacher, 0.2, DistillLoss::mse, 0.1), ShapeError);
  const std::vector<std::size_t> bad{0, 3};
  EXPECT_THROW(backward_and_step(model, Batch{x, bad}, nullptr, 0.0, DistillLoss::mse, 0.1),
               IndexError);
}

TEST(Training, SeparableGaussiansReachNinetyFivePercent) {
  // Three well-separated 2-D Gaussian blobs, 100 samples each.
  SeededRng rng(12);
  const double centers[3][2] = {{-4, 0}, {4, 0}, {0, 5}};
  Matrix2D x(300, 2);
  std::vector<std::size_t> y(300);
  for (std::size_t i = 0; i < 300; ++i) {
    y[i] = i / 100;
    x(i, 0) = centers[y[i]][0] + rng.normal();
    x(i, 1) = centers[y[i]][1] + rng.normal();
  }
  ModelConfig cfg = small_config(2, {16});
  cfg.learning_rate = 0.1;
  cfg.batch_size = 300;
  auto model = IncModel::init(cfg, 3, rng);
  std::size_t correct = 0;
  for (int epoch = 0; epoch < 200; ++epoch) {
    backward_and_step(model, Batch{x, y}, nullptr, 0.0, DistillLoss::mse, cfg.learning_rate);
  }
  for (std::size_t i = 0; i < 300; ++i) correct += model.predict(x.row(i)) == y[i];
  EXPECT_GE(static_cast<double>(correct) / 300.0, 0.95);
}

TEST(Training, DeterministicParameters) {
  auto run = [] {
    SeededRng rng(13);
    auto model = IncModel::init(small_config(), 3, rng);
    const auto x = oracle::random_matrix(16, 6, rng, 2.0);
    std::vector<std::size_t> y(16);
    for (std::size_t i = 0; i < 16; ++i) y[i] = i % 3;
    for (int step = 0; step < 20; ++step)
      backward_and_step(model, Batch{x, y}, nullptr, 0.0, DistillLoss::mse, 0.05);
    return model;
  };
  EXPECT_EQ(run(), run());
}

TEST(Serialization, RoundTripIsExact) {
  SeededRng rng(14);
  auto model = IncModel::init(small_config(6, {5, 4}), 3, rng);
  perturb(model, rng, 0.123456789);
  model.expand_head(2, rng);
  const auto path = (std::filesystem::temp_directory_path() / "inkrementa_model_rt.json").string();
  save_model(model, path);
  EXPECT_EQ(load_model(path), model);
  EXPECT_EQ(model_from_json(model_to_json(model)), model);
  std::filesystem::remove(path);
}

TEST(Serialization, VersionMismatchIsRejected) {
  SeededRng rng(15);
  auto doc = model_to_json(IncModel::init(small_config(), 3, rng));
  doc["format"] = "inkrementa-model-v0";
  EXPECT_THROW(model_from_json(doc), VersionError);
  doc.erase("format");
  EXPECT_THROW(model_from_json(doc), VersionError);
}

TEST(Serialization, ShapeMismatchIsRejected) {
  SeededRng rng(16);
  auto doc = model_to_json(IncModel::init(small_config(), 3, rng));
  doc["head"]["cols"] = 4;
  EXPECT_THROW(model_from_json(doc), ShapeError);
}

}  // namespace
}  // namespace inkrementa
