#include "sentikit/learner.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "test_util.hpp"

using namespace sentikit;
using testutil::TempDir;

namespace {

FeatureVector fv(std::vector<std::pair<std::size_t, double>> entries,
                 const std::string& schema_id = "s") {
  FeatureVector v;
  v.entries = std::move(entries);
  v.schema_id = schema_id;
  return v;
}

/// Three linearly separable clusters in two features.
LabeledDataset separable_dataset(int per_class, std::uint64_t seed) {
  LabeledDataset data;
  data.schema_id = "s";
  data.feature_dim = 2;
  SplitMix64 rng(seed);
  const double centers[3][2] = {{-4.0, 0.0}, {0.0, 4.0}, {4.0, 0.0}};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const double x = centers[c][0] + (rng.unit() - 0.5);
      const double y = centers[c][1] + (rng.unit() - 0.5);
      data.vectors.push_back(fv({{0, x}, {1, y}}));
      data.labels.push_back(static_cast<Polarity>(c));
    }
  }
  return data;
}

double training_accuracy(const PolarityModel& model, const LabeledDataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predict(model, data.vectors[i]).label == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("two-feature separable toy set reaches 100% training accuracy") {
  LabeledDataset data;
  data.schema_id = "s";
  data.feature_dim = 2;
  data.vectors = {fv({{1, 1.0}}), fv({{1, 2.0}}), fv({{0, 3.0}}), fv({{0, 4.0}})};
  data.labels = {Polarity::negative, Polarity::negative, Polarity::positive, Polarity::positive};
  auto model = train(data, 1.0, 7);
  CHECK(training_accuracy(model, data) == 1.0);
  // decision check on a held-out point near class A
  auto p = predict(model, fv({{1, 1.5}}));
  CHECK(p.label == Polarity::negative);
}

TEST_CASE("three-class separable sets train perfectly") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto data = separable_dataset(17, seed);
    auto model = train(data, 10.0, seed);
    CHECK(training_accuracy(model, data) == 1.0);
  }
}

TEST_CASE("single-class data always predicts that class") {
  LabeledDataset data;
  data.schema_id = "s";
  data.feature_dim = 2;
  data.vectors = {fv({{0, 1.0}}), fv({{1, -2.0}}), fv({})};
  data.labels = {Polarity::neutral, Polarity::neutral, Polarity::neutral};
  auto model = train(data, 1.0, 3);
  CHECK_FALSE(model.present[index_of(Polarity::negative)]);
  CHECK(model.present[index_of(Polarity::neutral)]);
  for (const auto& v : {fv({{0, 99.0}}), fv({{1, -50.0}}), fv({})})
    CHECK(predict(model, v).label == Polarity::neutral);
}

TEST_CASE("bias-only argmax") {
  PolarityModel model;
  model.schema_id = "s";
  model.feature_dim = 2;
  model.present = {true, true, true};
  model.weights[0] = {0, 0, -1};
  model.weights[1] = {0, 0, 0};
  model.weights[2] = {0, 0, 1};
  auto p = predict(model, fv({}));
  CHECK(p.label == Polarity::positive);
  CHECK(p.decision_values[0] == -1.0);
  CHECK(p.decision_values[2] == 1.0);
}

TEST_CASE("exact ties break towards the earlier class") {
  PolarityModel model;
  model.schema_id = "s";
  model.feature_dim = 1;
  model.present = {true, true, true};
  model.weights[0] = {0, 0.5};   // negative
  model.weights[1] = {0, 0.5};   // neutral
  model.weights[2] = {0, -1.0};  // positive
  CHECK(predict(model, fv({})).label == Polarity::negative);

  model.weights[0] = {0, -1.0};
  model.weights[1] = {0, 0.25};
  model.weights[2] = {0, 0.25};
  CHECK(predict(model, fv({})).label == Polarity::neutral);
}

TEST_CASE("prediction argmax is invariant under a common decision shift") {
  auto data = separable_dataset(10, 4);
  auto model = train(data, 1.0, 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto p = predict(model, data.vectors[i]);
    auto shifted = p.decision_values;
    for (auto& v : shifted) v += 123.5;
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k)
      if (shifted[k] > shifted[best]) best = k;
    CHECK(static_cast<Polarity>(best) == p.label);
  }
}

TEST_CASE("training is deterministic down to the last bit") {
  auto data = separable_dataset(12, 5);
  auto a = train(data, 0.5, 99);
  auto b = train(data, 0.5, 99);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(a.weights[k].size() == b.weights[k].size());
    for (std::size_t j = 0; j < a.weights[k].size(); ++j)
      REQUIRE(a.weights[k][j] == b.weights[k][j]);
  }
  // identical decision values on every input
  for (const auto& v : data.vectors) {
    auto pa = predict(a, v);
    auto pb = predict(b, v);
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(pa.decision_values[k] == pb.decision_values[k]);
  }
}

TEST_CASE("dual objective is monotone non-decreasing across updates") {
  auto data = separable_dataset(15, 6);
  std::vector<signed char> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    y[i] = data.labels[i] == Polarity::positive ? +1 : -1;
  TrainOptions options;
  options.record_dual_objective = true;
  auto solved = learner_detail::solve_hinge_dual(data.vectors, y, 2, 1.0, 11, options);
  REQUIRE(solved.dual_objective.size() > 10);
  for (std::size_t i = 1; i < solved.dual_objective.size(); ++i)
    REQUIRE(solved.dual_objective[i] >= solved.dual_objective[i - 1] - 1e-9);
}

TEST_CASE("schema mismatches are rejected") {
  auto data = separable_dataset(5, 8);
  auto model = train(data, 1.0, 8);
  CHECK_THROWS_AS(predict(model, fv({}, "other")), ModelSchemaMismatch);

  LabeledDataset bad = data;
  bad.vectors[0].schema_id = "other";
  CHECK_THROWS_AS(train(bad, 1.0, 8), ModelSchemaMismatch);
}

TEST_CASE("empty dataset and bad C") {
  LabeledDataset empty;
  empty.schema_id = "s";
  empty.feature_dim = 1;
  CHECK_THROWS_AS(train(empty, 1.0, 1), EmptyDataset);
  auto data = separable_dataset(5, 9);
  CHECK_THROWS_AS(train(data, 0.0, 1), LearnerError);
}

TEST_CASE("model JSON round-trips the decision function bit-exactly") {
  TempDir dir;
  auto data = separable_dataset(12, 10);
  auto model = train(data, 0.05, 10);
  model.save(dir.file("model.json"));
  auto back = PolarityModel::load(dir.file("model.json"));
  CHECK(back.C == model.C);
  CHECK(back.schema_id == model.schema_id);
  CHECK(back.feature_dim == model.feature_dim);
  for (const auto& v : data.vectors) {
    auto pa = predict(model, v);
    auto pb = predict(back, v);
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(pa.decision_values[k] == pb.decision_values[k]);
  }
}

TEST_CASE("cross-validation on separable data is perfect") {
  auto data = separable_dataset(20, 12);
  auto cv = cross_validate(data, 1.0, 5, 12);
  CHECK(cv.mean_accuracy == 1.0);
  CHECK(cv.fold_accuracy.size() == 5);
}

TEST_CASE("cross-validation on single-class data is trivially perfect") {
  LabeledDataset data;
  data.schema_id = "s";
  data.feature_dim = 1;
  for (int i = 0; i < 10; ++i) {
    data.vectors.push_back(fv({{0, static_cast<double>(i)}}));
    data.labels.push_back(Polarity::positive);
  }
  auto cv = cross_validate(data, 1.0, 5, 1);
  CHECK(cv.mean_accuracy == 1.0);
}

TEST_CASE("shuffled labels on random features score near chance") {
  LabeledDataset data;
  data.schema_id = "s";
  data.feature_dim = 30;
  SplitMix64 rng(13);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t c = 0; c < 30; ++c)
      if (rng.unit() < 0.3) entries.emplace_back(c, rng.unit());
    data.vectors.push_back(fv(std::move(entries)));
    data.labels.push_back(static_cast<Polarity>(i % 3));  // balanced, independent of features
  }
  auto cv = cross_validate(data, 1.0, 5, 13);
  CHECK(cv.mean_accuracy > 1.0 / 3.0 - 0.15);
  CHECK(cv.mean_accuracy < 1.0 / 3.0 + 0.15);
}

TEST_CASE("tuning: singleton grid returns that C") {
  auto data = separable_dataset(10, 14);
  const double grid[] = {0.07};
  auto tuned = tune_c(data, grid, 5, 14);
  CHECK(tuned.best_c == 0.07);
  REQUIRE(tuned.accuracy_by_c.size() == 1);
}

TEST_CASE("tuning: ties prefer the smaller C") {
  auto data = separable_dataset(10, 15);
  const double grid[] = {0.05, 0.01};  // both reach accuracy 1.0 on separable data
  auto tuned = tune_c(data, grid, 5, 15);
  CHECK(tuned.accuracy_by_c[0].second == 1.0);
  CHECK(tuned.accuracy_by_c[1].second == 1.0);
  CHECK(tuned.best_c == 0.01);
}

TEST_CASE("tuning rejects an empty grid and tiny classes") {
  auto data = separable_dataset(10, 16);
  CHECK_THROWS_AS(tune_c(data, {}, 5, 16), LearnerError);

  LabeledDataset tiny;
  tiny.schema_id = "s";
  tiny.feature_dim = 1;
  tiny.vectors = {fv({{0, 1.0}}), fv({{0, 2.0}}), fv({{0, 3.0}})};
  tiny.labels = {Polarity::positive, Polarity::negative, Polarity::neutral};
  const double grid[] = {1.0};
  CHECK_THROWS_AS(tune_c(tiny, grid, 2, 1), TooFewExamplesPerClass);
}

TEST_CASE("stratified folds balance class counts within one example") {
  std::vector<Polarity> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(Polarity::positive);
  for (int i = 0; i < 25; ++i) labels.push_back(Polarity::negative);
  for (int i = 0; i < 11; ++i) labels.push_back(Polarity::neutral);
  auto fold_of = stratified_fold_assignment(labels, 5, 21);
  for (int c = 0; c < 3; ++c) {
    std::array<int, 5> counts{};
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (index_of(labels[i]) == static_cast<std::size_t>(c)) ++counts[fold_of[i]];
    const int lo = *std::min_element(counts.begin(), counts.end());
    const int hi = *std::max_element(counts.begin(), counts.end());
    CHECK(hi - lo <= 1);
  }
}
