#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentikit/features.hpp"
#include "sentikit/random.hpp"
#include "sentikit/splits.hpp"
#include "sentikit/types.hpp"

namespace sentikit {

struct LearnerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyDataset : LearnerError {
  EmptyDataset() : LearnerError("train: empty dataset") {}
};
struct ModelSchemaMismatch : LearnerError {
  using LearnerError::LearnerError;
};

struct LabeledDataset {
  std::vector<FeatureVector> vectors;
  std::vector<Polarity> labels;
  std::string schema_id;
  std::size_t feature_dim = 0;

  std::size_t size() const { return vectors.size(); }

  LabeledDataset subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.schema_id = schema_id;
    out.feature_dim = feature_dim;
    out.vectors.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (auto i : indices) {
      out.vectors.push_back(vectors[i]);
      out.labels.push_back(labels[i]);
    }
    return out;
  }
};

struct TrainOptions {
  double tolerance = 0.1;  // stop when the largest projected-gradient violation drops below this
  int max_passes = 1000;
  bool record_dual_objective = false;
};

namespace learner_detail {

// L2-regularized L1-loss SVM dual coordinate descent over sparse rows. The
// bias is an implicit constant-1 feature at index `dim`, so the returned
// weight vector has dim+1 components. The seed drives the per-pass
// coordinate permutation.
struct BinarySolveResult {
  std::vector<double> weights;  // length dim + 1, last component is the bias
  int passes = 0;
  std::vector<double> dual_objective;  // one value per alpha update when recorded
};

inline BinarySolveResult solve_hinge_dual(std::span<const FeatureVector> rows,
                                          std::span<const signed char> y, std::size_t dim,
                                          double C, std::uint64_t seed,
                                          const TrainOptions& options) {
  const std::size_t n = rows.size();
  BinarySolveResult result;
  result.weights.assign(dim + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 1.0;  // the bias feature
    for (const auto& [col, v] : rows[i].entries) sq += v * v;
    qd[i] = sq;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(seed);

  double sum_alpha = 0.0;
  double w_squared = 0.0;
  auto& w = result.weights;

  for (int pass = 0; pass < options.max_passes; ++pass) {
    shuffle(order, rng);
    double max_violation = 0.0;
    for (const auto i : order) {
      double dot = w[dim];
      for (const auto& [col, v] : rows[i].entries) dot += w[col] * v;
      const double yi = y[i];
      const double g = yi * dot - 1.0;

      double pg = g;
      if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] >= C) pg = std::max(g, 0.0);
      max_violation = std::max(max_violation, std::fabs(pg));

      if (std::fabs(pg) > 1e-12) {
        const double old = alpha[i];
        alpha[i] = std::clamp(old - g / qd[i], 0.0, C);
        const double d = (alpha[i] - old) * yi;
        if (d != 0.0) {
          if (options.record_dual_objective) {
            w_squared += 2.0 * d * dot + d * d * qd[i];
            sum_alpha += alpha[i] - old;
            result.dual_objective.push_back(sum_alpha - 0.5 * w_squared);
          }
          w[dim] += d;
          for (const auto& [col, v] : rows[i].entries) w[col] += d * v;
        }
      }
    }
    result.passes = pass + 1;
    if (max_violation < options.tolerance) break;
  }
  return result;
}

}  // namespace learner_detail

// One-vs-rest linear SVM over the frozen feature schema. Class order
// negative < neutral < positive is the argmax tie-break; a class absent from
// the training data is never predicted.
struct PolarityModel {
  std::array<std::vector<double>, 3> weights;  // per class, length dim + 1 (bias last)
  std::array<bool, 3> present{false, false, false};
  double C = 0.0;
  std::string schema_id;
  std::size_t feature_dim = 0;

  struct Meta {
    std::uint64_t seed = 0;
    double tolerance = 0.1;
    int max_passes = 1000;
    std::array<int, 3> passes{0, 0, 0};
  } meta;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["classes"] = {"negative", "neutral", "positive"};
    j["C"] = C;
    j["schema_id"] = schema_id;
    j["feature_dim"] = feature_dim;
    j["scaling"] = "none";
    j["training"] = {{"seed", meta.seed},
                     {"tolerance", meta.tolerance},
                     {"max_passes", meta.max_passes},
                     {"passes", meta.passes}};
    j["present"] = present;
    j["weights"] = weights;
    return j;
  }

  static PolarityModel from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1) throw LearnerError("model: unsupported version");
    PolarityModel m;
    m.C = j.at("C").get<double>();
    m.schema_id = j.at("schema_id").get<std::string>();
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    const auto present = j.at("present").get<std::vector<bool>>();
    const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    if (present.size() != 3 || weights.size() != 3) throw LearnerError("model: malformed arrays");
    for (std::size_t k = 0; k < 3; ++k) {
      m.present[k] = present[k];
      m.weights[k] = weights[k];
      if (m.weights[k].size() != m.feature_dim + 1)
        throw LearnerError("model: weight length does not match feature_dim");
    }
    const auto& t = j.at("training");
    m.meta.seed = t.at("seed").get<std::uint64_t>();
    m.meta.tolerance = t.at("tolerance").get<double>();
    m.meta.max_passes = t.at("max_passes").get<int>();
    const auto passes = t.at("passes").get<std::vector<int>>();
    for (std::size_t k = 0; k < 3 && k < passes.size(); ++k) m.meta.passes[k] = passes[k];
    return m;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LearnerError("model: cannot write " + path.string());
    out << to_json().dump(2) << '\n';
  }

  static PolarityModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LearnerError("model: cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }
};

inline PolarityModel train(const LabeledDataset& data, double C, std::uint64_t seed,
                           const TrainOptions& options = {}) {
  const std::size_t feature_dim = data.feature_dim;
  if (data.vectors.empty()) throw EmptyDataset();
  if (data.vectors.size() != data.labels.size())
    throw LearnerError("train: vectors/labels length mismatch");
  if (C <= 0) throw LearnerError("train: C must be > 0");
  for (const auto& fv : data.vectors) {
    if (fv.schema_id != data.schema_id)
      throw ModelSchemaMismatch("train: vector schema does not match dataset schema");
    if (!fv.entries.empty() && fv.entries.back().first >= feature_dim)
      throw LearnerError("train: feature column exceeds feature_dim");
  }

  PolarityModel model;
  model.C = C;
  model.schema_id = data.schema_id;
  model.feature_dim = feature_dim;
  model.meta.seed = seed;
  model.meta.tolerance = options.tolerance;
  model.meta.max_passes = options.max_passes;

  for (std::size_t k = 0; k < 3; ++k) {
    const auto cls = static_cast<Polarity>(k);
    std::vector<signed char> y(data.labels.size());
    bool any = false;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
      y[i] = data.labels[i] == cls ? +1 : -1;
      any = any || y[i] == +1;
    }
    if (!any) {
      model.present[k] = false;
      model.weights[k].assign(feature_dim + 1, 0.0);
      continue;
    }
    auto solved = learner_detail::solve_hinge_dual(data.vectors, y, feature_dim, C,
                                                   seed + 0x51ed2701ull * (k + 1), options);
    model.present[k] = true;
    model.weights[k] = std::move(solved.weights);
    model.meta.passes[k] = solved.passes;
  }
  return model;
}

struct Prediction {
  Polarity label = Polarity::neutral;
  std::array<double, 3> decision_values{};
};

inline Prediction predict(const PolarityModel& model, const FeatureVector& fv) {
  if (fv.schema_id != model.schema_id)
    throw ModelSchemaMismatch("predict: feature vector schema does not match model");
  Prediction out;
  for (std::size_t k = 0; k < 3; ++k) {
    if (!model.present[k]) {
      out.decision_values[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const auto& w = model.weights[k];
    double dot = w[model.feature_dim];
    for (const auto& [col, v] : fv.entries) {
      if (col >= model.feature_dim)
        throw ModelSchemaMismatch("predict: feature column exceeds model dimension");
      dot += w[col] * v;
    }
    out.decision_values[k] = dot;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (out.decision_values[k] > out.decision_values[best]) best = k;
  out.label = static_cast<Polarity>(best);
  return out;
}

inline std::vector<Polarity> predict_labels(const PolarityModel& model,
                                            std::span<const FeatureVector> vectors) {
  std::vector<Polarity> out;
  out.reserve(vectors.size());
  for (const auto& fv : vectors) out.push_back(predict(model, fv).label);
  return out;
}

// ---------------------------------------------------------------------------
// C tuning via stratified k-fold cross-validation.

struct CvResult {
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

inline CvResult cross_validate(const LabeledDataset& data, double C, int folds,
                               std::uint64_t seed, const TrainOptions& options = {}) {
  if (data.vectors.empty()) throw EmptyDataset();
  const auto fold_of = stratified_fold_assignment(data.labels, folds, seed);
  CvResult result;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      (fold_of[i] == f ? test_idx : train_idx).push_back(i);
    if (test_idx.empty()) {
      result.fold_accuracy.push_back(1.0);
      continue;
    }
    const auto model = train(data.subset(train_idx), C, seed, options);
    std::size_t correct = 0;
    for (const auto i : test_idx)
      if (predict(model, data.vectors[i]).label == data.labels[i]) ++correct;
    result.fold_accuracy.push_back(static_cast<double>(correct) /
                                   static_cast<double>(test_idx.size()));
  }
  for (const double a : result.fold_accuracy) result.mean_accuracy += a;
  result.mean_accuracy /= static_cast<double>(result.fold_accuracy.size());
  return result;
}

struct TuneResult {
  double best_c = 0.0;
  std::vector<std::pair<double, double>> accuracy_by_c;  // (C, mean accuracy)
};

inline constexpr std::array<double, 9> kDefaultCGrid = {0.001, 0.005, 0.01, 0.05, 0.1,
                                                        0.5,   1.0,   5.0,  10.0};

/// Grid search maximizing mean held-out accuracy; ties go to the smallest C.
/// All grid values share one seeded fold assignment.
inline TuneResult tune_c(const LabeledDataset& data, std::span<const double> grid, int folds,
                         std::uint64_t seed, const TrainOptions& options = {}) {
  if (grid.empty()) throw LearnerError("tune: empty C grid");
  TuneResult result;
  double best_accuracy = -1.0;
  for (const double c : grid) {
    const auto cv = cross_validate(data, c, folds, seed, options);
    result.accuracy_by_c.emplace_back(c, cv.mean_accuracy);
    const bool better = cv.mean_accuracy > best_accuracy ||
                        (cv.mean_accuracy == best_accuracy && c < result.best_c);
    if (better) {
      best_accuracy = cv.mean_accuracy;
      result.best_c = c;
    }
  }
  return result;
}

}  // namespace sentikit
