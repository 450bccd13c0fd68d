#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sentikit/baseline.hpp"
#include "sentikit/csv.hpp"
#include "sentikit/features.hpp"
#include "sentikit/learner.hpp"
#include "sentikit/splits.hpp"
#include "sentikit/types.hpp"

namespace sentikit {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvalLengthMismatch : EvalError {
  EvalLengthMismatch(std::size_t a, std::size_t b)
      : EvalError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};
struct EmptyMatrix : EvalError {
  EmptyMatrix() : EvalError("confusion matrix is empty") {}
};

// ---------------------------------------------------------------------------
// Confusion matrix and precision/recall/F reporting.

struct ConfusionMatrix {
  // counts[gold][predicted], indexed in Polarity order
  std::array<std::array<long, 3>, 3> counts{};

  long total() const {
    long t = 0;
    for (const auto& row : counts)
      for (const long c : row) t += c;
    return t;
  }
  long row_sum(std::size_t g) const { return counts[g][0] + counts[g][1] + counts[g][2]; }
  long col_sum(std::size_t p) const { return counts[0][p] + counts[1][p] + counts[2][p]; }
  long diagonal() const { return counts[0][0] + counts[1][1] + counts[2][2]; }
};

inline ConfusionMatrix confusion(std::span<const Polarity> gold, std::span<const Polarity> pred) {
  if (gold.size() != pred.size()) throw EvalLengthMismatch(gold.size(), pred.size());
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i)
    ++cm.counts[index_of(gold[i])][index_of(pred[i])];
  return cm;
}

struct ClassMetrics {
  double recall = 0, precision = 0, f1 = 0;
};

struct PRFReport {
  std::array<ClassMetrics, 3> per_class;  // Polarity order
  ClassMetrics overall;                   // micro-averaged
  double accuracy = 0;
  long total = 0;
};

/// Per-class and micro-averaged recall/precision/F. 0/0 ratios are 0 by
/// convention; the micro averages pool TP/FP/FN over the classes.
inline PRFReport prf(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total == 0) throw EmptyMatrix();
  PRFReport report;
  report.total = total;
  long tp_pool = 0, fp_pool = 0, fn_pool = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const long tp = cm.counts[c][c];
    const long fn = cm.row_sum(c) - tp;
    const long fp = cm.col_sum(c) - tp;
    tp_pool += tp;
    fp_pool += fp;
    fn_pool += fn;
    auto& m = report.per_class[c];
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  }
  auto& o = report.overall;
  o.recall = tp_pool + fn_pool > 0
                 ? static_cast<double>(tp_pool) / static_cast<double>(tp_pool + fn_pool)
                 : 0.0;
  o.precision = tp_pool + fp_pool > 0
                    ? static_cast<double>(tp_pool) / static_cast<double>(tp_pool + fp_pool)
                    : 0.0;
  o.f1 = o.precision + o.recall > 0 ? 2 * o.precision * o.recall / (o.precision + o.recall) : 0.0;
  report.accuracy = static_cast<double>(cm.diagonal()) / static_cast<double>(total);
  return report;
}

inline nlohmann::json to_json(const PRFReport& report) {
  nlohmann::json j;
  j["total"] = report.total;
  j["accuracy"] = report.accuracy;
  j["overall"] = {{"recall", report.overall.recall},
                  {"precision", report.overall.precision},
                  {"f1", report.overall.f1}};
  for (std::size_t c = 0; c < 3; ++c) {
    j["per_class"][std::string(to_string(static_cast<Polarity>(c)))] = {
        {"recall", report.per_class[c].recall},
        {"precision", report.per_class[c].precision},
        {"f1", report.per_class[c].f1}};
  }
  return j;
}

/// Aligned text table, one row per named report; class groups in the order
/// Overall, Positive, Negative, Neutral.
inline std::string format_prf_table(
    const std::vector<std::pair<std::string, PRFReport>>& rows) {
  std::ostringstream out;
  std::size_t name_width = 8;
  for (const auto& [name, report] : rows) name_width = std::max(name_width, name.size());
  out << std::left << std::setw(static_cast<int>(name_width + 2)) << "";
  for (const char* group : {"Overall", "Positive", "Negative", "Neutral"})
    out << std::setw(18) << group;
  out << '\n' << std::setw(static_cast<int>(name_width + 2)) << "";
  for (int g = 0; g < 4; ++g) out << std::setw(6) << "R" << std::setw(6) << "P" << std::setw(6) << "F";
  out << '\n';
  const std::array<int, 3> display_order = {static_cast<int>(Polarity::positive),
                                            static_cast<int>(Polarity::negative),
                                            static_cast<int>(Polarity::neutral)};
  for (const auto& [name, report] : rows) {
    out << std::setw(static_cast<int>(name_width + 2)) << name;
    auto cell = [&](double v) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(2) << v;
      out << std::setw(6) << s.str();
    };
    cell(report.overall.recall);
    cell(report.overall.precision);
    cell(report.overall.f1);
    for (const int c : display_order) {
      cell(report.per_class[c].recall);
      cell(report.per_class[c].precision);
      cell(report.per_class[c].f1);
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Information gain with per-kind discretization: booleans use their two
// values, counts split {0, >0}, continuous features use ten equal-frequency
// bins from the column's own order statistics. Entropies in bits.

inline double entropy_bits(std::span<const long> counts) {
  long total = 0;
  for (const long c : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

inline double information_gain(std::span<const double> column, std::span<const Polarity> labels,
                               FeatureKind kind) {
  if (column.size() != labels.size()) throw EvalLengthMismatch(column.size(), labels.size());
  const std::size_t n = column.size();
  if (n == 0) return 0.0;

  constexpr std::size_t kQuantileBins = 10;
  std::vector<int> bin_of(n);
  std::size_t bin_count = 2;
  switch (kind) {
    case FeatureKind::boolean:
    case FeatureKind::count:
      for (std::size_t i = 0; i < n; ++i) bin_of[i] = column[i] != 0.0 ? 1 : 0;
      break;
    case FeatureKind::continuous: {
      std::vector<double> sorted(column.begin(), column.end());
      std::sort(sorted.begin(), sorted.end());
      std::array<double, kQuantileBins - 1> boundaries;
      for (std::size_t k = 1; k < kQuantileBins; ++k)
        boundaries[k - 1] = sorted[n * k / kQuantileBins];
      for (std::size_t i = 0; i < n; ++i) {
        int b = 0;
        for (const double boundary : boundaries)
          if (column[i] >= boundary) ++b;
        bin_of[i] = b;
      }
      bin_count = kQuantileBins;
      break;
    }
  }

  std::array<long, 3> label_counts{};
  std::vector<std::array<long, 3>> bin_label_counts(bin_count, {0, 0, 0});
  std::vector<long> bin_totals(bin_count, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++label_counts[index_of(labels[i])];
    ++bin_label_counts[bin_of[i]][index_of(labels[i])];
    ++bin_totals[bin_of[i]];
  }

  double conditional = 0.0;
  for (std::size_t b = 0; b < bin_count; ++b) {
    if (bin_totals[b] == 0) continue;
    conditional += static_cast<double>(bin_totals[b]) / static_cast<double>(n) *
                   entropy_bits(bin_label_counts[b]);
  }
  return std::max(entropy_bits(label_counts) - conditional, 0.0);
}

struct RankedFeature {
  std::size_t column = 0;
  std::string name;
  double gain = 0;
  FeatureBlock block = FeatureBlock::lexicon;
};

/// Every schema column ranked by information gain, descending (column index
/// breaks ties).
inline std::vector<RankedFeature> rank_by_information_gain(const LabeledDataset& data,
                                                           const FeatureSchema& schema) {
  const std::size_t n = data.size();
  const std::size_t dim = schema.total_dim();
  std::vector<std::vector<std::pair<std::size_t, double>>> by_column(dim);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [col, v] : data.vectors[i].entries) by_column[col].emplace_back(i, v);

  std::vector<RankedFeature> ranked;
  ranked.reserve(dim);
  std::vector<double> dense(n);
  for (std::size_t col = 0; col < dim; ++col) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (const auto& [i, v] : by_column[col]) dense[i] = v;
    RankedFeature rf;
    rf.column = col;
    rf.name = schema.feature_name(col);
    rf.block = schema.block_of(col);
    rf.gain = information_gain(dense, data.labels, schema.kind(col));
    ranked.push_back(std::move(rf));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.gain > b.gain; });
  return ranked;
}

// ---------------------------------------------------------------------------
// Annotation records, schema-consistency rules, agreement measures, and the
// majority-voting gold-standard construction.

enum class AnnotationPolarity { positive, negative, neutral, mixed };

inline constexpr std::string_view to_string(AnnotationPolarity p) {
  switch (p) {
    case AnnotationPolarity::positive: return "positive";
    case AnnotationPolarity::negative: return "negative";
    case AnnotationPolarity::neutral: return "neutral";
    case AnnotationPolarity::mixed: return "mixed";
  }
  return "?";
}

inline std::optional<AnnotationPolarity> parse_annotation_polarity(std::string_view s) {
  if (s == "positive") return AnnotationPolarity::positive;
  if (s == "negative") return AnnotationPolarity::negative;
  if (s == "neutral") return AnnotationPolarity::neutral;
  if (s == "mixed") return AnnotationPolarity::mixed;
  return std::nullopt;
}

enum class Emotion { love, joy, surprise, anger, sadness, fear };

inline constexpr std::array<std::string_view, 6> kEmotionNames = {"love",  "joy",     "surprise",
                                                                  "anger", "sadness", "fear"};

inline std::optional<Emotion> parse_emotion(std::string_view s) {
  for (std::size_t i = 0; i < kEmotionNames.size(); ++i)
    if (s == kEmotionNames[i]) return static_cast<Emotion>(i);
  return std::nullopt;
}

struct AnnotationRecord {
  std::string item_id;
  std::string coder_id;
  std::vector<Emotion> emotions;  // unordered set, no duplicates
  AnnotationPolarity polarity = AnnotationPolarity::neutral;

  bool has(Emotion e) const {
    return std::find(emotions.begin(), emotions.end(), e) != emotions.end();
  }
};

/// Coding-schema legality: a polarity label must be justified by the emotion
/// set. Neutral means no emotion (surprise alone excepted, it admits any
/// polarity); positive needs a positive emotion or surprise and no negative
/// one; negative symmetrically; mixed needs emotions from both sides.
inline bool is_schema_consistent(const AnnotationRecord& r) {
  const bool has_pos = r.has(Emotion::love) || r.has(Emotion::joy);
  const bool has_neg = r.has(Emotion::anger) || r.has(Emotion::sadness) || r.has(Emotion::fear);
  const bool has_surprise = r.has(Emotion::surprise);
  switch (r.polarity) {
    case AnnotationPolarity::neutral:
      return !has_pos && !has_neg;  // no emotion, or surprise alone
    case AnnotationPolarity::positive:
      return (has_pos || has_surprise) && !has_neg;
    case AnnotationPolarity::negative:
      return (has_neg || has_surprise) && !has_pos;
    case AnnotationPolarity::mixed:
      return has_pos && has_neg;
  }
  return false;
}

struct InvalidAnnotation : EvalError {
  InvalidAnnotation(const std::string& item, const std::string& coder, const std::string& what)
      : EvalError("annotation " + item + "/" + coder + ": " + what) {}
};

/// CSV `item_id,coder_id,emotions,polarity`; emotions is a ';'-separated
/// subset of the six basic labels. Every record must satisfy the coding
/// schema.
inline std::vector<AnnotationRecord> read_annotations_csv(std::istream& in) {
  csv::skip_bom(in);
  std::size_t line = 1;
  auto header = csv::read_record(in, line);
  if (!header ||
      *header != std::vector<std::string>{"item_id", "coder_id", "emotions", "polarity"})
    throw EvalError("annotation file: expected header item_id,coder_id,emotions,polarity");
  std::vector<AnnotationRecord> records;
  while (auto record = csv::read_record(in, line)) {
    if (record->size() == 1 && (*record)[0].empty()) continue;
    if (record->size() != 4) throw EvalError("annotation file: expected 4 fields");
    AnnotationRecord r;
    r.item_id = (*record)[0];
    r.coder_id = (*record)[1];
    if (r.item_id.empty() || r.coder_id.empty())
      throw EvalError("annotation file: empty item_id or coder_id");
    const std::string& emotions = (*record)[2];
    std::size_t start = 0;
    while (start <= emotions.size() && !emotions.empty()) {
      std::size_t semi = emotions.find(';', start);
      if (semi == std::string::npos) semi = emotions.size();
      const std::string_view name(emotions.data() + start, semi - start);
      if (!name.empty()) {
        const auto e = parse_emotion(name);
        if (!e) throw InvalidAnnotation(r.item_id, r.coder_id, "unknown emotion '" +
                                                                   std::string(name) + "'");
        if (!r.has(*e)) r.emotions.push_back(*e);
      }
      if (semi == emotions.size()) break;
      start = semi + 1;
    }
    const auto polarity = parse_annotation_polarity((*record)[3]);
    if (!polarity)
      throw InvalidAnnotation(r.item_id, r.coder_id, "unknown polarity '" + (*record)[3] + "'");
    r.polarity = *polarity;
    if (!is_schema_consistent(r))
      throw InvalidAnnotation(r.item_id, r.coder_id, "emotion/polarity combination not allowed");
    records.push_back(std::move(r));
  }
  return records;
}

inline double observed_agreement(std::span<const AnnotationPolarity> a,
                                 std::span<const AnnotationPolarity> b) {
  if (a.size() != b.size()) throw EvalLengthMismatch(a.size(), b.size());
  if (a.empty()) throw EvalError("observed agreement: empty input");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] == b[i]) ++same;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

struct KappaResult {
  double value = 0;
  // true when chance disagreement is zero (both coders constant and
  // identical); the 1.0 is then a convention, not a measurement
  bool degenerate = false;
};

/// Weighted Cohen's kappa with mild disagreement (polar vs neutral) weighted
/// 1 and strong disagreement (positive vs negative) weighted 2; mixed counts
/// 1 against either polar label and 2 against neutral.
inline KappaResult weighted_kappa(std::span<const AnnotationPolarity> a,
                                  std::span<const AnnotationPolarity> b) {
  if (a.size() != b.size()) throw EvalLengthMismatch(a.size(), b.size());
  if (a.empty()) throw EvalError("weighted kappa: empty input");
  // order: positive, negative, neutral, mixed
  static constexpr double weights[4][4] = {{0, 2, 1, 1}, {2, 0, 1, 1}, {1, 1, 0, 2}, {1, 1, 2, 0}};
  std::array<double, 4> marg_a{}, marg_b{};
  double observed = 0;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ia = static_cast<std::size_t>(a[i]);
    const auto ib = static_cast<std::size_t>(b[i]);
    observed += weights[ia][ib];
    marg_a[ia] += 1;
    marg_b[ib] += 1;
  }
  observed /= n;
  double expected = 0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      expected += weights[i][j] * (marg_a[i] / n) * (marg_b[j] / n);
  if (expected == 0.0) return {1.0, true};
  return {1.0 - observed / expected, false};
}

struct GoldLabel {
  std::string item_id;
  std::optional<Polarity> label;  // nullopt = excluded from the gold standard
};

struct WrongArity : EvalError {
  explicit WrongArity(std::size_t n)
      : EvalError("majority vote: expected 3 records, got " + std::to_string(n)) {}
};
struct DuplicateCoder : EvalError {
  explicit DuplicateCoder(const std::string& coder)
      : EvalError("majority vote: duplicate coder '" + coder + "'") {}
};

/// Majority vote over an item's three annotations. Items with any mixed
/// label, or with both a positive and a negative label, are excluded even
/// under majority agreement; otherwise the majority polarity wins.
inline GoldLabel majority_vote(std::span<const AnnotationRecord> records) {
  if (records.size() != 3) throw WrongArity(records.size());
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j)
      if (records[i].coder_id == records[j].coder_id) throw DuplicateCoder(records[i].coder_id);
    if (records[i].item_id != records[0].item_id)
      throw EvalError("majority vote: records span multiple items");
  }
  GoldLabel out;
  out.item_id = records[0].item_id;
  int pos = 0, neg = 0, neu = 0;
  bool mixed = false;
  for (const auto& r : records) {
    switch (r.polarity) {
      case AnnotationPolarity::positive: ++pos; break;
      case AnnotationPolarity::negative: ++neg; break;
      case AnnotationPolarity::neutral: ++neu; break;
      case AnnotationPolarity::mixed: mixed = true; break;
    }
  }
  if (mixed || (pos > 0 && neg > 0)) return out;  // excluded
  if (pos > neu) out.label = Polarity::positive;
  else if (neg > neu) out.label = Polarity::negative;
  else out.label = Polarity::neutral;
  return out;
}

/// Groups records by item (in first-appearance order) and votes each group.
inline std::vector<GoldLabel> vote_items(std::span<const AnnotationRecord> records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<AnnotationRecord>> groups;
  for (const auto& r : records) {
    auto [it, inserted] = groups.try_emplace(r.item_id);
    if (inserted) order.push_back(r.item_id);
    it->second.push_back(r);
  }
  std::vector<GoldLabel> out;
  out.reserve(order.size());
  for (const auto& item : order) out.push_back(majority_vote(groups[item]));
  return out;
}

// ---------------------------------------------------------------------------
// Chi-squared comparison of two classifiers against the same gold labels.

/// Regularized upper incomplete gamma Q(a, x): series for small x, continued
/// fraction otherwise.
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw EvalError("gamma_q: domain error");
  if (x == 0.0) return 1.0;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(log_prefactor);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_prefactor) * h;
}

inline double chi_squared_p_value(double statistic, int dof) {
  if (statistic <= 0.0) return 1.0;
  return gamma_q(static_cast<double>(dof) / 2.0, statistic / 2.0);
}

enum class ChiSquaredMode {
  correctness,       // 2x2: classifier x {correct, incorrect}
  predicted_labels,  // 2x3: classifier x predicted class
};

struct ChiSquaredResult {
  double statistic = 0;
  int dof = 1;
  double p_value = 1;
  bool zero_expected_cell = false;  // test still computed, cell skipped
};

inline ChiSquaredResult chi_squared_compare(std::span<const Polarity> gold,
                                            std::span<const Polarity> pred_a,
                                            std::span<const Polarity> pred_b,
                                            ChiSquaredMode mode = ChiSquaredMode::correctness,
                                            bool continuity_correction = false) {
  if (gold.size() != pred_a.size()) throw EvalLengthMismatch(gold.size(), pred_a.size());
  if (gold.size() != pred_b.size()) throw EvalLengthMismatch(gold.size(), pred_b.size());
  if (gold.empty()) throw EvalError("chi-squared: empty input");

  std::vector<std::vector<double>> observed;
  if (mode == ChiSquaredMode::correctness) {
    observed.assign(2, std::vector<double>(2, 0.0));
    for (std::size_t i = 0; i < gold.size(); ++i) {
      ++observed[0][pred_a[i] == gold[i] ? 0 : 1];
      ++observed[1][pred_b[i] == gold[i] ? 0 : 1];
    }
  } else {
    observed.assign(2, std::vector<double>(3, 0.0));
    for (std::size_t i = 0; i < gold.size(); ++i) {
      ++observed[0][index_of(pred_a[i])];
      ++observed[1][index_of(pred_b[i])];
    }
  }

  const std::size_t rows = observed.size();
  const std::size_t cols = observed[0].size();
  std::vector<double> row_sums(rows, 0.0), col_sums(cols, 0.0);
  double total = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      row_sums[r] += observed[r][c];
      col_sums[c] += observed[r][c];
      total += observed[r][c];
    }

  ChiSquaredResult result;
  result.dof = static_cast<int>((rows - 1) * (cols - 1));
  const double cc = continuity_correction ? 0.5 : 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double expected = row_sums[r] * col_sums[c] / total;
      if (expected == 0.0) {
        result.zero_expected_cell = true;
        continue;
      }
      const double diff = std::max(std::fabs(observed[r][c] - expected) - cc, 0.0);
      result.statistic += diff * diff / expected;
    }
  result.p_value = chi_squared_p_value(result.statistic, result.dof);
  return result;
}

// ---------------------------------------------------------------------------
// Stratified train/test split over a labeled dataset.

inline std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& gold,
                                                                  double train_fraction,
                                                                  std::uint64_t seed) {
  const auto idx = stratified_split_indices(gold.labels, train_fraction, seed);
  return {gold.subset(idx.train), gold.subset(idx.test)};
}

// ---------------------------------------------------------------------------
// Annotation-sample construction: equal counts per (post type x baseline
// polarity) cell, undetermined posts excluded from candidacy.

struct InsufficientCell : EvalError {
  InsufficientCell(PostType type, TrinaryLabel label, std::size_t available, std::size_t wanted)
      : EvalError("sample: cell (" + std::string(to_code(type)) + ", " +
                  std::string(to_string(label)) + ") has " + std::to_string(available) +
                  " candidates, need " + std::to_string(wanted)) {}
};

struct ScoredPost {
  RawPost post;
  TrinaryLabel label = TrinaryLabel::neutral;
};

/// Returns indices into `posts`, n_per_cell uniform draws from each of the
/// 12 cells, in cell order (post types x positive/negative/neutral).
inline std::vector<std::size_t> sample_for_annotation(std::span<const ScoredPost> posts,
                                                      std::size_t n_per_cell,
                                                      std::uint64_t seed) {
  constexpr std::array<PostType, 4> types = {PostType::question, PostType::answer,
                                             PostType::question_comment,
                                             PostType::answer_comment};
  constexpr std::array<TrinaryLabel, 3> labels = {TrinaryLabel::positive, TrinaryLabel::negative,
                                                  TrinaryLabel::neutral};
  SplitMix64 rng(seed);
  std::vector<std::size_t> selected;
  selected.reserve(n_per_cell * 12);
  for (const auto type : types) {
    for (const auto label : labels) {
      std::vector<std::size_t> cell;
      for (std::size_t i = 0; i < posts.size(); ++i)
        if (posts[i].post.type == type && posts[i].label == label) cell.push_back(i);
      if (cell.size() < n_per_cell) throw InsufficientCell(type, label, cell.size(), n_per_cell);
      shuffle(cell, rng);
      selected.insert(selected.end(), cell.begin(), cell.begin() + n_per_cell);
    }
  }
  return selected;
}

// ---------------------------------------------------------------------------
// Incremental feature-setting evaluation (the ablation ladder): one model per
// setting over a shared schema and split, with a chi-squared significance
// test between consecutive settings.

struct AblationConfig {
  std::vector<FeatureSetting> settings = {FeatureSetting::ngrams, FeatureSetting::keyword,
                                          FeatureSetting::keyword_semantic, FeatureSetting::full};
  double C = 0.05;
  std::uint64_t seed = 1;
  TrainOptions train_options;
  ChiSquaredMode chi_mode = ChiSquaredMode::correctness;
};

struct AblationRow {
  FeatureSetting setting = FeatureSetting::full;
  PRFReport report;
  std::vector<Polarity> predictions;
  std::optional<ChiSquaredResult> vs_previous;
};

inline std::vector<AblationRow> ablation_run(std::span<const CleanDocument> train_docs,
                                             std::span<const Polarity> train_labels,
                                             std::span<const CleanDocument> test_docs,
                                             std::span<const Polarity> test_labels,
                                             const Lexicon& lexicon, const EmbeddingSpace& space,
                                             const PrototypeSet& prototypes,
                                             const AblationConfig& config) {
  if (config.settings.empty()) throw EvalError("ablation: no feature settings");
  if (train_docs.size() != train_labels.size())
    throw EvalLengthMismatch(train_docs.size(), train_labels.size());
  if (test_docs.size() != test_labels.size())
    throw EvalLengthMismatch(test_docs.size(), test_labels.size());

  const auto schema = FeatureSchema::build(train_docs);
  std::vector<AblationRow> rows;
  for (const auto setting : config.settings) {
    LabeledDataset train_set;
    train_set.schema_id = schema.schema_id();
    train_set.feature_dim = schema.total_dim();
    train_set.labels.assign(train_labels.begin(), train_labels.end());
    for (const auto& doc : train_docs)
      train_set.vectors.push_back(assemble(doc, lexicon, schema, space, prototypes, setting));

    const auto model = train(train_set, config.C, config.seed, config.train_options);

    AblationRow row;
    row.setting = setting;
    for (const auto& doc : test_docs)
      row.predictions.push_back(
          predict(model, assemble(doc, lexicon, schema, space, prototypes, setting)).label);
    row.report = prf(confusion(test_labels, row.predictions));
    if (!rows.empty())
      row.vs_previous = chi_squared_compare(test_labels, rows.back().predictions, row.predictions,
                                            config.chi_mode);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sentikit
