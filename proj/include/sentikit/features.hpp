#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sentikit/corpus.hpp"
#include "sentikit/dsm.hpp"
#include "sentikit/lexicon.hpp"
#include "sentikit/types.hpp"

namespace sentikit {

inline constexpr std::array<std::string_view, 19> kLexiconFeatureNames = {
    "Pos_words", "Neg_words", "Subj_words", "Last_pos", "Last_neg",
    "Last_emo",  "Sum_pos",   "Sum_neg",    "Sum_subj", "Max_pos",
    "Max_neg",   "Pos_emo",   "Neg_emo",    "Pos_Emph", "Neg_Emph",
    "End_Pos_Emph", "End_Neg_Emph", "End_Pos", "End_Neg"};

inline constexpr std::array<std::string_view, 6> kMicroFeatureNames = {
    "Uppercase_words", "Laughter", "Elongated_words", "M_repetitions",
    "User_mentions",   "EndWith_EXMark"};

inline constexpr std::array<std::string_view, 4> kSemanticFeatureNames = {"Sim_pos", "Sim_neg",
                                                                          "Sim_neu", "Sim_subj"};

/// Value shape of a feature column, used to pick the information-gain binning.
enum class FeatureKind { boolean, count, continuous };

enum class FeatureBlock { lexicon, unigram, bigram, micro, semantic };

inline constexpr std::string_view to_string(FeatureBlock b) {
  switch (b) {
    case FeatureBlock::lexicon: return "lexicon";
    case FeatureBlock::unigram: return "unigram";
    case FeatureBlock::bigram: return "bigram";
    case FeatureBlock::micro: return "micro";
    case FeatureBlock::semantic: return "semantic";
  }
  return "?";
}

/// Incremental feature settings (each one adds a block group).
enum class FeatureSetting { ngrams, keyword, keyword_semantic, full };

inline constexpr std::string_view to_string(FeatureSetting s) {
  switch (s) {
    case FeatureSetting::ngrams: return "ngrams";
    case FeatureSetting::keyword: return "keyword";
    case FeatureSetting::keyword_semantic: return "keyword+semantic";
    case FeatureSetting::full: return "full";
  }
  return "?";
}

inline std::optional<FeatureSetting> parse_feature_setting(std::string_view s) {
  if (s == "ngrams") return FeatureSetting::ngrams;
  if (s == "keyword") return FeatureSetting::keyword;
  if (s == "keyword+semantic") return FeatureSetting::keyword_semantic;
  if (s == "full") return FeatureSetting::full;
  return std::nullopt;
}

struct FeatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyTrainingSet : FeatureError {
  EmptyTrainingSet() : FeatureError("schema: empty training set") {}
};
struct SchemaMismatch : FeatureError {
  using FeatureError::FeatureError;
};

namespace feature_detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string bigram_key(std::string_view a, std::string_view b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a);
  key.push_back(' ');
  key.append(b);
  return key;
}

}  // namespace feature_detail

// Frozen feature column layout: 19 lexicon features, then the training-set
// unigrams and bigrams in first-occurrence order, then 6 micro features, then
// 4 semantic similarities. Built from training documents only and immutable
// afterwards; prediction-time n-grams outside the schema are ignored.
class FeatureSchema {
 public:
  static FeatureSchema build(std::span<const CleanDocument> training_docs) {
    if (training_docs.empty()) throw EmptyTrainingSet();
    FeatureSchema schema;
    for (const auto& doc : training_docs) {
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        const auto& unigram = doc.tokens[i].normalized;
        if (schema.unigram_index_.emplace(unigram, schema.unigram_list_.size()).second)
          schema.unigram_list_.push_back(unigram);
        if (i + 1 < doc.tokens.size()) {
          auto key = feature_detail::bigram_key(unigram, doc.tokens[i + 1].normalized);
          if (schema.bigram_index_.emplace(key, schema.bigram_list_.size()).second)
            schema.bigram_list_.push_back(std::move(key));
        }
      }
    }
    schema.recompute_id();
    return schema;
  }

  std::size_t unigram_count() const { return unigram_list_.size(); }
  std::size_t bigram_count() const { return bigram_list_.size(); }
  std::size_t total_dim() const { return 19 + unigram_count() + bigram_count() + 6 + 4; }

  std::size_t lexicon_begin() const { return 0; }
  std::size_t unigram_begin() const { return 19; }
  std::size_t bigram_begin() const { return 19 + unigram_count(); }
  std::size_t micro_begin() const { return bigram_begin() + bigram_count(); }
  std::size_t semantic_begin() const { return micro_begin() + 6; }

  std::optional<std::size_t> unigram_column(std::string_view normalized) const {
    const auto it = unigram_index_.find(std::string(normalized));
    if (it == unigram_index_.end()) return std::nullopt;
    return unigram_begin() + it->second;
  }

  std::optional<std::size_t> bigram_column(std::string_view a, std::string_view b) const {
    const auto it = bigram_index_.find(feature_detail::bigram_key(a, b));
    if (it == bigram_index_.end()) return std::nullopt;
    return bigram_begin() + it->second;
  }

  FeatureBlock block_of(std::size_t col) const {
    check_column(col);
    if (col < unigram_begin()) return FeatureBlock::lexicon;
    if (col < bigram_begin()) return FeatureBlock::unigram;
    if (col < micro_begin()) return FeatureBlock::bigram;
    if (col < semantic_begin()) return FeatureBlock::micro;
    return FeatureBlock::semantic;
  }

  std::string feature_name(std::size_t col) const {
    switch (block_of(col)) {
      case FeatureBlock::lexicon: return std::string(kLexiconFeatureNames[col]);
      case FeatureBlock::unigram: return "'" + unigram_list_[col - unigram_begin()] + "'";
      case FeatureBlock::bigram: return "'" + bigram_list_[col - bigram_begin()] + "'";
      case FeatureBlock::micro: return std::string(kMicroFeatureNames[col - micro_begin()]);
      case FeatureBlock::semantic:
        return std::string(kSemanticFeatureNames[col - semantic_begin()]);
    }
    return "?";
  }

  FeatureKind kind(std::size_t col) const {
    switch (block_of(col)) {
      case FeatureBlock::unigram:
      case FeatureBlock::bigram:
        return FeatureKind::count;
      case FeatureBlock::semantic:
        return FeatureKind::continuous;
      case FeatureBlock::micro:
        return col - micro_begin() == 5 ? FeatureKind::boolean : FeatureKind::count;
      case FeatureBlock::lexicon:
        break;
    }
    // lexicon block: counts, then score-valued, then booleans
    static constexpr std::array<FeatureKind, 19> kinds = {
        FeatureKind::count,      FeatureKind::count,      FeatureKind::count,
        FeatureKind::continuous, FeatureKind::continuous, FeatureKind::continuous,
        FeatureKind::continuous, FeatureKind::continuous, FeatureKind::continuous,
        FeatureKind::continuous, FeatureKind::continuous, FeatureKind::count,
        FeatureKind::count,      FeatureKind::boolean,    FeatureKind::boolean,
        FeatureKind::boolean,    FeatureKind::boolean,    FeatureKind::boolean,
        FeatureKind::boolean};
    return kinds[col];
  }

  const std::string& schema_id() const { return schema_id_; }
  const std::vector<std::string>& unigrams() const { return unigram_list_; }
  const std::vector<std::string>& bigrams() const { return bigram_list_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["schema_id"] = schema_id_;
    j["total_dim"] = total_dim();
    j["blocks"] = {
        {"lexicon", {lexicon_begin(), unigram_begin()}},
        {"unigrams", {unigram_begin(), bigram_begin()}},
        {"bigrams", {bigram_begin(), micro_begin()}},
        {"micro", {micro_begin(), semantic_begin()}},
        {"semantic", {semantic_begin(), total_dim()}},
    };
    j["unigrams"] = unigram_list_;
    j["bigrams"] = bigram_list_;
    return j;
  }

  static FeatureSchema from_json(const nlohmann::json& j) {
    FeatureSchema schema;
    schema.unigram_list_ = j.at("unigrams").get<std::vector<std::string>>();
    schema.bigram_list_ = j.at("bigrams").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < schema.unigram_list_.size(); ++i)
      if (!schema.unigram_index_.emplace(schema.unigram_list_[i], i).second)
        throw FeatureError("schema: duplicate unigram '" + schema.unigram_list_[i] + "'");
    for (std::size_t i = 0; i < schema.bigram_list_.size(); ++i)
      if (!schema.bigram_index_.emplace(schema.bigram_list_[i], i).second)
        throw FeatureError("schema: duplicate bigram '" + schema.bigram_list_[i] + "'");
    schema.recompute_id();
    if (j.contains("schema_id") && j.at("schema_id").get<std::string>() != schema.schema_id_)
      throw FeatureError("schema: stored id does not match content");
    return schema;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FeatureError("schema: cannot write " + path.string());
    out << to_json().dump(2) << '\n';
  }

  static FeatureSchema load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FeatureError("schema: cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }

 private:
  void check_column(std::size_t col) const {
    if (col >= total_dim()) throw FeatureError("schema: column out of range");
  }

  void recompute_id() {
    std::uint64_t h = feature_detail::fnv1a("sentikit-schema-v1");
    for (const auto& u : unigram_list_) {
      h = feature_detail::fnv1a(u, h);
      h = feature_detail::fnv1a("\x1f", h);
    }
    h = feature_detail::fnv1a("\x1e", h);
    for (const auto& b : bigram_list_) {
      h = feature_detail::fnv1a(b, h);
      h = feature_detail::fnv1a("\x1f", h);
    }
    char buf[17];
    auto r = std::to_chars(buf, buf + sizeof(buf), h, 16);
    schema_id_ = std::string(buf, r.ptr);
  }

  std::unordered_map<std::string, std::size_t> unigram_index_;
  std::unordered_map<std::string, std::size_t> bigram_index_;
  std::vector<std::string> unigram_list_;
  std::vector<std::string> bigram_list_;
  std::string schema_id_;
};

// ---------------------------------------------------------------------------
// Lexicon-based features. Word-token features use prior polarity only (no
// booster or negation context); emoticons feed the *_emo features and the
// End_* checks but never the word counts/sums.

struct LexiconFeatures {
  int pos_words = 0, neg_words = 0, subj_words = 0;
  int last_pos = 0, last_neg = 0, last_emo = 0;
  int sum_pos = 0, sum_neg = 0, sum_subj = 0;
  int max_pos = 0, max_neg = 0;
  int pos_emo = 0, neg_emo = 0;
  bool pos_emph = false, neg_emph = false;
  bool end_pos_emph = false, end_neg_emph = false;
  bool end_pos = false, end_neg = false;

  std::array<double, 19> as_array() const {
    return {static_cast<double>(pos_words), static_cast<double>(neg_words),
            static_cast<double>(subj_words), static_cast<double>(last_pos),
            static_cast<double>(last_neg),   static_cast<double>(last_emo),
            static_cast<double>(sum_pos),    static_cast<double>(sum_neg),
            static_cast<double>(sum_subj),   static_cast<double>(max_pos),
            static_cast<double>(max_neg),    static_cast<double>(pos_emo),
            static_cast<double>(neg_emo),    pos_emph ? 1.0 : 0.0,
            neg_emph ? 1.0 : 0.0,            end_pos_emph ? 1.0 : 0.0,
            end_neg_emph ? 1.0 : 0.0,        end_pos ? 1.0 : 0.0,
            end_neg ? 1.0 : 0.0};
  }
};

namespace feature_detail {

inline bool is_mark_token(const Token& t) {
  if (t.surface.empty()) return false;
  for (char c : t.surface)
    if (c != '!' && c != '?') return false;
  return true;
}

inline bool ends_with_exclamation(const std::vector<Token>& tokens) {
  return !tokens.empty() && tokens.back().surface.back() == '!';
}

inline std::optional<PolarityClass> token_class(const Token& t, const Lexicon& lexicon) {
  if (const auto m = lexicon.lookup(t)) return m->cls;
  return std::nullopt;
}

}  // namespace feature_detail

inline LexiconFeatures lexicon_features(const CleanDocument& doc, const Lexicon& lexicon) {
  using namespace feature_detail;
  LexiconFeatures f;
  for (const auto& token : doc.tokens) {
    const auto match = lexicon.lookup(token);
    if (!match) continue;
    if (match->emoticon) {
      f.last_emo = match->score;
      if (match->cls == PolarityClass::positive) ++f.pos_emo;
      if (match->cls == PolarityClass::negative) ++f.neg_emo;
      continue;
    }
    if (match->cls == PolarityClass::positive) {
      ++f.pos_words;
      f.sum_pos += match->score;
      f.max_pos = std::max(f.max_pos, match->score);
      f.last_pos = match->score;
    } else if (match->cls == PolarityClass::negative) {
      ++f.neg_words;
      f.sum_neg += match->score;
      f.max_neg = f.max_neg == 0 ? match->score : std::min(f.max_neg, match->score);
      f.last_neg = match->score;
    }
  }
  f.subj_words = f.pos_words + f.neg_words;
  f.sum_subj = f.sum_pos + f.sum_neg;

  const bool excl = ends_with_exclamation(doc.tokens);
  f.pos_emph = excl && (f.pos_words + f.pos_emo) > 0;
  f.neg_emph = excl && (f.neg_words + f.neg_emo) > 0;

  if (!doc.tokens.empty()) {
    const auto final_cls = token_class(doc.tokens.back(), lexicon);
    f.end_pos = final_cls == PolarityClass::positive;
    f.end_neg = final_cls == PolarityClass::negative;
    if (excl) {
      for (auto it = doc.tokens.rbegin(); it != doc.tokens.rend(); ++it) {
        if (is_mark_token(*it)) continue;
        const auto cls = token_class(*it, lexicon);
        f.end_pos_emph = cls == PolarityClass::positive;
        f.end_neg_emph = cls == PolarityClass::negative;
        break;
      }
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Keyword-based features: n-gram occurrence counts over the schema plus six
// micro-blogging signals.

struct MicroFeatures {
  int uppercase_words = 0;
  int laughter = 0;
  int elongated_words = 0;
  int m_repetitions = 0;
  int user_mentions = 0;
  bool endwith_exmark = false;

  std::array<double, 6> as_array() const {
    return {static_cast<double>(uppercase_words), static_cast<double>(laughter),
            static_cast<double>(elongated_words), static_cast<double>(m_repetitions),
            static_cast<double>(user_mentions),   endwith_exmark ? 1.0 : 0.0};
  }
};

namespace feature_detail {

inline bool all_uppercase_letters(std::string_view s) {
  if (s.size() < 2) return false;
  for (char c : s)
    if (c < 'A' || c > 'Z') return false;
  return true;
}

/// (ha|he){2,} over a normalized token.
inline bool laughter_pattern(std::string_view s) {
  if (s.size() < 4 || s.size() % 2 != 0) return false;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2)
    if (s[i] != 'h' || (s[i + 1] != 'a' && s[i + 1] != 'e')) return false;
  return true;
}

inline bool has_elongation(std::string_view s) {
  std::size_t run = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    run = s[i] == s[i - 1] ? run + 1 : 1;
    if (run >= 3) return true;
  }
  return false;
}

}  // namespace feature_detail

inline MicroFeatures micro_features(const CleanDocument& doc, const Lexicon& lexicon) {
  using namespace feature_detail;
  MicroFeatures m;
  for (const auto& token : doc.tokens) {
    if (all_uppercase_letters(token.surface)) ++m.uppercase_words;
    if (lexicon.is_laughter(token.normalized) || laughter_pattern(token.normalized)) ++m.laughter;
    if (has_elongation(token.surface)) ++m.elongated_words;
    if (is_mark_token(token) && token.surface.size() >= 2) ++m.m_repetitions;
    if (token.surface == "@USER") ++m.user_mentions;
  }
  m.endwith_exmark = ends_with_exclamation(doc.tokens);
  return m;
}

struct KeywordFeatures {
  std::vector<std::pair<std::size_t, double>> ngram_counts;  // schema columns, sorted
  MicroFeatures micro;
};

inline KeywordFeatures keyword_features(const CleanDocument& doc, const FeatureSchema& schema,
                                        const Lexicon& lexicon) {
  KeywordFeatures out;
  std::map<std::size_t, double> counts;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (const auto col = schema.unigram_column(doc.tokens[i].normalized)) counts[*col] += 1;
    if (i + 1 < doc.tokens.size()) {
      if (const auto col =
              schema.bigram_column(doc.tokens[i].normalized, doc.tokens[i + 1].normalized))
        counts[*col] += 1;
    }
  }
  out.ngram_counts.assign(counts.begin(), counts.end());
  out.micro = micro_features(doc, lexicon);
  return out;
}

// ---------------------------------------------------------------------------

struct SemanticFeatures {
  double sim_pos = 0, sim_neg = 0, sim_neu = 0, sim_subj = 0;

  std::array<double, 4> as_array() const { return {sim_pos, sim_neg, sim_neu, sim_subj}; }
};

inline SemanticFeatures semantic_features(const CleanDocument& doc, const EmbeddingSpace& space,
                                          const PrototypeSet& prototypes) {
  if (prototypes.dim != space.dim())
    throw SchemaMismatch("semantic features: prototype dim " + std::to_string(prototypes.dim) +
                         " does not match space dim " + std::to_string(space.dim()));
  const auto vec = doc_vector(doc.tokens, space);
  SemanticFeatures s;
  s.sim_pos = cosine(vec, prototypes.pos);
  s.sim_neg = cosine(vec, prototypes.neg);
  s.sim_neu = cosine(vec, prototypes.neu);
  s.sim_subj = cosine(vec, prototypes.subj);
  return s;
}

// ---------------------------------------------------------------------------

struct FeatureVector {
  std::vector<std::pair<std::size_t, double>> entries;  // sorted by column, zeros omitted
  std::string schema_id;

  double value(std::size_t col) const {
    for (const auto& [c, v] : entries)
      if (c == col) return v;
    return 0.0;
  }
};

/// Assembles the sparse feature vector for one document under a frozen
/// schema. `setting` masks whole blocks (the incremental evaluation ladder);
/// masked blocks contribute nothing.
inline FeatureVector assemble(const CleanDocument& doc, const Lexicon& lexicon,
                              const FeatureSchema& schema, const EmbeddingSpace& space,
                              const PrototypeSet& prototypes,
                              FeatureSetting setting = FeatureSetting::full) {
  FeatureVector fv;
  fv.schema_id = schema.schema_id();

  if (setting == FeatureSetting::full) {
    const auto lex = lexicon_features(doc, lexicon).as_array();
    for (std::size_t i = 0; i < lex.size(); ++i)
      if (lex[i] != 0.0) fv.entries.emplace_back(schema.lexicon_begin() + i, lex[i]);
  }

  const auto keyword = keyword_features(doc, schema, lexicon);
  for (const auto& [col, count] : keyword.ngram_counts) fv.entries.emplace_back(col, count);

  if (setting != FeatureSetting::ngrams) {
    const auto micro = keyword.micro.as_array();
    for (std::size_t i = 0; i < micro.size(); ++i)
      if (micro[i] != 0.0) fv.entries.emplace_back(schema.micro_begin() + i, micro[i]);
  }

  if (setting == FeatureSetting::keyword_semantic || setting == FeatureSetting::full) {
    const auto sims = semantic_features(doc, space, prototypes).as_array();
    for (std::size_t i = 0; i < sims.size(); ++i)
      if (sims[i] != 0.0) fv.entries.emplace_back(schema.semantic_begin() + i, sims[i]);
  }

  std::sort(fv.entries.begin(), fv.entries.end());
  return fv;
}

// ---------------------------------------------------------------------------
// Sparse matrix text format: one document per line,
//   <label> <col>:<value> <col>:<value> ...
// with 0-based ascending columns.

inline void write_feature_line(std::ostream& out, Polarity label, const FeatureVector& fv) {
  out << to_string(label);
  char buf[32];
  for (const auto& [col, value] : fv.entries) {
    out << ' ' << col << ':';
    const auto r = std::to_chars(buf, buf + sizeof(buf), value);
    out.write(buf, r.ptr - buf);
  }
  out << '\n';
}

struct FeatureMatrix {
  std::vector<FeatureVector> vectors;
  std::vector<Polarity> labels;
  std::string schema_id;
};

inline void write_feature_matrix(std::ostream& out, const FeatureMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.vectors.size(); ++i)
    write_feature_line(out, matrix.labels[i], matrix.vectors[i]);
}

inline FeatureMatrix read_feature_matrix(std::istream& in, const std::string& schema_id,
                                         std::size_t total_dim) {
  FeatureMatrix matrix;
  matrix.schema_id = schema_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    const char* label_end = p;
    while (label_end < end && *label_end != ' ') ++label_end;
    const auto label = parse_polarity(std::string_view(p, label_end - p));
    if (!label)
      throw FeatureError("feature matrix: line " + std::to_string(line_no) + ": bad label");
    FeatureVector fv;
    fv.schema_id = schema_id;
    p = label_end;
    std::size_t prev_col = 0;
    bool first = true;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      std::size_t col = 0;
      auto rc = std::from_chars(p, end, col);
      if (rc.ec != std::errc{} || rc.ptr == end || *rc.ptr != ':')
        throw FeatureError("feature matrix: line " + std::to_string(line_no) + ": bad entry");
      double value = 0;
      auto rv = std::from_chars(rc.ptr + 1, end, value);
      if (rv.ec != std::errc{})
        throw FeatureError("feature matrix: line " + std::to_string(line_no) + ": bad value");
      if (col >= total_dim)
        throw FeatureError("feature matrix: line " + std::to_string(line_no) +
                           ": column out of range");
      if (!first && col <= prev_col)
        throw FeatureError("feature matrix: line " + std::to_string(line_no) +
                           ": columns not ascending");
      fv.entries.emplace_back(col, value);
      prev_col = col;
      first = false;
      p = rv.ptr;
    }
    matrix.vectors.push_back(std::move(fv));
    matrix.labels.push_back(*label);
  }
  return matrix;
}

}  // namespace sentikit
