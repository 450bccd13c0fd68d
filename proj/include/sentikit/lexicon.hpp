#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sentikit/corpus.hpp"

namespace sentikit {

/// Word class derived from a prior-polarity score: >= +2 positive,
/// <= -2 negative, +/-1 neutral.
enum class PolarityClass { positive, negative, neutral };

inline PolarityClass classify_score(int score) {
  if (score >= 2) return PolarityClass::positive;
  if (score <= -2) return PolarityClass::negative;
  return PolarityClass::neutral;
}

struct PriorPolarity {
  int score = 0;
  PolarityClass cls = PolarityClass::neutral;
};

struct LexiconError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingFile : LexiconError {
  explicit MissingFile(const std::string& path) : LexiconError("lexicon: missing file " + path) {}
};
struct LexiconParseError : LexiconError {
  std::size_t line;
  LexiconParseError(const std::string& file, std::size_t line_no, const std::string& what)
      : LexiconError("lexicon: " + file + ":" + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};
struct DuplicateTerm : LexiconError {
  std::string term;
  DuplicateTerm(const std::string& file, const std::string& t)
      : LexiconError("lexicon: " + file + ": duplicate entry '" + t + "'"), term(t) {}
};
struct ScoreOutOfRange : LexiconError {
  std::string term;
  int score;
  ScoreOutOfRange(const std::string& file, const std::string& t, int s)
      : LexiconError("lexicon: " + file + ": score " + std::to_string(s) + " out of range for '" +
                     t + "'"),
        term(t),
        score(s) {}
};

struct LexiconPaths {
  std::filesystem::path terms;
  std::filesystem::path emoticons;
  std::filesystem::path boosters;
  std::filesystem::path negations;
  std::filesystem::path laughter;

  /// Standard file names under a lexicon directory.
  static LexiconPaths in_directory(const std::filesystem::path& dir) {
    return {dir / "terms.tsv", dir / "emoticons.tsv", dir / "boosters.tsv",
            dir / "negations.txt", dir / "laughter.txt"};
  }
};

// Sentiment lexicon: term scores (with trailing-* prefix patterns), emoticon
// scores, booster strengths, negation words, laughter abbreviations. All
// lookups are case-insensitive; entries are stored case-folded. Immutable
// after load.
class Lexicon {
 public:
  struct Match {
    int score = 0;
    PolarityClass cls = PolarityClass::neutral;
    bool emoticon = false;
  };

  static Lexicon load(const LexiconPaths& paths) {
    Lexicon lex;
    lex.load_scored(paths.terms, Table::terms);
    lex.load_scored(paths.emoticons, Table::emoticons);
    lex.load_scored(paths.boosters, Table::boosters);
    lex.load_set(paths.negations, lex.negations_);
    lex.load_set(paths.laughter, lex.laughter_);
    return lex;
  }

  static Lexicon load_directory(const std::filesystem::path& dir) {
    return load(LexiconPaths::in_directory(dir));
  }

  /// Term/pattern/emoticon lookup with kind information. Emoticon surfaces
  /// match exactly (no patterns); exact term entries shadow prefix patterns;
  /// the longest matching pattern wins.
  std::optional<Match> lookup(const Token& token) const {
    const std::string folded = detail::ascii_lower(token.surface);
    if (auto it = emoticons_.find(folded); it != emoticons_.end())
      return Match{it->second, classify_score(it->second), true};
    return lookup_word(token.normalized);
  }

  /// Word-table lookup only (exact entries and prefix patterns, no emoticons).
  std::optional<Match> lookup_word(std::string_view normalized) const {
    const std::string folded = detail::ascii_lower(normalized);
    if (auto it = exact_terms_.find(folded); it != exact_terms_.end())
      return Match{it->second, classify_score(it->second), false};
    std::size_t best_len = 0;
    int best_score = 0;
    for (const auto& [stem, score] : prefix_patterns_) {
      if (stem.size() >= best_len && folded.size() >= stem.size() &&
          folded.compare(0, stem.size(), stem) == 0) {
        best_len = stem.size() + 1;  // +1 so a matching empty stem still registers
        best_score = score;
      }
    }
    if (best_len > 0) return Match{best_score, classify_score(best_score), false};
    return std::nullopt;
  }

  std::optional<PriorPolarity> prior_polarity(const Token& token) const {
    if (auto m = lookup(token)) return PriorPolarity{m->score, m->cls};
    return std::nullopt;
  }

  std::optional<int> booster(std::string_view normalized) const {
    auto it = boosters_.find(detail::ascii_lower(normalized));
    if (it == boosters_.end()) return std::nullopt;
    return it->second;
  }

  bool is_negation(std::string_view normalized) const {
    return negations_.count(detail::ascii_lower(normalized)) > 0;
  }

  bool is_laughter(std::string_view normalized) const {
    return laughter_.count(detail::ascii_lower(normalized)) > 0;
  }

  /// Surfaces for the tokenizer inventory: the forms as written in the file
  /// plus their case-folded variants, deduplicated.
  std::vector<std::string> emoticon_surfaces() const {
    std::vector<std::string> out = emoticon_surfaces_raw_;
    for (const auto& [surface, score] : emoticons_)
      if (std::find(out.begin(), out.end(), surface) == out.end()) out.push_back(surface);
    return out;
  }

  std::size_t term_count() const { return exact_terms_.size() + prefix_patterns_.size(); }
  std::size_t emoticon_count() const { return emoticons_.size(); }

 private:
  enum class Table { terms, emoticons, boosters };

  static bool valid_score(Table table, int score) {
    if (table == Table::boosters) return score == 1 || score == 2 || score == -1;
    return score >= -5 && score <= 5 && score != 0;
  }

  void load_scored(const std::filesystem::path& path, Table table) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path.string());
    const std::string file = path.filename().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos || tab == 0)
        throw LexiconParseError(file, line_no, "expected term<TAB>score");
      const std::string raw_term = line.substr(0, tab);
      std::string term = detail::ascii_lower(raw_term);
      const std::string score_text = line.substr(tab + 1);
      int score = 0;
      try {
        std::size_t used = 0;
        score = std::stoi(score_text, &used);
        if (used != score_text.size()) throw std::invalid_argument(score_text);
      } catch (const std::exception&) {
        throw LexiconParseError(file, line_no, "bad score '" + score_text + "'");
      }
      if (!valid_score(table, score)) throw ScoreOutOfRange(file, term, score);
      switch (table) {
        case Table::terms:
          if (term.size() > 1 && term.back() == '*') {
            term.pop_back();
            for (const auto& [stem, s] : prefix_patterns_)
              if (stem == term) throw DuplicateTerm(file, term + "*");
            prefix_patterns_.emplace_back(std::move(term), score);
          } else {
            if (!exact_terms_.emplace(term, score).second) throw DuplicateTerm(file, term);
          }
          break;
        case Table::emoticons:
          if (!emoticons_.emplace(term, score).second) throw DuplicateTerm(file, term);
          emoticon_surfaces_raw_.push_back(raw_term);
          break;
        case Table::boosters:
          if (!boosters_.emplace(term, score).second) throw DuplicateTerm(file, term);
          break;
      }
    }
  }

  void load_set(const std::filesystem::path& path, std::unordered_set<std::string>& target) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path.string());
    const std::string file = path.filename().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (line.find('\t') != std::string::npos || line.find(' ') != std::string::npos)
        throw LexiconParseError(file, line_no, "expected one term per line");
      std::string term = detail::ascii_lower(line);
      if (!target.insert(term).second) throw DuplicateTerm(file, term);
    }
  }

  std::unordered_map<std::string, int> exact_terms_;
  std::vector<std::pair<std::string, int>> prefix_patterns_;
  std::unordered_map<std::string, int> emoticons_;
  std::vector<std::string> emoticon_surfaces_raw_;
  std::unordered_map<std::string, int> boosters_;
  std::unordered_set<std::string> negations_;
  std::unordered_set<std::string> laughter_;
};

}  // namespace sentikit
