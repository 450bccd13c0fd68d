#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>

#include "sentikit/corpus.hpp"
#include "sentikit/lexicon.hpp"

namespace sentikit {

/// Positive strength p in [+1,+5] and negative strength n in [-5,-1];
/// +1 / -1 mean absence of positive / negative sentiment.
struct SentimentScores {
  int p = 1;
  int n = -1;
  bool operator==(const SentimentScores&) const = default;
};

enum class TrinaryLabel { positive, negative, neutral, undetermined };

inline constexpr std::string_view to_string(TrinaryLabel label) {
  switch (label) {
    case TrinaryLabel::positive: return "positive";
    case TrinaryLabel::negative: return "negative";
    case TrinaryLabel::neutral: return "neutral";
    case TrinaryLabel::undetermined: return "undetermined";
  }
  return "?";
}

inline std::optional<TrinaryLabel> parse_trinary(std::string_view s) {
  if (s == "positive") return TrinaryLabel::positive;
  if (s == "negative") return TrinaryLabel::negative;
  if (s == "neutral") return TrinaryLabel::neutral;
  if (s == "undetermined") return TrinaryLabel::undetermined;
  return std::nullopt;
}

/// positive when p + n > 0, negative when p + n < 0, neutral when the
/// magnitudes tie below 4, undetermined on a strong tie (p = -n, p >= 4).
inline TrinaryLabel trinary(SentimentScores s) {
  const int sum = s.p + s.n;
  if (sum > 0) return TrinaryLabel::positive;
  if (sum < 0) return TrinaryLabel::negative;
  return s.p < 4 ? TrinaryLabel::neutral : TrinaryLabel::undetermined;
}

namespace baseline_detail {

inline bool ends_with_exclamation(const Token& token) {
  return !token.surface.empty() && token.surface.back() == '!';
}

inline bool is_mark_run(const Token& token) {
  if (token.surface.empty()) return false;
  for (char c : token.surface)
    if (c != '!' && c != '?') return false;
  return true;
}

inline int clamp_magnitude(int score, int lo, int hi) {
  const int sign = score < 0 ? -1 : 1;
  const int mag = std::clamp(std::abs(score), lo, hi);
  return sign * mag;
}

}  // namespace baseline_detail

struct TokenScoreNote {
  std::size_t index = 0;
  int base = 0;      // prior polarity from the lexicon
  int boost = 0;     // applied booster value, 0 if none
  bool negated = false;
  int final_score = 0;
  bool emoticon = false;
};

struct SentenceTrace {
  std::vector<TokenScoreNote> notes;
  bool emphasis_pos = false;
  bool emphasis_neg = false;
  SentimentScores scores;
};

// Scores one sentence from token prior polarities. A booster on the
// immediately preceding token raises the magnitude (cap 5); a negation within
// the two preceding tokens flips the sign (flipped magnitudes below 2 clamp
// to 2); a terminal '!' adds one point of emphasis on the side that has a
// matching term. p/n are the sentence extrema with floors +1/-1.
inline SentimentScores score_sentence(std::span<const Token> tokens, const Lexicon& lexicon,
                                      SentenceTrace* trace = nullptr) {
  using namespace baseline_detail;
  SentimentScores result;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto match = lexicon.lookup(tokens[i]);
    if (!match) continue;
    int score = match->score;
    TokenScoreNote note;
    note.index = i;
    note.base = score;
    note.emoticon = match->emoticon;
    if (!match->emoticon && std::abs(score) >= 2) {
      if (i >= 1) {
        if (const auto boost = lexicon.booster(tokens[i - 1].normalized)) {
          score = clamp_magnitude(score < 0 ? score - *boost : score + *boost, 1, 5);
          note.boost = *boost;
        }
      }
      bool negated = false;
      for (std::size_t back = 1; back <= 2 && back <= i; ++back)
        if (lexicon.is_negation(tokens[i - back].normalized)) negated = true;
      if (negated) {
        score = clamp_magnitude(-score, 2, 5);
        note.negated = true;
      }
    }
    note.final_score = score;
    if (trace) trace->notes.push_back(note);
    result.p = std::max(result.p, score);
    result.n = std::min(result.n, score);
  }
  if (!tokens.empty() && ends_with_exclamation(tokens.back())) {
    if (result.p >= 2) {
      result.p = std::min(result.p + 1, 5);
      if (trace) trace->emphasis_pos = true;
    }
    if (result.n <= -2) {
      result.n = std::max(result.n - 1, -5);
      if (trace) trace->emphasis_neg = true;
    }
  }
  if (trace) trace->scores = result;
  return result;
}

struct DocumentTrace {
  std::vector<SentenceTrace> sentences;
  SentimentScores scores;
  TrinaryLabel label = TrinaryLabel::neutral;
};

/// Document score: componentwise extremum over its sentence scores.
inline SentimentScores score_document(const CleanDocument& doc, const Lexicon& lexicon,
                                      DocumentTrace* trace = nullptr) {
  SentimentScores result;
  for (const auto& range : doc.sentences) {
    SentenceTrace sentence_trace;
    const std::span<const Token> sentence(doc.tokens.data() + range.begin,
                                          range.end - range.begin);
    const auto scores = score_sentence(sentence, lexicon, trace ? &sentence_trace : nullptr);
    if (trace) {
      for (auto& note : sentence_trace.notes) note.index += range.begin;
      trace->sentences.push_back(std::move(sentence_trace));
    }
    result.p = std::max(result.p, scores.p);
    result.n = std::min(result.n, scores.n);
  }
  if (trace) {
    trace->scores = result;
    trace->label = trinary(result);
  }
  return result;
}

/// Human-readable score trace for one document (the CLI --explain output).
inline std::string explain_document(const CleanDocument& doc, const Lexicon& lexicon) {
  DocumentTrace trace;
  score_document(doc, lexicon, &trace);
  std::ostringstream out;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const auto& range = doc.sentences[s];
    const auto& st = trace.sentences[s];
    std::size_t note_pos = 0;
    for (std::size_t i = range.begin; i < range.end; ++i) {
      if (i > range.begin) out << ' ';
      out << doc.tokens[i].surface;
      if (note_pos < st.notes.size() && st.notes[note_pos].index == i) {
        const auto& note = st.notes[note_pos];
        out << '[' << note.base << ']';
        if (note.boost != 0) out << "[booster " << (note.boost > 0 ? "+" : "") << note.boost << ']';
        if (note.negated) out << "[negated]";
        ++note_pos;
      }
    }
    if (st.emphasis_pos || st.emphasis_neg) out << " [emphasis]";
    out << " [sentence: " << st.scores.p << ", " << st.scores.n << "]\n";
  }
  out << "[result: " << trace.scores.p << ", " << trace.scores.n << "] [overall: "
      << to_string(trace.label) << "]\n";
  return out.str();
}

}  // namespace sentikit
