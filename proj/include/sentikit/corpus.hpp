#pragma once

#include <array>
#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sentikit/csv.hpp"

namespace sentikit {

enum class PostType { question, answer, question_comment, answer_comment };

inline constexpr std::string_view to_code(PostType t) {
  switch (t) {
    case PostType::question: return "q";
    case PostType::answer: return "a";
    case PostType::question_comment: return "qc";
    case PostType::answer_comment: return "ac";
  }
  return "?";
}

inline std::optional<PostType> post_type_from_code(std::string_view code) {
  if (code == "q") return PostType::question;
  if (code == "a") return PostType::answer;
  if (code == "qc") return PostType::question_comment;
  if (code == "ac") return PostType::answer_comment;
  return std::nullopt;
}

struct RawPost {
  std::string id;
  PostType type = PostType::question;
  std::string body;
};

struct Token {
  std::string surface;
  std::string normalized;  // ASCII-lowercased surface
};

/// Half-open token index range [begin, end).
struct SentenceRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const SentenceRange&) const = default;
};

struct CleanDocument {
  std::string id;
  PostType type = PostType::question;
  std::string text;
  std::vector<Token> tokens;
  std::vector<SentenceRange> sentences;
};

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

inline bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
  return true;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp <= 0x7F) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0x10FFFF) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// One pass of HTML entity decoding. Unknown entities are kept verbatim.
inline std::string decode_entities_once(std::string_view s, bool& changed) {
  std::string out;
  out.reserve(s.size());
  changed = false;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    bool decoded = true;
    if (!body.empty() && body[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = body.size() > 1;
      if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
        for (std::size_t k = 2; k < body.size() && ok; ++k) {
          const char c = ascii_lower(body[k]);
          if (is_digit(c)) cp = cp * 16 + static_cast<std::uint32_t>(c - '0');
          else if (c >= 'a' && c <= 'f') cp = cp * 16 + static_cast<std::uint32_t>(c - 'a' + 10);
          else ok = false;
        }
      } else {
        for (std::size_t k = 1; k < body.size() && ok; ++k) {
          if (is_digit(body[k])) cp = cp * 10 + static_cast<std::uint32_t>(body[k] - '0');
          else ok = false;
        }
      }
      if (ok && cp > 0 && cp <= 0x10FFFF) append_utf8(out, cp);
      else decoded = false;
    } else if (iequal(body, "amp")) {
      out.push_back('&');
    } else if (iequal(body, "lt")) {
      out.push_back('<');
    } else if (iequal(body, "gt")) {
      out.push_back('>');
    } else if (iequal(body, "quot")) {
      out.push_back('"');
    } else if (iequal(body, "apos")) {
      out.push_back('\'');
    } else if (iequal(body, "nbsp")) {
      out.push_back(' ');
    } else {
      decoded = false;
    }
    if (decoded) {
      changed = true;
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

inline std::string decode_entities(std::string s) {
  // Iterate to a fixed point so double-encoded bodies fully decode; capped to
  // keep the call total even on adversarial input.
  for (int round = 0; round < 4; ++round) {
    bool changed = false;
    s = decode_entities_once(s, changed);
    if (!changed) break;
  }
  return s;
}

/// Drops ```...``` regions (markdown fences), delimiters included. An
/// unpaired fence is left as literal text.
inline std::string remove_fenced_code(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 3, "```") == 0) {
      const std::size_t close = s.find("```", i + 3);
      if (close != std::string_view::npos) {
        out.push_back(' ');
        i = close + 3;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

inline bool tag_at(std::string_view s, std::size_t pos, std::string_view name, std::size_t& tag_end) {
  if (pos + 1 + name.size() > s.size() || s[pos] != '<') return false;
  if (!iequal(s.substr(pos + 1, name.size()), name)) return false;
  const std::size_t after = pos + 1 + name.size();
  if (after < s.size() && (is_alnum(s[after]) || s[after] == '-')) return false;  // e.g. <coder>
  const std::size_t gt = s.find('>', after);
  if (gt == std::string_view::npos) {
    tag_end = s.size();
    return true;
  }
  tag_end = gt + 1;
  return true;
}

/// Removes <name ...>content</name> elements including their content.
/// A missing close tag removes to end of text.
inline std::string remove_element(std::string_view s, std::string_view name) {
  const std::string close_tag = "</" + std::string(name);
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t open_end = 0;
    if (s[i] == '<' && tag_at(s, i, name, open_end)) {
      // find the matching close tag
      std::size_t j = open_end;
      std::size_t content_end = std::string_view::npos;
      while (j < s.size()) {
        const std::size_t lt = s.find('<', j);
        if (lt == std::string_view::npos) break;
        if (lt + 1 < s.size() && s[lt + 1] == '/' &&
            iequal(s.substr(lt + 2, name.size()), name)) {
          const std::size_t gt = s.find('>', lt);
          content_end = (gt == std::string_view::npos) ? s.size() : gt + 1;
          break;
        }
        j = lt + 1;
      }
      out.push_back(' ');
      i = (content_end == std::string_view::npos) ? s.size() : content_end;
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

/// Best-effort tag stripper: '<' starts a tag only when followed by a letter,
/// '/', or '!'. Anything else ('<3', 'a < b') is literal text.
inline std::string remove_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<' && i + 1 < s.size() &&
        (is_alpha(s[i + 1]) || s[i + 1] == '/' || s[i + 1] == '!')) {
      const std::size_t gt = s.find('>', i + 1);
      if (gt != std::string_view::npos) {
        out.push_back(' ');
        i = gt + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

inline bool url_scheme_at(std::string_view s, std::size_t i, std::size_t& scheme_len) {
  static constexpr std::string_view schemes[] = {"http://", "https://", "ftp://"};
  for (const auto scheme : schemes) {
    if (i + scheme.size() <= s.size() && iequal(s.substr(i, scheme.size()), scheme)) {
      scheme_len = scheme.size();
      return true;
    }
  }
  return false;
}

inline std::string remove_urls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t scheme_len = 0;
    const bool at_boundary = i == 0 || !is_alnum(s[i - 1]);
    bool is_url = false;
    if (at_boundary && url_scheme_at(s, i, scheme_len)) {
      is_url = i + scheme_len < s.size() && !is_space(s[i + scheme_len]);
    } else if (at_boundary && i + 4 <= s.size() && iequal(s.substr(i, 4), "www.")) {
      is_url = i + 4 < s.size() && !is_space(s[i + 4]);
    }
    if (is_url) {
      std::size_t j = i;
      while (j < s.size() && !is_space(s[j]) && s[j] != '<' && s[j] != '>' && s[j] != '"') ++j;
      out.push_back(' ');
      i = j;
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

/// Collapses space runs; a run containing a line break collapses to '\n'
/// (line breaks stay visible so sentence splitting can honor them).
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_space(s[i])) {
      out.push_back(s[i++]);
      continue;
    }
    bool newline = false;
    while (i < s.size() && is_space(s[i])) {
      if (s[i] == '\n' || s[i] == '\r') newline = true;
      ++i;
    }
    if (!out.empty() && i < s.size()) out.push_back(newline ? '\n' : ' ');
  }
  return out;
}

}  // namespace detail

/// Strips code blocks, HTML tags, and URLs from a post body; decodes HTML
/// entities; normalizes whitespace. Idempotent, never fails.
inline std::string strip_markup(std::string_view body) {
  std::string s = detail::decode_entities(std::string(body));
  s = detail::remove_fenced_code(s);
  s = detail::remove_element(s, "pre");
  s = detail::remove_element(s, "code");
  s = detail::remove_element(s, "script");
  s = detail::remove_element(s, "style");
  s = detail::remove_tags(s);
  s = detail::remove_urls(s);
  return detail::normalize_whitespace(s);
}

inline const std::vector<std::string>& default_emoticon_surfaces() {
  static const std::vector<std::string> surfaces = {
      ":)",  ":(",  ":D",  ":P",  ":p",  ":-)",  ":-(", ":-D", ":-P", ";)",
      ";-)", ":/",  ":-/", ":\\", ":|",  ":'(",  ":'-(", "=)",  "=(",  ":]",
      ":[",  ":o",  ":O",  ":-o", "xD",  "XD",   "<3",  "</3", "8)",  "B)",
      "D:",  ":S",  ":s",  "^^",  "^_^", "-_-",  "o_O", "O_o", ":3",  ";P",
  };
  return surfaces;
}

struct Tokenization {
  std::vector<Token> tokens;
  std::vector<SentenceRange> sentences;
};

// Deterministic tokenizer. Longest match at each position over: emoticon
// inventory > ?/! runs > @-mentions > words (letters, digits, apostrophes,
// any non-ASCII byte) > single punctuation marks. No stemming, no stopword
// removal. Mentions are rewritten to the @USER meta-token. Sentences split
// on '.', '?', '!', and line breaks.
class Tokenizer {
 public:
  Tokenizer() : Tokenizer(default_emoticon_surfaces()) {}

  explicit Tokenizer(const std::vector<std::string>& emoticon_surfaces) {
    for (const auto& surface : emoticon_surfaces) {
      if (surface.empty() || surface.find(' ') != std::string::npos) continue;
      emoticons_by_first_[static_cast<unsigned char>(surface[0])].push_back(surface);
    }
    for (auto& bucket : emoticons_by_first_) {
      std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() > b.size() : a < b;
      });
    }
  }

  Tokenization run(std::string_view text) const {
    Tokenization out;
    std::size_t sentence_begin = 0;
    bool pending_break = false;

    auto close_sentence = [&] {
      if (out.tokens.size() > sentence_begin) {
        out.sentences.push_back({sentence_begin, out.tokens.size()});
        sentence_begin = out.tokens.size();
      }
    };
    auto emit = [&](std::string surface) {
      Token t;
      t.normalized = detail::ascii_lower(surface);
      t.surface = std::move(surface);
      out.tokens.push_back(std::move(t));
    };

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
      const char c = text[i];
      if (detail::is_space(c)) {
        if (c == '\n' || c == '\r') pending_break = true;
        ++i;
        continue;
      }
      if (pending_break) {
        close_sentence();
        pending_break = false;
      }
      if (const std::size_t len = emoticon_at(text, i); len > 0) {
        emit(std::string(text.substr(i, len)));
        i += len;
        continue;
      }
      if (c == '?' || c == '!') {
        std::size_t j = i;
        while (j < n && (text[j] == '?' || text[j] == '!')) ++j;
        emit(std::string(text.substr(i, j - i)));
        pending_break = true;
        i = j;
        continue;
      }
      if (c == '@' && i + 1 < n && is_mention_char(text[i + 1])) {
        std::size_t j = i + 1;
        while (j < n && is_mention_char(text[j])) ++j;
        out.tokens.push_back({"@USER", "@user"});
        i = j;
        continue;
      }
      if (is_word_start(c)) {
        std::size_t j = i;
        while (j < n && is_word_char(text[j])) ++j;
        emit(std::string(text.substr(i, j - i)));
        i = j;
        continue;
      }
      emit(std::string(1, c));
      if (c == '.') pending_break = true;
      ++i;
    }
    close_sentence();
    return out;
  }

 private:
  static bool is_word_start(char c) {
    return detail::is_alnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
  }
  static bool is_word_char(char c) { return is_word_start(c) || c == '\''; }
  static bool is_mention_char(char c) { return detail::is_alnum(c) || c == '_'; }

  std::size_t emoticon_at(std::string_view text, std::size_t pos) const {
    const auto& bucket = emoticons_by_first_[static_cast<unsigned char>(text[pos])];
    for (const auto& surface : bucket) {
      if (text.compare(pos, surface.size(), surface) == 0) return surface.size();
    }
    return 0;
  }

  std::array<std::vector<std::string>, 256> emoticons_by_first_;
};

/// Convenience wrapper using the built-in emoticon inventory.
inline Tokenization tokenize(std::string_view text) {
  static const Tokenizer tokenizer;
  return tokenizer.run(text);
}

inline CleanDocument clean_post(const RawPost& post, const Tokenizer& tokenizer) {
  CleanDocument doc;
  doc.id = post.id;
  doc.type = post.type;
  doc.text = strip_markup(post.body);
  auto tokenization = tokenizer.run(doc.text);
  doc.tokens = std::move(tokenization.tokens);
  doc.sentences = std::move(tokenization.sentences);
  return doc;
}

// ---------------------------------------------------------------------------
// Post file I/O. Input: UTF-8 CSV with header id,post_type,text and
// post_type codes q/a/qc/ac; quotes per RFC-4180.

struct PostCsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<RawPost> read_posts_csv(std::istream& in) {
  csv::skip_bom(in);
  std::size_t line = 1;
  auto header = csv::read_record(in, line);
  if (!header || *header != std::vector<std::string>{"id", "post_type", "text"})
    throw PostCsvError("post file: expected header id,post_type,text");
  std::vector<RawPost> posts;
  while (auto record = csv::read_record(in, line)) {
    if (record->size() == 1 && (*record)[0].empty()) continue;  // trailing blank line
    if (record->size() != 3)
      throw PostCsvError("post file: row " + std::to_string(posts.size() + 2) +
                         ": expected 3 fields, got " + std::to_string(record->size()));
    RawPost post;
    post.id = std::move((*record)[0]);
    if (post.id.empty())
      throw PostCsvError("post file: row " + std::to_string(posts.size() + 2) + ": empty id");
    const auto type = post_type_from_code((*record)[1]);
    if (!type)
      throw PostCsvError("post file: row " + std::to_string(posts.size() + 2) +
                         ": unknown post_type '" + (*record)[1] + "'");
    post.type = *type;
    post.body = std::move((*record)[2]);
    posts.push_back(std::move(post));
  }
  return posts;
}

inline void write_posts_csv_header(std::ostream& out) { out << "id,post_type,text\n"; }

inline void write_post_csv_row(std::ostream& out, std::string_view id, PostType type,
                               std::string_view text) {
  csv::write_record(out, {std::string(id), std::string(to_code(type)), std::string(text)});
}

/// One document per line, normalized tokens space-separated (DSM training input).
inline void write_corpus_line(std::ostream& out, const CleanDocument& doc) {
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i > 0) out << ' ';
    out << doc.tokens[i].normalized;
  }
  out << '\n';
}

}  // namespace sentikit
