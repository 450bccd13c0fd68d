#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sentikit::csv {

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_no, const std::string& what)
      : std::runtime_error("csv: line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

// RFC-4180 record reader: comma-separated, double quotes escaped by doubling,
// quoted fields may span lines. Returns nullopt at end of input.
// `line` tracks the physical line number of the record start (1-based).
inline std::optional<std::vector<std::string>> read_record(std::istream& in, std::size_t& line) {
  int first = in.peek();
  if (first == std::char_traits<char>::eof()) return std::nullopt;

  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  const std::size_t record_line = line;

  int ci;
  while ((ci = in.get()) != std::char_traits<char>::eof()) {
    const char c = static_cast<char>(ci);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) throw ParseError(record_line, "quote inside unquoted field");
      quoted = true;
      was_quoted = true;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
      continue;
    }
    if (c == '\r') {
      if (in.peek() == '\n') in.get();
      ++line;
      fields.push_back(std::move(field));
      return fields;
    }
    if (c == '\n') {
      ++line;
      fields.push_back(std::move(field));
      return fields;
    }
    if (was_quoted) throw ParseError(record_line, "content after closing quote");
    field.push_back(c);
  }
  if (quoted) throw ParseError(record_line, "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

inline bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

/// Strips a UTF-8 byte-order mark if the stream starts with one.
inline void skip_bom(std::istream& in) {
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
    if (in.gcount() != 3 || bom[1] != char(0xBB) || bom[2] != char(0xBF)) {
      for (int i = static_cast<int>(in.gcount()) - 1; i >= 0; --i) in.putback(bom[i]);
    }
  }
}

}  // namespace sentikit::csv
