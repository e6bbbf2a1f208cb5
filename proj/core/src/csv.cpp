#include "topicreg/csv.hpp"

#include "topicreg/error.hpp"

namespace topicreg::csv {

bool Reader::next(Record& out) {
  out.fields.clear();
  std::string line;
  if (!std::getline(in_, line)) return false;
  ++line_;
  out.line = line_;

  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (;;) {
    if (!line.empty() && line.back() == '\r' && !quoted) line.pop_back();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty() && !was_quoted) {
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        out.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else {
        field.push_back(c);
      }
    }
    if (!quoted) break;
    // Embedded newline inside a quoted field.
    if (!std::getline(in_, line)) {
      throw DataError("unterminated quoted field starting at line " + std::to_string(out.line));
    }
    ++line_;
    field.push_back('\n');
  }
  out.fields.push_back(std::move(field));
  return true;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

void write_row(std::ostream& out, std::initializer_list<std::string> fields) {
  write_row(out, std::span<const std::string>(fields.begin(), fields.size()));
}

bool is_blank(const Record& rec) {
  for (const auto& f : rec.fields) {
    if (!f.empty()) return false;
  }
  return true;
}

}  // namespace topicreg::csv
