#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topicreg::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

/// RFC-4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. CRLF and LF line endings are both accepted.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Returns false at end of input. Throws DataError on an unterminated quote.
  bool next(Record& out);

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Quotes the field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);
void write_row(std::ostream& out, std::initializer_list<std::string> fields);

/// True if every field is empty (a blank line).
bool is_blank(const Record& rec);

}  // namespace topicreg::csv
