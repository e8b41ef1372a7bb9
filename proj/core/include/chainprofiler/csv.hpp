#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace chainprofiler::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes; a trailing '\r' is dropped.
std::vector<std::string> split(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Line-oriented reader that tracks 1-based line numbers and skips blank lines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields);
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::string buffer_;
};

/// Reads a header row and checks it equals `expected` exactly. Throws
/// MalformedRow(1, ...) on mismatch and EmptyFile when no header exists.
void expect_header(Reader& reader, const std::vector<std::string>& expected, const std::string& source);

/// Atomically replaces `path` with `contents` (write to a sibling temp file, then rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace chainprofiler::csv
