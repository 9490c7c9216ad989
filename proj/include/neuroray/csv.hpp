#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace neuroray::csv {

/// Shortest text that parses back to the same double (at most 17 significant digits).
std::string number(double value);

/// RFC 4180 field quoting: wraps in quotes only when needed.
std::string quote(std::string_view field);

using Field = std::variant<double, long long, std::string>;

/// In-memory table rendered with a mandatory header and CRLF line ends.
class Table {
 public:
  explicit Table(std::vector<std::string> header);

  void add(std::vector<Field> row);
  std::size_t rows() const { return rows_; }
  std::string str() const { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

}  // namespace neuroray::csv
