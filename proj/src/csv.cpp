#include "neuroray/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace neuroray::csv {

std::string number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string render(const Field& f) {
  if (const double* d = std::get_if<double>(&f)) return number(*d);
  if (const long long* i = std::get_if<long long>(&f)) return std::to_string(*i);
  return quote(std::get<std::string>(f));
}

}  // namespace

Table::Table(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw std::invalid_argument("CSV header must not be empty");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += quote(header[i]);
  }
  text_ += "\r\n";
}

void Table::add(std::vector<Field> row) {
  if (row.size() != columns_) throw std::invalid_argument("CSV row width does not match header");
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) text_ += ',';
    text_ += render(row[i]);
  }
  text_ += "\r\n";
  ++rows_;
}

}  // namespace neuroray::csv
