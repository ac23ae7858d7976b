#include "rflab/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "rflab/error.hpp"

namespace rflab {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf.data(), ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) out_ << ',';
    out_ << header[k];
  }
  out_ << '\n';
}

void CsvWriter::separator() {
  if (filled_ == columns_) throw std::logic_error("CsvWriter: too many cells in row");
  if (filled_) out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::cell(double x) {
  separator();
  out_ << format_real(x);
  return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
  separator();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(bool x) {
  separator();
  out_ << (x ? 1 : 0);
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  separator();
  if (text.find_first_of(",\"\n") == std::string::npos) {
    out_ << text;
    return *this;
  }
  out_ << '"';
  for (char c : text) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("CsvWriter: row is short");
  out_ << '\n';
  filled_ = 0;
  ++rows_;
}

}  // namespace rflab
