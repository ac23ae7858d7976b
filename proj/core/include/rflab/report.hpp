#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rflab {

// Shortest decimal text that reads back to the same double ("nan", "inf",
// "-inf" for non-finite values). Locale independent.
std::string format_real(double x);

// Comma-separated writer with a fixed header. Cells are written as given;
// numeric cells go through format_real so output is byte-stable.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(bool x);
  CsvWriter& cell(const std::string& text);
  // Ends the row; throws if the cell count does not match the header.
  void end_row();

  std::size_t rows() const { return rows_; }

 private:
  void separator();

  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace rflab
