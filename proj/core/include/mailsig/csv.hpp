#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mailsig {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws DataError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Quotes a field when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

}  // namespace mailsig
