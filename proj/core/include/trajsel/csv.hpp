#ifndef TRAJSEL_CSV_HPP
#define TRAJSEL_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace trajsel {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(const std::string& s);

/// Minimal CSV: comma separated, first row is the header, no quoting
/// (writers never emit fields containing commas).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// FNV-1a over a byte range; used for artifact checksums.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a_file(const std::filesystem::path& path);

}  // namespace trajsel

#endif
