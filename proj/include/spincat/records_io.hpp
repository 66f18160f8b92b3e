#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spincat/fit.hpp"
#include "spincat/metrology.hpp"
#include "spincat/sequence.hpp"

namespace spincat {

/// Malformed input file. line/column are 1-based; 0 means "not applicable".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& message, int line = 0, int column = 0);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Shortest text that round-trips the double exactly ("%.17g"); inf/nan spelled out.
std::string format_double(double v);

/// Numeric CSV with a header row. Columns are addressed by name.
struct CsvTable {
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> columns;
  std::size_t rows = 0;

  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const { return columns.count(name) != 0; }
};

CsvTable parse_csv(std::string_view text, std::span<const std::string> required = {});

// FringeRecord: tau_s,p_plus,p_minus,p_in[,n,n_plus,n_minus]
std::string fringe_records_csv(std::span<const FringeRecord> records);
std::string fringe_records_json(std::span<const FringeRecord> records);
std::vector<FringeRecord> parse_fringe_csv(std::string_view text);
std::vector<FringeRecord> parse_fringe_json(std::string_view text);

std::string rabi_csv(std::span<const double> areas, std::span<const double> p_plus);
std::string rabi_json(std::span<const double> areas, std::span<const double> p_plus);

std::string wigner_csv(const WignerMap& map);
std::string wigner_json(const WignerMap& map);

std::string fit_result_json(const FitResult& fit, int indent = 2);
std::string sensitivity_json(std::span<const SensitivityReport> reports, int indent = 2);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace spincat
