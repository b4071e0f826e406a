#pragma once

// Price CSV ingestion and emission, number formatting, and the flat
// `key = value` format shared by configs and synthetic specs.

#include "spt/grid.hpp"

#include <map>
#include <string>
#include <string_view>

namespace spt {

/// Shortest-safe round-trip text: 17 significant digits, decimal point, -0 written as 0.
std::string format_double(double x);
/// Whole-token decimal parse; nullopt-style failure reported by returning false.
bool parse_double(std::string_view text, double& out);

/// Wide CSV `date,T1,...,Td` (ISO dates; times become days since the first
/// row, unit "days") or `t,T1,...,Td` (numeric times, no unit). Empty,
/// unparsable or nonpositive cells, duplicate or decreasing dates, and ragged
/// rows are hard errors naming row and column.
SampledPath ingest_csv(const std::string& path);
SampledPath parse_price_csv(std::string_view text, const std::string& source = "<memory>");

/// `t,name1,...` rows at every stamp, 17 significant digits.
std::string price_csv(const SampledPath& prices);
void write_price_csv(const SampledPath& prices, const std::string& path);

/// Flat `key = value` text; `#` starts a comment. Duplicate keys are errors.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, const std::string& source);
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::string& source() const { return source_; }

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  Index integer(const std::string& key) const;
  Index integer_or(const std::string& key, Index fallback) const;
  /// Comma- or blank-separated numbers.
  Vector vector(const std::string& key) const;
  /// Rows separated by ';', entries as in vector().
  Matrix matrix(const std::string& key) const;

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
};

}  // namespace spt
