#include "spt/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spt {

std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // drops the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

/// Days since the civil epoch for a strict YYYY-MM-DD date.
bool parse_iso_date(std::string_view s, long long& days) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::string_view part, auto& out) {
    const auto r = std::from_chars(part.data(), part.data() + part.size(), out);
    return r.ec == std::errc() && r.ptr == part.data() + part.size();
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d)) return false;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return false;
  days = std::chrono::sys_days(ymd).time_since_epoch().count();
  return true;
}

std::string cell_name(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
  return r.ec == std::errc() && r.ptr == text.data() + text.size() && std::isfinite(out);
}

SampledPath parse_price_csv(std::string_view text, const std::string& source) {
  const std::vector<std::string_view> lines = lines_of(text);
  if (lines.empty()) throw IoError(source + ": empty price file");
  const std::vector<std::string_view> header = split(lines[0], ',');
  if (header.size() < 2) throw IoError(source + ": header needs a time column and at least one asset");
  const std::string first(trim(header[0]));
  const bool dated = first == "date";
  if (!dated && first != "t")
    throw IoError(source + ": first header column must be 'date' or 't', found '" + first + "'");
  std::vector<std::string> names;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string name(trim(header[c]));
    if (name.empty()) throw IoError(source + ": empty asset name in header column " + std::to_string(c + 1));
    for (const auto& n : names)
      if (n == name) throw IoError(source + ": duplicate asset name '" + name + "'");
    names.push_back(std::move(name));
  }
  const Index d = static_cast<Index>(names.size());
  const Index rows = static_cast<Index>(lines.size()) - 1;
  if (rows < 1) throw IoError(source + ": no price rows");

  Vector times(rows);
  Matrix values(d, rows);
  long long first_day = 0;
  for (Index r = 0; r < rows; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const std::vector<std::string_view> cells = split(lines[static_cast<std::size_t>(r) + 1], ',');
    if (cells.size() != header.size())
      throw IoError(source + ": row " + std::to_string(line_no) + " has " +
                    std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header.size()));
    const std::string_view stamp = trim(cells[0]);
    if (stamp.empty()) throw IoError(source + ": missing " + first + " in " + cell_name(line_no, first));
    double t = 0.0;
    if (dated) {
      long long day = 0;
      if (!parse_iso_date(stamp, day))
        throw IoError(source + ": unparsable date '" + std::string(stamp) + "' in " +
                      cell_name(line_no, first));
      if (r == 0) first_day = day;
      t = static_cast<double>(day - first_day);
    } else if (!parse_double(stamp, t)) {
      throw IoError(source + ": unparsable time '" + std::string(stamp) + "' in " +
                    cell_name(line_no, first));
    }
    if (r > 0 && t == times[r - 1])
      throw IoError(source + ": duplicate " + first + " '" + std::string(stamp) + "' at row " +
                    std::to_string(line_no));
    if (r > 0 && t < times[r - 1])
      throw IoError(source + ": " + first + " not increasing at row " + std::to_string(line_no));
    times[r] = t;
    for (Index c = 0; c < d; ++c) {
      const std::string_view cell = trim(cells[static_cast<std::size_t>(c) + 1]);
      const std::string& col = names[static_cast<std::size_t>(c)];
      if (cell.empty()) throw IoError(source + ": missing price in " + cell_name(line_no, col));
      double v = 0.0;
      if (!parse_double(cell, v))
        throw IoError(source + ": unparsable price '" + std::string(cell) + "' in " +
                      cell_name(line_no, col));
      if (!(v > 0.0))
        throw DomainError(source + ": nonpositive price " + std::string(cell) + " in " +
                          cell_name(line_no, col) + "; rejected row: " +
                          std::string(lines[static_cast<std::size_t>(r) + 1]));
      values(c, r) = v;
    }
  }
  return SampledPath(TimeGrid(std::move(times), dated ? "days" : ""), std::move(values),
                     std::move(names));
}

SampledPath ingest_csv(const std::string& path) { return parse_price_csv(read_file(path), path); }

std::string price_csv(const SampledPath& prices) {
  std::string out = "t";
  for (Index i = 0; i < prices.dim(); ++i) {
    out += ',';
    out += prices.names().empty() ? "S" + std::to_string(i + 1)
                                  : prices.names()[static_cast<std::size_t>(i)];
  }
  out += '\n';
  for (Index k = 0; k < prices.grid().size(); ++k) {
    out += format_double(prices.grid()[k]);
    for (Index i = 0; i < prices.dim(); ++i) {
      out += ',';
      out += format_double(prices(i, k));
    }
    out += '\n';
  }
  return out;
}

void write_price_csv(const SampledPath& prices, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << price_csv(prices);
  if (!out) throw IoError("failed writing '" + path + "'");
}

KeyValues KeyValues::parse(std::string_view text, const std::string& source) {
  KeyValues kv;
  kv.source_ = source;
  const std::vector<std::string_view> lines = lines_of(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(n + 1) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(n + 1) + ": empty key");
    if (kv.values_.count(key))
      throw ConfigError(source + ":" + std::to_string(n + 1) + ": duplicate key '" + key + "'");
    kv.values_[key] = value;
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) { return parse(read_file(path), path); }

const std::string& KeyValues::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
  return it->second;
}

double KeyValues::number(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(get(key), v))
    throw ConfigError(source_ + ": key '" + key + "' expects a single number, got '" + get(key) + "'");
  return v;
}

double KeyValues::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

Index KeyValues::integer(const std::string& key) const {
  const std::string_view s = trim(get(key));
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
    throw ConfigError(source_ + ": key '" + key + "' expects an integer, got '" + get(key) + "'");
  return static_cast<Index>(v);
}

Index KeyValues::integer_or(const std::string& key, Index fallback) const {
  return has(key) ? integer(key) : fallback;
}

namespace {

Vector parse_numbers(std::string_view s, const std::string& where) {
  std::vector<double> xs;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    double v = 0.0;
    if (!parse_double(token, v)) throw ConfigError(where + ": bad number '" + token + "'");
    xs.push_back(v);
    token.clear();
  };
  for (const char c : s) {
    if (c == ',' || c == ' ' || c == '\t') flush();
    else token += c;
  }
  flush();
  Vector out(static_cast<Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) out[static_cast<Index>(i)] = xs[i];
  return out;
}

}  // namespace

Vector KeyValues::vector(const std::string& key) const {
  return parse_numbers(get(key), source_ + ": key '" + key + "'");
}

Matrix KeyValues::matrix(const std::string& key) const {
  const std::vector<std::string_view> rows = split(get(key), ';');
  std::vector<Vector> parsed;
  for (const auto& r : rows) {
    if (trim(r).empty()) continue;
    parsed.push_back(parse_numbers(r, source_ + ": key '" + key + "'"));
  }
  if (parsed.empty()) throw ConfigError(source_ + ": key '" + key + "' is an empty matrix");
  const Index cols = parsed[0].size();
  Matrix out(static_cast<Index>(parsed.size()), cols);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != cols)
      throw ConfigError(source_ + ": key '" + key + "' has rows of different lengths");
    out.row(static_cast<Index>(i)) = parsed[i].transpose();
  }
  return out;
}

}  // namespace spt
