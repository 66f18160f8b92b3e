#include "spincat/records_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_convert.hpp"

namespace spincat {

using nlohmann::ordered_json;

SchemaError::SchemaError(const std::string& message, int line, int column)
    : std::runtime_error([&] {
        std::string where;
        if (line > 0) where += "line " + std::to_string(line);
        if (column > 0) where += (where.empty() ? "" : ", ") + std::string("column ") + std::to_string(column);
        return where.empty() ? message : where + ": " + message;
      }()),
      line_(line),
      column_(column) {}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (s == "inf") {
    out = INFINITY;
    return true;
  }
  if (s == "-inf") {
    out = -INFINITY;
    return true;
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

const std::vector<double>& CsvTable::column(const std::string& name) const {
  const auto it = columns.find(name);
  if (it == columns.end()) throw SchemaError("missing column '" + name + "'", 1);
  return it->second;
}

CsvTable parse_csv(std::string_view text, std::span<const std::string> required) {
  CsvTable table;
  int line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        const std::string name(fields[c]);
        if (name.empty()) throw SchemaError("empty column name", line_no, static_cast<int>(c + 1));
        if (table.columns.count(name)) throw SchemaError("duplicate column '" + name + "'", line_no, static_cast<int>(c + 1));
        table.header.push_back(name);
        table.columns[name];
      }
      for (const auto& r : required) {
        if (!table.columns.count(r)) throw SchemaError("missing column '" + r + "'", line_no);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw SchemaError("expected " + std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()),
                        line_no, static_cast<int>(std::min(fields.size(), table.header.size()) + 1));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_number(fields[c], v)) {
        throw SchemaError("column '" + table.header[c] + "': not a number '" + std::string(fields[c]) + "'",
                          line_no, static_cast<int>(c + 1));
      }
      table.columns[table.header[c]].push_back(v);
    }
    ++table.rows;
  }
  if (!have_header) throw SchemaError("empty file: no header row", 1);
  return table;
}

std::string fringe_records_csv(std::span<const FringeRecord> records) {
  const bool counts = !records.empty() && records.front().counts.has_value();
  for (const auto& r : records) {
    if (r.counts.has_value() != counts) throw std::invalid_argument("fringe_records_csv: mixed count columns");
  }
  std::ostringstream os;
  os << "tau_s,p_plus,p_minus,p_in" << (counts ? ",n,n_plus,n_minus" : "") << '\n';
  for (const auto& r : records) {
    os << format_double(r.tau) << ',' << format_double(r.p_plus) << ',' << format_double(r.p_minus) << ','
       << format_double(r.p_in);
    if (counts) os << ',' << r.counts->n << ',' << r.counts->n_plus << ',' << r.counts->n_minus;
    os << '\n';
  }
  return os.str();
}

std::string fringe_records_json(std::span<const FringeRecord> records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) arr.push_back(detail::to_json(r));
  return arr.dump(2) + "\n";
}

std::vector<FringeRecord> parse_fringe_csv(std::string_view text) {
  static const std::vector<std::string> kRequired{"tau_s", "p_plus", "p_minus", "p_in"};
  const CsvTable t = parse_csv(text, kRequired);
  const bool counts = t.has("n") || t.has("n_plus") || t.has("n_minus");
  if (counts) {
    for (const char* c : {"n", "n_plus", "n_minus"}) {
      if (!t.has(c)) throw SchemaError(std::string("missing column '") + c + "'", 1);
    }
  }
  std::vector<FringeRecord> out(t.rows);
  for (std::size_t i = 0; i < t.rows; ++i) {
    out[i].tau = t.column("tau_s")[i];
    out[i].p_plus = t.column("p_plus")[i];
    out[i].p_minus = t.column("p_minus")[i];
    out[i].p_in = t.column("p_in")[i];
    if (counts) {
      out[i].counts = AtomCounts{static_cast<std::int64_t>(t.column("n")[i]),
                                 static_cast<std::int64_t>(t.column("n_plus")[i]),
                                 static_cast<std::int64_t>(t.column("n_minus")[i])};
    }
  }
  return out;
}

std::vector<FringeRecord> parse_fringe_json(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw SchemaError("expected a JSON array of records");
  std::vector<FringeRecord> out;
  int index = 0;
  for (const auto& item : doc) {
    ++index;
    auto get = [&](const char* key) {
      if (!item.contains(key) || !item[key].is_number()) {
        throw SchemaError("record " + std::to_string(index) + ": missing numeric field '" + key + "'");
      }
      return item[key].get<double>();
    };
    FringeRecord r;
    r.tau = get("tau_s");
    r.p_plus = get("p_plus");
    r.p_minus = get("p_minus");
    r.p_in = get("p_in");
    if (item.contains("n")) {
      r.counts = AtomCounts{static_cast<std::int64_t>(get("n")), static_cast<std::int64_t>(get("n_plus")),
                            static_cast<std::int64_t>(get("n_minus"))};
    }
    out.push_back(r);
  }
  return out;
}

std::string rabi_csv(std::span<const double> areas, std::span<const double> p_plus) {
  std::ostringstream os;
  os << "area_rad,p_plus\n";
  for (std::size_t i = 0; i < areas.size(); ++i) os << format_double(areas[i]) << ',' << format_double(p_plus[i]) << '\n';
  return os.str();
}

std::string rabi_json(std::span<const double> areas, std::span<const double> p_plus) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < areas.size(); ++i) arr.push_back({{"area_rad", areas[i]}, {"p_plus", p_plus[i]}});
  return arr.dump(2) + "\n";
}

std::string wigner_csv(const WignerMap& map) {
  std::ostringstream os;
  os << "theta,phi,w\n";
  for (std::size_t i = 0; i < map.theta.size(); ++i) {
    for (std::size_t j = 0; j < map.phi.size(); ++j) {
      os << format_double(map.theta[i]) << ',' << format_double(map.phi[j]) << ','
         << format_double(map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
    }
  }
  return os.str();
}

std::string wigner_json(const WignerMap& map) { return detail::to_json(map).dump(2) + "\n"; }

std::string fit_result_json(const FitResult& fit, int indent) { return detail::to_json(fit).dump(indent) + "\n"; }

std::string sensitivity_json(std::span<const SensitivityReport> reports, int indent) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(detail::to_json(r));
  return arr.dump(indent) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace detail {

ordered_json to_json(const FringeRecord& r) {
  ordered_json j{{"tau_s", r.tau}, {"p_plus", r.p_plus}, {"p_minus", r.p_minus}, {"p_in", r.p_in}};
  if (r.counts) {
    j["n"] = r.counts->n;
    j["n_plus"] = r.counts->n_plus;
    j["n_minus"] = r.counts->n_minus;
  }
  return j;
}

ordered_json to_json(const FitResult& fit) {
  ordered_json params = ordered_json::object();
  for (const auto& p : fit.params) {
    // JSON has no infinity; an undetermined time constant is written as null.
    params[p.name] = {{"value", std::isfinite(p.value) ? ordered_json(p.value) : ordered_json(nullptr)},
                      {"sigma", std::isfinite(p.sigma) ? ordered_json(p.sigma) : ordered_json(nullptr)}};
  }
  ordered_json j{{"model", std::string(to_string(fit.model))},
                 {"params", params},
                 {"residual_norm", fit.residual_norm},
                 {"converged", fit.converged},
                 {"iterations", fit.iterations}};
  if (fit.degenerate) j["degenerate"] = true;
  if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
  return j;
}

ordered_json to_json(const SensitivityReport& r) {
  return {{"tau_s", r.tau},
          {"sigma_b_t", r.sigma_b},
          {"sql_t", r.limit_sql},
          {"hl_t", r.limit_hl},
          {"fisher_classical", r.fisher_classical},
          {"fisher_quantum", r.fisher_quantum}};
}

ordered_json to_json(const WignerMap& map) {
  ordered_json values = ordered_json::array();
  for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < map.values.cols(); ++j) row.push_back(map.values(i, j));
    values.push_back(std::move(row));
  }
  return {{"convention", map.convention},
          {"theta", map.theta},
          {"phi", map.phi},
          {"theta_weights", map.theta_weights},
          {"w", values},
          {"integral", map.integral()},
          {"min", map.min_value()},
          {"max", map.max_value()}};
}

}  // namespace detail

}  // namespace spincat
