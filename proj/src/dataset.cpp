#include "effort/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "effort/error.hpp"

namespace effort {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    return std::string(s.substr(1, s.size() - 2));
  }
  return std::string(s);
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  double value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct ColumnDecl {
  std::string name;
  bool nominal = false;
  std::vector<std::string> levels;
};

struct RawRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

Dataset build_dataset(const std::vector<ColumnDecl>& decls, const std::vector<RawRow>& rows,
                      const LoadOptions& options, const char* format) {
  if (decls.empty()) {
    throw DataError(fmt::format("{}: no columns declared", format));
  }
  auto index_of = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < decls.size(); ++j) {
      if (decls[j].name == name) {
        return j;
      }
    }
    return std::nullopt;
  };

  std::size_t target_index = decls.size() - 1;
  if (options.target) {
    const auto t = index_of(*options.target);
    if (!t) {
      throw DataError(fmt::format("{}: target column '{}' not found", format, *options.target));
    }
    target_index = *t;
  }

  std::vector<std::size_t> feature_indices;
  if (options.columns) {
    for (const auto& name : *options.columns) {
      const auto j = index_of(name);
      if (!j) {
        throw DataError(fmt::format("{}: unknown column '{}'", format, name));
      }
      if (*j != target_index) {
        feature_indices.push_back(*j);
      }
    }
  } else {
    for (std::size_t j = 0; j < decls.size(); ++j) {
      if (j != target_index) {
        feature_indices.push_back(j);
      }
    }
  }
  std::vector<std::size_t> kept = feature_indices;
  kept.push_back(target_index);

  auto drops_row = [&](std::size_t j) {
    const auto& d = options.drop_rows_missing;
    return std::find(d.begin(), d.end(), decls[j].name) != d.end();
  };

  std::vector<std::vector<double>> values(kept.size());
  std::size_t dropped = 0;
  for (const auto& row : rows) {
    if (row.fields.size() != decls.size()) {
      throw DataError(fmt::format("{}: line {}: row has {} fields, {} declared", format, row.line,
                                  row.fields.size(), decls.size()));
    }
    std::vector<double> parsed(kept.size());
    bool drop = false;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto j = kept[k];
      const auto token = trim(row.fields[j]);
      if (token == "?" || token.empty()) {
        if (drops_row(j)) {
          drop = true;
          break;
        }
        throw DataError(fmt::format("{}: line {}: missing value in column '{}'", format, row.line,
                                    decls[j].name));
      }
      if (decls[j].nominal) {
        const auto level = unquote(token);
        const auto& lv = decls[j].levels;
        const auto it = std::find(lv.begin(), lv.end(), level);
        if (it == lv.end()) {
          throw DataError(fmt::format("{}: line {}: '{}' is not a declared level of '{}'", format,
                                      row.line, level, decls[j].name));
        }
        parsed[k] = static_cast<double>(it - lv.begin());
      } else {
        const auto v = parse_number(token);
        if (!v) {
          throw DataError(fmt::format("{}: line {}: non-numeric value '{}' in column '{}'", format,
                                      row.line, token, decls[j].name));
        }
        parsed[k] = *v;
      }
    }
    if (drop) {
      ++dropped;
      continue;
    }
    for (std::size_t k = 0; k < kept.size(); ++k) {
      values[k].push_back(parsed[k]);
    }
  }

  Dataset d;
  d.id = options.id;
  d.dropped_rows = dropped;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& decl = decls[kept[k]];
    FeatureColumn col{decl.name, std::move(values[k]), decl.nominal, decl.levels};
    if (k + 1 == kept.size()) {
      d.target = std::move(col);
    } else {
      d.features.push_back(std::move(col));
    }
  }
  return d;
}

std::vector<std::string> split_simple(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  // Commas inside quotes are rare in ARFF data but legal.
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) {
        quote = 0;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == sep) {
      out.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  out.emplace_back(line.substr(start));
  return out;
}

} // namespace

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> names;
  names.reserve(features.size());
  for (const auto& f : features) {
    names.push_back(f.name);
  }
  return names;
}

const FeatureColumn* Dataset::find(std::string_view name) const {
  if (target.name == name) {
    return &target;
  }
  for (const auto& f : features) {
    if (f.name == name) {
      return &f;
    }
  }
  return nullptr;
}

Matrix Dataset::design() const {
  Matrix X(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    for (std::size_t i = 0; i < rows(); ++i) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[j].values[i];
    }
  }
  return X;
}

Vector Dataset::response() const {
  return Eigen::Map<const Vector>(target.values.data(), static_cast<Eigen::Index>(rows()));
}

void Dataset::validate() const {
  if (features.empty()) {
    throw DataError("dataset '" + id + "': no feature columns");
  }
  if (rows() < 3) {
    throw DataError("dataset '" + id + "': needs at least 3 rows, has " + std::to_string(rows()));
  }
  for (const auto& f : features) {
    if (f.values.size() != rows()) {
      throw DataError("dataset '" + id + "': column '" + f.name + "' length differs from target");
    }
    for (double v : f.values) {
      if (!std::isfinite(v)) {
        throw DataError("dataset '" + id + "': non-finite value in '" + f.name + "'");
      }
    }
  }
  for (double v : target.values) {
    if (!std::isfinite(v)) {
      throw DataError("dataset '" + id + "': non-finite target value");
    }
  }
}

Dataset parse_arff(std::string_view text, const LoadOptions& options) {
  std::vector<ColumnDecl> decls;
  std::vector<RawRow> rows;
  bool have_relation = false;
  bool in_data = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '%') {
      continue;
    }
    if (in_data) {
      rows.push_back(RawRow{line_no, split_simple(line, ',')});
      continue;
    }
    if (starts_with_ci(line, "@relation")) {
      have_relation = true;
    } else if (starts_with_ci(line, "@attribute")) {
      if (!have_relation) {
        throw DataError(fmt::format("arff: line {}: @attribute before @relation", line_no));
      }
      auto rest = trim(line.substr(10));
      ColumnDecl decl;
      std::size_t name_end = 0;
      if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
        const auto close = rest.find(rest.front(), 1);
        if (close == std::string_view::npos) {
          throw DataError(fmt::format("arff: line {}: unterminated attribute name", line_no));
        }
        decl.name = std::string(rest.substr(1, close - 1));
        name_end = close + 1;
      } else {
        name_end = rest.find_first_of(" \t");
        if (name_end == std::string_view::npos) {
          throw DataError(fmt::format("arff: line {}: attribute without type", line_no));
        }
        decl.name = std::string(rest.substr(0, name_end));
      }
      const auto type = trim(rest.substr(name_end));
      if (!type.empty() && type.front() == '{') {
        if (type.back() != '}') {
          throw DataError(fmt::format("arff: line {}: unterminated nominal set", line_no));
        }
        decl.nominal = true;
        for (const auto& level : split_simple(type.substr(1, type.size() - 2), ',')) {
          decl.levels.push_back(unquote(level));
        }
      } else {
        const auto t = lower(type);
        if (t != "numeric" && t != "real" && t != "integer") {
          throw DataError(
              fmt::format("arff: line {}: unsupported attribute type '{}'", line_no, type));
        }
      }
      decls.push_back(std::move(decl));
    } else if (starts_with_ci(line, "@data")) {
      if (decls.empty()) {
        throw DataError(fmt::format("arff: line {}: @data before any @attribute", line_no));
      }
      in_data = true;
    } else {
      throw DataError(fmt::format("arff: line {}: malformed header line '{}'", line_no, line));
    }
  }
  if (!have_relation || !in_data) {
    throw DataError("arff: malformed header (needs @relation, @attribute and @data)");
  }
  return build_dataset(decls, rows, options, "arff");
}

namespace {

// RFC 4180 records; returns records with the line each started on.
std::vector<RawRow> csv_records(std::string_view text) {
  std::vector<RawRow> records;
  RawRow current;
  std::string field;
  bool quoted = false;
  bool record_started = false;
  std::size_t line = 1;

  auto end_record = [&] {
    current.fields.push_back(field);
    field.clear();
    const bool blank = current.fields.size() == 1 && trim(current.fields[0]).empty();
    if (!blank) {
      records.push_back(std::move(current));
    }
    current = RawRow{};
    record_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!record_started) {
      current.line = line;
      record_started = true;
    }
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') {
          ++line;
        }
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      current.fields.push_back(field);
      field.clear();
    } else if (c == '\n') {
      end_record();
      ++line;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw DataError("csv: unterminated quoted field");
  }
  if (record_started) {
    end_record();
  }
  return records;
}

} // namespace

Dataset parse_csv(std::string_view text, const std::string& target_name,
                  const LoadOptions& options) {
  auto records = csv_records(text);
  if (records.empty()) {
    throw DataError("csv: missing header row");
  }
  std::vector<ColumnDecl> decls;
  for (const auto& name : records.front().fields) {
    decls.push_back(ColumnDecl{std::string(trim(name)), false, {}});
  }
  if (std::none_of(decls.begin(), decls.end(),
                   [&](const ColumnDecl& d) { return d.name == target_name; })) {
    throw DataError("csv: header has no target column '" + target_name + "'");
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != decls.size()) {
      throw DataError(fmt::format("csv: line {}: ragged row with {} fields, header has {}",
                                  records[r].line, records[r].fields.size(), decls.size()));
    }
  }
  LoadOptions opts = options;
  opts.target = target_name;
  return build_dataset(decls, {records.begin() + 1, records.end()}, opts, "csv");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load_arff(const std::filesystem::path& path, const LoadOptions& options) {
  const auto bytes = read_file(path);
  auto d = parse_arff(bytes, options);
  d.source_checksum = sha256_hex(bytes);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_name,
                 const LoadOptions& options) {
  const auto bytes = read_file(path);
  auto d = parse_csv(bytes, target_name, options);
  d.source_checksum = sha256_hex(bytes);
  return d;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out += "\"";
  return out;
}

} // namespace

std::string to_csv(const Dataset& d) {
  std::string out;
  for (const auto& f : d.features) {
    out += csv_field(f.name);
    out += ',';
  }
  out += csv_field(d.target.name);
  out += '\n';
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (const auto& f : d.features) {
      out += fmt::format("{},", f.values[i]);
    }
    out += fmt::format("{}\n", d.target.values[i]);
  }
  return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write '" + path.string() + "'");
  }
  out << to_csv(d);
}

Dataset select_schema(const Dataset& d, const std::vector<std::string>& schema) {
  Dataset out;
  out.id = d.id;
  out.target = d.target;
  out.source_checksum = d.source_checksum;
  out.dropped_rows = d.dropped_rows;
  for (const auto& name : schema) {
    if (name == d.target.name) {
      continue;
    }
    const auto it = std::find_if(d.features.begin(), d.features.end(),
                                 [&](const FeatureColumn& f) { return f.name == name; });
    if (it == d.features.end()) {
      throw DataError("select_schema: unknown column '" + name + "' in dataset '" + d.id + "'");
    }
    out.features.push_back(*it);
  }
  return out;
}

// --- profiles ----------------------------------------------------------------

const ColumnProfile* ProfileStats::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) {
      return &c;
    }
  }
  return nullptr;
}

ColumnProfile profile_column(const std::string& name, const std::vector<double>& values) {
  ColumnProfile p{name};
  if (values.empty()) {
    return p;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  p.min = *lo;
  p.max = *hi;
  double sum = 0;
  for (double v : values) {
    sum += v;
  }
  p.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) {
      ss += (v - p.mean) * (v - p.mean);
    }
    p.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  // Rounding in the mean can push it a ulp outside [min, max] on constant columns.
  p.mean = std::clamp(p.mean, p.min, p.max);
  if (p.min == p.max) {
    p.std_dev = 0;
  }
  return p;
}

ProfileStats compute_profile(const Dataset& d) {
  ProfileStats stats;
  for (const auto& f : d.features) {
    stats.columns.push_back(profile_column(f.name, f.values));
  }
  stats.columns.push_back(profile_column(d.target.name, d.target.values));
  return stats;
}

PrintedValue PrintedValue::parse(std::string_view text) {
  text = trim(text);
  const auto v = parse_number(text);
  if (!v) {
    throw DataError("not a printed number: '" + std::string(text) + "'");
  }
  int decimals = 0;
  const auto dot = text.find('.');
  if (dot != std::string_view::npos) {
    auto frac = text.substr(dot + 1);
    const auto e = frac.find_first_of("eE");
    decimals = static_cast<int>(e == std::string_view::npos ? frac.size() : e);
  }
  return PrintedValue{*v, decimals};
}

double PrintedValue::last_unit() const { return std::pow(10.0, -decimals); }

bool cell_matches(double computed, const PrintedValue& expected, double tolerance) {
  const double allowed = std::max(tolerance * std::abs(expected.value), expected.last_unit());
  // Small slack so that an exact one-unit difference is not lost to binary rounding.
  return std::abs(computed - expected.value) <= allowed * (1 + 1e-9);
}

std::size_t ValidationReport::failures() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const CellCheck& c) { return !c.pass && !c.waiver; }));
}

std::size_t ValidationReport::waived() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const CellCheck& c) { return !c.pass && c.waiver; }));
}

ValidationReport validate_profile(const ProfileStats& stats, const ExpectedProfile& expected,
                                  double tolerance, const std::vector<Waiver>& waivers) {
  if (stats.columns.size() != expected.columns.size()) {
    throw DataError(fmt::format("validate_profile: {} computed columns vs {} expected",
                                stats.columns.size(), expected.columns.size()));
  }
  ValidationReport report;
  for (const auto& exp : expected.columns) {
    const auto* got = stats.find(exp.name);
    if (!got) {
      throw DataError("validate_profile: column '" + exp.name + "' missing from computed profile");
    }
    const std::pair<const char*, std::pair<double, PrintedValue>> cells[] = {
        {"min", {got->min, exp.min}},
        {"max", {got->max, exp.max}},
        {"mean", {got->mean, exp.mean}},
        {"std", {got->std_dev, exp.std_dev}},
    };
    for (const auto& [stat, pair] : cells) {
      CellCheck c{exp.name, stat, pair.first, pair.second,
                  cell_matches(pair.first, pair.second, tolerance), std::nullopt};
      if (!c.pass) {
        for (const auto& w : waivers) {
          if (w.column == c.column && w.stat == c.stat) {
            c.waiver = w.reason;
          }
        }
      }
      report.cells.push_back(std::move(c));
    }
  }
  return report;
}

} // namespace effort
