#include "sparsecert/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

namespace sparsecert {

namespace {

bool ends_with_csv(const std::string& path) {
  if (path.size() < 4) return false;
  std::string ext = path.substr(path.size() - 4);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
}

double number_or_fail(std::string_view tok, const std::string& origin, std::size_t line) {
  const auto v = parse_number(tok);
  if (!v) fail(origin, line, "not a number: '" + std::string(tok) + "'");
  if (!std::isfinite(*v)) fail(origin, line, "non-finite value '" + std::string(tok) + "'");
  return *v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t j = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

// Splits CSV text into records. Quoted fields may contain commas, doubled
// quotes and line breaks. Each record carries the line it started on.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<CsvRecord> read_csv_records(std::istream& in, const std::string& origin) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<CsvRecord> records;
  CsvRecord rec;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t line = 1;
  rec.line = 1;
  auto end_field = [&] {
    rec.fields.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = rec.fields.size() == 1 && trim(rec.fields[0]).empty();
    if (!blank) records.push_back(rec);
    rec = CsvRecord{};
    rec.line = line;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started && !trim(field).empty()) fail(origin, line, "stray quote inside a field");
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // CRLF line ends.
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) fail(origin, line, "unterminated quoted field");
  if (field_started || !field.empty() || !rec.fields.empty()) end_record();
  return records;
}

}  // namespace

Matrix parse_matrix_text(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  Index m = -1, n = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const auto tok = split_ws(line);
    long long mm = 0, nn = 0;
    auto int_of = [&](std::string_view t, long long& v) {
      const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      return ec == std::errc{} && end == t.data() + t.size();
    };
    if (tok.size() != 2 || !int_of(tok[0], mm) || !int_of(tok[1], nn)) {
      fail(origin, lineno, "expected a header 'm n'");
    }
    if (mm < 1 || nn < 1) fail(origin, lineno, "matrix dimensions must be positive");
    m = static_cast<Index>(mm);
    n = static_cast<Index>(nn);
    break;
  }
  if (m < 0) throw ParseError(origin + ": empty matrix file");
  Matrix a(m, n);
  Index row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    if (row == m) fail(origin, lineno, "more than " + std::to_string(m) + " rows");
    const auto tok = split_ws(line);
    if (static_cast<Index>(tok.size()) != n) {
      fail(origin, lineno, "expected " + std::to_string(n) + " values, found " + std::to_string(tok.size()));
    }
    for (Index j = 0; j < n; ++j) a(row, j) = number_or_fail(tok[static_cast<std::size_t>(j)], origin, lineno);
    ++row;
  }
  if (row != m) {
    throw ParseError(origin + ": expected " + std::to_string(m) + " rows, found " + std::to_string(row));
  }
  return a;
}

Matrix parse_matrix_csv(std::istream& in, const std::string& origin) {
  auto records = read_csv_records(in, origin);
  if (!records.empty()) {
    bool any_number = false;
    for (const auto& f : records.front().fields) any_number = any_number || parse_number(f).has_value();
    if (!any_number) records.erase(records.begin());
  }
  if (records.empty()) throw ParseError(origin + ": no data rows");
  const auto n = records.front().fields.size();
  Matrix a(static_cast<Index>(records.size()), static_cast<Index>(n));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.fields.size() != n) {
      fail(origin, r.line, "expected " + std::to_string(n) + " fields, found " + std::to_string(r.fields.size()));
    }
    for (std::size_t j = 0; j < n; ++j) {
      a(static_cast<Index>(i), static_cast<Index>(j)) = number_or_fail(r.fields[j], origin, r.line);
    }
  }
  return a;
}

Matrix read_matrix(const std::string& path) {
  auto in = open_in(path);
  return ends_with_csv(path) ? parse_matrix_csv(in, path) : parse_matrix_text(in, path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_text(std::ostream& out, const Matrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out << (j ? " " : "") << format_double(a(i, j));
    out << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Matrix& a) {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << format_double(a(i, j));
    out << "\r\n";
  }
}

void write_matrix(const std::string& path, const Matrix& a) {
  auto out = open_out(path);
  if (ends_with_csv(path)) {
    write_matrix_csv(out, a);
  } else {
    write_matrix_text(out, a);
  }
  if (!out) throw ParseError("failed writing '" + path + "'");
}

Vector parse_vector(std::istream& in, const std::string& origin) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    values.push_back(number_or_fail(line, origin, lineno));
  }
  if (values.empty()) throw ParseError(origin + ": empty vector file");
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Vector read_vector(const std::string& path) {
  auto in = open_in(path);
  return parse_vector(in, path);
}

void write_vector(const std::string& path, const Vector& v) {
  auto out = open_out(path);
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  if (!out) throw ParseError("failed writing '" + path + "'");
}

namespace {

void dump_into(std::string& out, const Json& j, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(d * indent), ' ');
  };
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "\"" + format_double(v) + "\"";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_into(out, e, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(key).dump();
        out += pretty ? ": " : ":";
        dump_into(out, value, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_into(out, j, indent, 0);
  return out;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const VerificationResult& r) {
  Json j;
  j["method"] = std::string(to_string(r.method));
  j["k_lower"] = r.k_lower;
  j["tau"] = r.tau;
  j["per_index_values"] = to_json(r.per_index_values);
  j["kernel_dim"] = r.kernel_dim;
  j["iterations"] = r.iterations;
  j["runtime"] = r.runtime;
  return j;
}

Json to_json(const CmsvEstimate& e) {
  Json j;
  j["s"] = e.s;
  j["rho_upper"] = e.rho_upper;
  j["objective_upper"] = e.objective_upper;
  j["rho_lower"] = e.rho_lower;
  j["objective_lower"] = e.objective_lower;
  j["relaxation_value"] = e.relaxation_value;
  j["restarts"] = e.restarts;
  j["per_restart_values"] = to_json(e.per_restart_values);
  Json flags = Json::array();
  for (bool b : e.converged_flags) flags.push_back(b);
  j["converged_flags"] = flags;
  j["per_restart_kkt"] = to_json(e.per_restart_kkt);
  j["minimizer"] = to_json(e.minimizer);
  return j;
}

Json to_json(const RecoveryResult& r) {
  Json j;
  j["algorithm"] = std::string(to_string(r.algorithm));
  j["x_hat"] = to_json(r.x_hat);
  j["objective"] = r.objective;
  j["residual_l2"] = r.residual_l2;
  j["dual_infeasibility"] = r.dual_infeasibility;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  return j;
}

Json to_json(const BoundReport& b) {
  Json j;
  j["k"] = b.k;
  j["bound_bp"] = b.bound_bp;
  j["bound_ds"] = b.bound_ds;
  j["bound_lasso"] = b.bound_lasso;
  j["rho_source"] = std::string(to_string(b.rho_source));
  j["certified"] = b.certified;
  j["ric_bound_bp"] = b.ric_bound_bp ? Json(*b.ric_bound_bp) : Json(nullptr);
  j["ric_bound_ds"] = b.ric_bound_ds ? Json(*b.ric_bound_ds) : Json(nullptr);
  j["flags"] = b.flags;
  return j;
}

Json to_json(const RicEstimate& r) {
  Json j;
  j["k"] = r.k;
  j["delta_k"] = r.delta_k;
  j["worst_support"] = r.worst_support;
  return j;
}

}  // namespace sparsecert
