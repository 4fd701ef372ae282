// Matrix / vector files and JSON reports.
#pragma once

#include "sparsecert/cmsv.hpp"
#include "sparsecert/core.hpp"
#include "sparsecert/recovery.hpp"
#include "sparsecert/verify.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace sparsecert {

// Malformed or unreadable input files.
class ParseError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Text format: first non-comment line "m n", then m lines of n
// whitespace-separated decimals. Lines starting with '#' and blank lines are
// ignored. Paths ending in ".csv" are read as RFC-4180 CSV instead: one
// record per row, optionally quoted fields, and a leading header record is
// skipped when none of its fields is a number.
Matrix read_matrix(const std::string& path);
Matrix parse_matrix_text(std::istream& in, const std::string& origin = "<stream>");
Matrix parse_matrix_csv(std::istream& in, const std::string& origin = "<stream>");

// Writes with 17 significant digits, so read_matrix(write_matrix(a)) == a bit
// for bit. ".csv" paths get CSV without a header.
void write_matrix(const std::string& path, const Matrix& a);
void write_matrix_text(std::ostream& out, const Matrix& a);
void write_matrix_csv(std::ostream& out, const Matrix& a);

// One value per line; '#' comments and blank lines ignored.
Vector read_vector(const std::string& path);
Vector parse_vector(std::istream& in, const std::string& origin = "<stream>");
void write_vector(const std::string& path, const Vector& v);

// "%.17g", with inf / -inf / nan spelled out.
std::string format_double(double v);

using Json = nlohmann::ordered_json;

// Serializes like Json::dump, except that floating-point numbers use 17
// significant digits and non-finite values become the strings "inf", "-inf"
// and "nan".
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const Vector& v);
Json to_json(const VerificationResult& r);
Json to_json(const CmsvEstimate& e);
Json to_json(const RecoveryResult& r);
Json to_json(const BoundReport& b);
Json to_json(const RicEstimate& r);

}  // namespace sparsecert
