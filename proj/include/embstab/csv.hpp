#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace embstab::csv {

// Minimal RFC-4180 CSV support. Records are written with CRLF line endings
// and fields are quoted only when they contain a comma, quote, CR or LF.
// The reader is strict: unbalanced quotes or garbage after a closing quote
// raise ParseError.

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Reads every record from the stream. Accepts both CRLF and LF endings;
// a trailing newline does not produce an empty record.
std::vector<std::vector<std::string>> read_all(std::istream& in);

std::vector<std::vector<std::string>> read_file(const std::string& path);

// Fixed-format double used by every emitted file: shortest round-trip form
// ("%.17g" trimmed via a "%.15g"/"%.16g" probe). Locale-independent.
std::string format_double(double value);

}  // namespace embstab::csv
