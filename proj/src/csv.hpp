#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace soundscape::detail {

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF endings.
// Returns false at end of input. Throws FormatError on an unterminated quote.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields);

// Quotes a field only when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

}  // namespace soundscape::detail
