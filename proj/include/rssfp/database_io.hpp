#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rssfp/fingerprint.hpp"

namespace rssfp {

inline constexpr int kDatabaseFormatVersion = 1;

/// Serializes to the JSON database document. Keys are sorted and floats use
/// the shortest representation that round-trips, so equal databases produce
/// identical bytes.
std::string save_database(const FingerprintDatabase& db);

/// Parses a database document. Throws kParse with line/field diagnostics on
/// malformed input and kVersion on an unsupported format version.
FingerprintDatabase load_database(std::string_view text);

void save_database_file(const FingerprintDatabase& db, const std::string& path);
FingerprintDatabase load_database_file(const std::string& path);

/// Parses raw sample lines of the form `x y beacon_id rss`. Blank lines and
/// `#` comments are skipped. Readings are grouped by point in order of first
/// appearance.
std::vector<RawSampleBatch> parse_sample_lines(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace rssfp
