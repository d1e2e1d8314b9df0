#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "resokit/resonator_model.hpp"

namespace resokit::dataio {

/// Parses one finite decimal number (an optional leading '+' is accepted).
/// Throws ParseError(line, ...) on anything else, including nan/inf and overflow.
double parse_number(std::string_view token, std::size_t line);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

/// Touchstone v1 two-port: "# <unit> S <RI|MA|DB> R <z0>" and rows of freq plus 8 numbers.
/// Returns the S21 column. Missing option line means "# GHz S MA R 50".
/// Throws ParseError with a 1-based line number.
resonator::S21Trace parse_touchstone(std::string_view text);

/// Writes S21 as a RI two-port file (other parameters zero), frequencies in Hz.
std::string write_touchstone(const resonator::S21Trace& trace);

enum class CsvFormat { kRealImag, kMagDbPhaseDeg };

/// Header "freq_hz,re,im" or "freq_hz,mag_db,phase_deg", one point per line.
/// Rows are sorted ascending; a repeated frequency is a ParseError naming its line.
resonator::S21Trace parse_csv_trace(std::string_view text);

std::string write_csv_trace(const resonator::S21Trace& trace, CsvFormat format = CsvFormat::kRealImag);

/// Reads a file into memory. Throws Error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Dispatches on extension: .s2p/.ts to Touchstone, .csv to CSV; otherwise sniffs the header.
resonator::S21Trace load_trace(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace resokit::dataio
