#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "resokit/dataio.hpp"
#include "resokit/errors.hpp"

namespace resokit::dataio {

double parse_number(std::string_view token, std::size_t line) {
  std::string_view body = token;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  if (body.empty() || body.front() == '+') {
    throw ParseError(line, "expected a number, got '" + std::string(token) + "'");
  }
  double value = 0.0;
  const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec == std::errc::result_out_of_range) {
    throw ParseError(line, "number out of range: '" + std::string(token) + "'");
  }
  if (ec != std::errc() || end != body.data() + body.size()) {
    throw ParseError(line, "expected a number, got '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(line, "non-finite number '" + std::string(token) + "'");
  return value;
}

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ec == std::errc() ? end : buf.data());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

resonator::S21Trace load_trace(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  resonator::S21Trace trace;
  if (ext == ".csv") {
    trace = parse_csv_trace(text);
  } else if (ext == ".s2p" || ext == ".ts") {
    trace = parse_touchstone(text);
  } else {
    const auto first = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
    const bool looks_csv = first != std::string::npos && text.compare(first, 7, "freq_hz") == 0;
    trace = looks_csv ? parse_csv_trace(text) : parse_touchstone(text);
  }
  resonator::TraceMeta meta = trace.meta();
  meta.label = path.filename().string();
  return trace.with_meta(meta);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace resokit::dataio
