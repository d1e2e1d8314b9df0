#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <vector>

#include "resokit/dataio.hpp"
#include "resokit/errors.hpp"

namespace resokit::dataio {

namespace {

enum class Format { kRI, kMA, kDB };

struct Options {
  double freq_scale = 1e9;
  Format format = Format::kMA;
  double z0 = 50.0;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

Options parse_option_line(std::string_view body, std::size_t line) {
  Options opt;
  const auto tokens = split_ws(body);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string t = upper(tokens[i]);
    if (t == "HZ") {
      opt.freq_scale = 1.0;
    } else if (t == "KHZ") {
      opt.freq_scale = 1e3;
    } else if (t == "MHZ") {
      opt.freq_scale = 1e6;
    } else if (t == "GHZ") {
      opt.freq_scale = 1e9;
    } else if (t == "RI") {
      opt.format = Format::kRI;
    } else if (t == "MA") {
      opt.format = Format::kMA;
    } else if (t == "DB") {
      opt.format = Format::kDB;
    } else if (t == "S") {
      // only scattering parameters are supported
    } else if (t == "Y" || t == "Z" || t == "H" || t == "G") {
      throw ParseError(line, "option line: parameter type '" + std::string(tokens[i]) + "' not supported, need S");
    } else if (t == "R") {
      if (i + 1 >= tokens.size()) throw ParseError(line, "option line: R without a reference impedance");
      opt.z0 = parse_number(tokens[++i], line);
      if (!(opt.z0 > 0.0)) throw ParseError(line, "option line: reference impedance must be > 0");
    } else {
      throw ParseError(line, "option line: unexpected token '" + std::string(tokens[i]) + "'");
    }
  }
  return opt;
}

std::complex<double> to_complex(double x, double y, Format format) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  switch (format) {
    case Format::kRI:
      return {x, y};
    case Format::kMA:
      return std::polar(1.0, y * kDeg) * x;
    case Format::kDB:
      return std::polar(std::pow(10.0, x / 20.0), y * kDeg);
  }
  return {};
}

}  // namespace

resonator::S21Trace parse_touchstone(std::string_view text) {
  Options opt;
  bool have_options = false;
  std::vector<double> freqs;
  std::vector<std::complex<double>> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto bang = line.find('!'); bang != std::string_view::npos) line = line.substr(0, bang);
    const auto first = line.find_first_not_of(" \t\r\v\f");
    if (first == std::string_view::npos) continue;
    line.remove_prefix(first);

    if (line.front() == '#') {
      // Only the first option line counts (Touchstone v1).
      if (!have_options) opt = parse_option_line(line.substr(1), line_no);
      have_options = true;
      continue;
    }
    if (line.front() == '[') throw ParseError(line_no, "Touchstone v2 keywords are not supported");

    const auto tokens = split_ws(line);
    if (tokens.size() != 9) {
      throw ParseError(line_no, "expected 9 columns (frequency and 4 S-parameter pairs), got " +
                                    std::to_string(tokens.size()));
    }
    double row[9];
    for (std::size_t k = 0; k < 9; ++k) row[k] = parse_number(tokens[k], line_no);
    const double f = row[0] * opt.freq_scale;
    const std::complex<double> s21 = to_complex(row[3], row[4], opt.format);
    if (!std::isfinite(f) || !std::isfinite(s21.real()) || !std::isfinite(s21.imag())) {
      throw ParseError(line_no, "value overflows after unit conversion");
    }
    if (!freqs.empty() && !(f > freqs.back())) throw ParseError(line_no, "frequencies must be strictly increasing");
    freqs.push_back(f);
    values.push_back(s21);
  }
  if (freqs.empty()) throw ParseError(std::max<std::size_t>(line_no, 1), "no data rows");
  resonator::TraceMeta meta;
  meta.z0_ohm = opt.z0;
  return resonator::S21Trace(std::move(freqs), std::move(values), std::move(meta));
}

std::string write_touchstone(const resonator::S21Trace& trace) {
  std::string out = "! S21 written by resokit\n# Hz S RI R " + format_number(trace.meta().z0_ohm) + "\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& v = trace.values()[i];
    out += format_number(trace.freqs()[i]) + " 0 0 " + format_number(v.real()) + " " + format_number(v.imag()) +
           " 0 0 0 0\n";
  }
  return out;
}

}  // namespace resokit::dataio
