#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "resokit/dataio.hpp"
#include "resokit/errors.hpp"

namespace resokit::dataio {

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

struct Row {
  double f;
  std::complex<double> v;
  std::size_t line;
};

}  // namespace

resonator::S21Trace parse_csv_trace(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  bool db = false;
  std::vector<Row> rows;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;

    const auto cells = split_cells(line);
    if (!have_header) {
      if (cells.size() == 3 && cells[0] == "freq_hz" && cells[1] == "re" && cells[2] == "im") {
        db = false;
      } else if (cells.size() == 3 && cells[0] == "freq_hz" && cells[1] == "mag_db" && cells[2] == "phase_deg") {
        db = true;
      } else {
        throw ParseError(line_no, "expected header 'freq_hz,re,im' or 'freq_hz,mag_db,phase_deg'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 3) {
      throw ParseError(line_no, "expected 3 cells, got " + std::to_string(cells.size()));
    }
    const double f = parse_number(cells[0], line_no);
    const double x = parse_number(cells[1], line_no);
    const double y = parse_number(cells[2], line_no);
    const std::complex<double> v = db ? std::polar(std::pow(10.0, x / 20.0), y * kDeg) : std::complex<double>(x, y);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ParseError(line_no, "value overflows after conversion");
    }
    rows.push_back({f, v, line_no});
  }
  if (!have_header) throw ParseError(std::max<std::size_t>(line_no, 1), "missing header");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.f < b.f; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].f == rows[i - 1].f) {
      const std::size_t line = std::max(rows[i].line, rows[i - 1].line);
      throw ParseError(line, "duplicate frequency " + format_number(rows[i].f) + " Hz");
    }
  }
  std::vector<double> freqs(rows.size());
  std::vector<std::complex<double>> values(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) freqs[i] = rows[i].f, values[i] = rows[i].v;
  return resonator::S21Trace(std::move(freqs), std::move(values));
}

std::string write_csv_trace(const resonator::S21Trace& trace, CsvFormat format) {
  std::string out = format == CsvFormat::kRealImag ? "freq_hz,re,im\n" : "freq_hz,mag_db,phase_deg\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& v = trace.values()[i];
    double x = v.real(), y = v.imag();
    if (format == CsvFormat::kMagDbPhaseDeg) {
      if (v == 0.0) throw PreconditionError("write_csv_trace: zero sample has no dB magnitude");
      x = 20.0 * std::log10(std::abs(v));
      y = std::arg(v) / kDeg;
    }
    out += format_number(trace.freqs()[i]) + "," + format_number(x) + "," + format_number(y) + "\n";
  }
  return out;
}

}  // namespace resokit::dataio
