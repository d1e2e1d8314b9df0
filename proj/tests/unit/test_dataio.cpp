#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "resokit/dataio.hpp"
#include "resokit/errors.hpp"
#include "resokit/report.hpp"
#include "resokit/spectrum_fit.hpp"
#include "resokit/sweep.hpp"

using namespace resokit;
using namespace resokit::dataio;
using namespace std::complex_literals;

namespace {

std::size_t parse_error_line(auto&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

resonator::S21Trace small_trace() {
  resonator::NotchParams p;
  p.f_r = 5.9643e9;
  p.q_loaded = 2253.6;
  p.q_coupling_mag = 2308;
  p.amp = 0.8;
  p.delay = 30e-9;
  return resonator::synthesize_trace(p, 5.95e9, 5.98e9, 64, 1e-3, 5);
}

}  // namespace

TEST_CASE("number parsing and shortest formatting") {
  CHECK(parse_number("1.5e9", 1) == 1.5e9);
  CHECK(parse_number("+2", 1) == 2.0);
  CHECK(parse_number("-0.25", 1) == -0.25);
  for (const char* bad : {"", "+", "++1", "nan", "inf", "-inf", "1e999", "1.0x", " 1", "0x10"}) {
    CHECK(parse_error_line([&] { parse_number(bad, 7); }) == 7);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::pow(10.0, u(rng) / 10) * (i % 2 ? 1 : -1);
    CHECK(parse_number(format_number(v), 1) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(5e9) == "5e+09");
}

TEST_CASE("touchstone examples") {
  const auto ri = parse_touchstone("# Hz S RI R 50\n5.0e9 0 0 0.5 -0.5 0 0 0 0\n");
  REQUIRE(ri.size() == 1);
  CHECK(ri.freqs()[0] == 5e9);
  CHECK(ri.values()[0] == std::complex<double>(0.5, -0.5));

  const auto db = parse_touchstone("# GHz S DB R 50\n5.0 0 0 -6.0206 0 0 0 0 0\n");
  CHECK(std::abs(db.values()[0] - 0.5) < 1e-4);
  CHECK(db.freqs()[0] == 5e9);

  const auto ma = parse_touchstone("! c\n# MHz S MA R 50\n5000 0 0 0.5 90 0 0 0 0 ! tail comment\n");
  CHECK(std::abs(ma.values()[0] - 0.5i) < 1e-12);
  CHECK(ma.freqs()[0] == 5e9);

  // default options: GHz MA
  const auto def = parse_touchstone("1 0 0 1 0 0 0 0 0\n2 0 0 1 180 0 0 0 0\n");
  CHECK(def.freqs()[1] == 2e9);
  CHECK(std::abs(def.values()[1] + 1.0) < 1e-12);
  const auto khz = parse_touchstone("# khz s ri r 75\n1 0 0 1 0 0 0 0 0\n");
  CHECK(khz.freqs()[0] == 1e3);
  CHECK(khz.meta().z0_ohm == 75.0);
}

TEST_CASE("touchstone errors carry line numbers") {
  CHECK(parse_error_line([] { parse_touchstone("# Hz S RI R 50\n1 0 0 1 0 0 0 0 0\n2 0 0 1\n"); }) == 3);
  CHECK(parse_error_line([] { parse_touchstone("# Hz S RI R 50\n2 0 0 1 0 0 0 0 0\n1 0 0 1 0 0 0 0 0\n"); }) == 3);
  CHECK(parse_error_line([] { parse_touchstone("# Hz Y RI R 50\n1 0 0 1 0 0 0 0 0\n"); }) == 1);
  CHECK(parse_error_line([] { parse_touchstone("# Hz S XX R 50\n"); }) == 1);
  CHECK(parse_error_line([] { parse_touchstone("!\n# Hz S RI R 50\n1 0 0 abc 0 0 0 0 0\n"); }) == 3);
  CHECK(parse_error_line([] { parse_touchstone("[Version] 2.0\n"); }) == 1);
  CHECK(parse_error_line([] { parse_touchstone(""); }) >= 1);
  CHECK(parse_error_line([] { parse_touchstone("# Hz S DB R 50\n1 0 0 9999 0 0 0 0 0\n"); }) == 2);
}

TEST_CASE("touchstone write/read round trip") {
  const auto t = small_trace();
  const auto back = parse_touchstone(write_touchstone(t));
  CHECK(back.freqs() == t.freqs());
  CHECK(back.values() == t.values());
}

TEST_CASE("csv examples") {
  const auto two = parse_csv_trace("freq_hz,re,im\n2e9,0.1,0.2\n1e9,0.3,-0.4\n");
  REQUIRE(two.size() == 2);
  CHECK(two.freqs()[0] == 1e9);  // sorted
  CHECK(two.values()[0] == std::complex<double>(0.3, -0.4));

  const auto t = small_trace();
  const auto db = parse_csv_trace(write_csv_trace(t, CsvFormat::kMagDbPhaseDeg));
  CHECK(db.freqs() == t.freqs());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(db.values()[i] - t.values()[i]) < 1e-9);
  CHECK(parse_csv_trace(write_csv_trace(t)).values() == t.values());

  CHECK(parse_error_line([] { parse_csv_trace("freq_hz,re,im\n1e9,0,0\n2e9,1,1\n1e9,2,2\n"); }) == 4);
  CHECK(parse_error_line([] { parse_csv_trace("frequency,re,im\n1e9,0,0\n"); }) == 1);
  CHECK(parse_error_line([] { parse_csv_trace("freq_hz,re,im\n1e9,0\n"); }) == 2);
  CHECK(parse_error_line([] { parse_csv_trace("freq_hz,re,im\n1e9,0,x\n"); }) == 2);
  CHECK(parse_error_line([] { parse_csv_trace(""); }) == 1);
  // BOM and CRLF are tolerated
  CHECK(parse_csv_trace("\xEF\xBB\xBF" "freq_hz,re,im\r\n1e9,1,0\r\n").size() == 1);
}

TEST_CASE("file loading by extension") {
  const std::string dir = RESOKIT_TEST_DATA;
  CHECK(load_trace(dir + "/notch.csv").size() == 401);
  CHECK(load_trace(dir + "/notch.s2p").size() == 5);
  CHECK_THROWS_AS(load_trace(dir + "/missing.csv"), Error);
  CHECK(parse_error_line([&] { load_trace(dir + "/bad_row.s2p"); }) == 3);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("report canonical JSON") {
  const auto trace = small_trace();
  const auto fit = fit::fit_notch(trace);
  Report r;
  r.provenance.version = "test";
  r.provenance.inputs.push_back({"a.csv", sha256_hex("x")});
  auto meta = trace.meta();
  meta.label = "a.csv";  // the record label doubles as the trace label
  r.traces.push_back({"a.csv", meta, fit, 1e-16, 3.5});
  r.failures.push_back({"b.csv", "no_resonance", "flat"});
  r.qi_vs_nph.push_back({"a.csv", -30, 3.5, fit.params.f_r, fit.q_internal, fit.uncertainties.q_internal});
  r.models["tls"] = {{"beta", 0.35}};

  const std::string a = write_report(r), b = write_report(r);
  CHECK(a == b);
  CHECK(a.back() == '\n');
  CHECK(parse_report(a) == r);
  CHECK(write_report(parse_report(a)) == a);
  for (const char* key : {"\"schema_version\": \"1\"", "\"q_internal\"", "\"f_r\"", "\"q_loaded\"",
                          "\"q_coupling_mag\"", "\"phi\"", "\"amp\"", "\"phase_offset\"", "\"delay\""}) {
    CHECK(a.find(key) != std::string::npos);
  }
  // keys sorted at top level
  CHECK(a.find("\"curves\"") < a.find("\"models\""));
  CHECK(a.find("\"models\"") < a.find("\"provenance\""));

  CHECK(parse_error_line([] { parse_report("{\n\"schema_version\": \"1\",\n oops\n}"); }) == 3);
  CHECK(parse_error_line([] { parse_report("{\"schema_version\": \"2\"}"); }) == 1);
}

TEST_CASE("manifest") {
  const std::string text = R"({
  "entries": [
    {"path": "a.csv", "vna_power_dbm": -30, "temperature_k": 0.026, "field_mt": 0},
    {"path": "b.s2p", "vna_power_dbm": -20, "temperature_k": 0.026, "field_mt": 0, "sweep": "power"}
  ],
  "chain": [{"label": "rt", "attenuation_db": 40}, {"label": "4k", "attenuation_db": 20}],
  "material": {"t_c": 13, "alpha_kinetic": 0.1}
})";
  const auto m = parse_manifest(text, "/tmp");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[1].sweep == SweepKind::kPower);
  CHECK(m.chain.total_db() == 60);
  CHECK(m.material.t_c == 13);
  CHECK(m.film_thickness == 100e-9);
  const auto again = parse_manifest(write_manifest(m), "/tmp");
  CHECK(write_manifest(again) == write_manifest(m));

  const std::string dup = R"({"entries": [{"path": "a.csv", "vna_power_dbm": 0, "temperature_k": 0, "field_mt": 0},
  {"path": "a.csv", "vna_power_dbm": 1, "temperature_k": 0, "field_mt": 0}], "chain": []})";
  CHECK(parse_error_line([&] { parse_manifest(dup, "/tmp"); }) >= 1);
  CHECK(parse_error_line([] { parse_manifest("{\n\"entries\": [\n", "/tmp"); }) >= 2);
}
