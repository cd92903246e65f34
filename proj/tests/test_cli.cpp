#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "mieforce/cli/commands.hpp"

using namespace mieforce;
using namespace mieforce::cli;
namespace fs = std::filesystem;

namespace {

const std::string kBase = R"(
[target]
radius = "1 um"

[material]
epsilon = [12.11, 0.1]

[source]
wavelength = "1550 nm"
)";

const std::string kSqueezed = R"(
[squeezing]
r0 = 0.69
axis = [0.0, 0.0, 1.0]
angular = "top_hat_cap"
theta_max = "0.3 rad"
spectral = "delta"
bandwidth = "2.5 THz"
bandwidth_unit = "hz"
)";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text, "case.toml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return {};
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / ("mieforce_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(MIEFORCE_BINARY) + " " + args + " >" +
                          (scratch_dir() / "stdout.txt").string() + " 2>" + (scratch_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_stdout() { return read_file(scratch_dir() / "stdout.txt"); }
std::string last_stderr() { return read_file(scratch_dir() / "stderr.txt"); }

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("no column " + name);
  }
};

Csv parse_csv(const std::string& text) {
  Csv c;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find("\r\n", pos);
    EXPECT_NE(end, std::string::npos) << "line without CRLF";
    if (end == std::string::npos) break;
    const std::string line = text.substr(pos, end - pos);
    pos = end + 2;
    if (line.rfind("# ", 0) == 0) {
      c.comments.push_back(line.substr(2));
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string s; std::getline(ss, s, ',');) f.push_back(s);
    if (c.header.empty()) {
      c.header = f;
    } else {
      std::vector<double> r;
      for (const auto& s : f) r.push_back(std::stod(s));
      c.rows.push_back(r);
    }
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// units

TEST(Units, LengthsAreExactPowersOfTen) {
  EXPECT_EQ(parse_quantity("10 um", Dimension::Length), 1e-5);
  EXPECT_EQ(parse_quantity("1550nm", Dimension::Length), 1550e-9);
  EXPECT_DOUBLE_EQ(parse_quantity("0.2 \xCE\xBCm", Dimension::Length), 0.2e-6);
  EXPECT_EQ(parse_quantity("3e-6", Dimension::Length), 3e-6);
  EXPECT_EQ(parse_quantity("2 mm", Dimension::Length), 2e-3);
}

TEST(Units, FrequencyAnglesAndTemperature) {
  EXPECT_DOUBLE_EQ(parse_quantity("193.4 THz", Dimension::Frequency), 2 * M_PI * 193.4e12);
  EXPECT_DOUBLE_EQ(parse_quantity("1e15 rad_s", Dimension::Frequency), 1e15);
  EXPECT_DOUBLE_EQ(parse_quantity("90 deg", Dimension::Angle), M_PI / 2);
  EXPECT_DOUBLE_EQ(parse_quantity("200 mrad", Dimension::Angle), 0.2);
  EXPECT_DOUBLE_EQ(parse_quantity("1 sr", Dimension::SolidAngle), 1.0);
  EXPECT_DOUBLE_EQ(parse_quantity("300 K", Dimension::Temperature), 300.0);
}

TEST(Units, RejectsUnknownAndMismatchedUnits) {
  EXPECT_THROW(parse_quantity("10 furlong", Dimension::Length), ConfigError);
  EXPECT_THROW(parse_quantity("10 THz", Dimension::Length), ConfigError);
  EXPECT_THROW(parse_quantity("nm", Dimension::Length), ConfigError);
  EXPECT_THROW(parse_quantity("", Dimension::Length), ConfigError);
}

TEST(Units, BandwidthFollowsDeclaredUnit) {
  EXPECT_DOUBLE_EQ(parse_bandwidth("2.5 THz", BandwidthUnit::Hertz), 2 * M_PI * 2.5e12);
  EXPECT_DOUBLE_EQ(parse_bandwidth("2.5e12", BandwidthUnit::Hertz), 2 * M_PI * 2.5e12);
  EXPECT_DOUBLE_EQ(parse_bandwidth("2.5e12", BandwidthUnit::RadPerSecond), 2.5e12);
  EXPECT_THROW(parse_bandwidth("2.5 THz", BandwidthUnit::RadPerSecond), ConfigError);
  EXPECT_THROW(parse_bandwidth("1e12 rad_s", BandwidthUnit::Hertz), ConfigError);
  EXPECT_THROW(parse_bandwidth_unit("Hz/s"), ConfigError);
}

TEST(Units, SqueezingLevelInDecibels) {
  EXPECT_NEAR(parse_squeezing("6 dB"), 0.6908, 5e-5);
  EXPECT_DOUBLE_EQ(parse_squeezing("0.69"), 0.69);
  EXPECT_THROW(parse_squeezing("6 dBm"), ConfigError);
}

// ---------------------------------------------------------------------------
// config

TEST(Config, MinimalFileAndEcho) {
  const RunConfig c = parse_config(kBase);
  ASSERT_TRUE(c.radius);
  EXPECT_EQ(*c.radius, 1e-6);
  EXPECT_EQ(*c.epsilon, cdouble(12.11, 0.1));
  EXPECT_NEAR(c.omega0, 2 * M_PI * constants::speed_of_light / 1550e-9, 1e-6 * c.omega0);
  EXPECT_FALSE(c.has_squeezing());
  bool saw_radius = false;
  for (const auto& [k, v] : c.echo) saw_radius = saw_radius || (k == "target.radius" && v == "\"1 um\"");
  EXPECT_TRUE(saw_radius);
}

TEST(Config, SweepRadiiHitBothEnds) {
  const RunConfig c = parse_config(R"(
[target]
radius_min = "0.1 um"
radius_max = "10 um"
count = 500
spacing = "log"
[material]
epsilon = 2.25
[source]
frequency = "193.4 THz"
)");
  const auto r = c.radii();
  ASSERT_EQ(r.size(), 500u);
  EXPECT_DOUBLE_EQ(r.front(), 1e-7);
  EXPECT_EQ(r.back(), 1e-5);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GT(r[i], r[i - 1]);
  EXPECT_NEAR(r[250] / r[249], r[1] / r[0], 1e-12);
}

TEST(Config, ErrorsNameFileLineAndKey) {
  std::string msg = expect_config_error(kBase + "[numerics]\nbogus = 1\n");
  EXPECT_NE(msg.find("case.toml:11"), std::string::npos) << msg;
  EXPECT_NE(msg.find("numerics.bogus"), std::string::npos) << msg;

  msg = expect_config_error(kBase + "[numerics]\nn_theta = \"many\"\n");
  EXPECT_NE(msg.find("numerics.n_theta"), std::string::npos) << msg;

  msg = expect_config_error(R"(
[target]
radius = "1 parsec"
[material]
epsilon = 2.0
[source]
wavelength = "1 um"
)");
  EXPECT_NE(msg.find("case.toml:3"), std::string::npos) << msg;

  msg = expect_config_error("[target\nradius = 1\n");
  EXPECT_NE(msg.find("case.toml:1"), std::string::npos) << msg;
}

TEST(Config, RejectsInconsistentInput) {
  expect_config_error(kBase + "[extra]\nx = 1\n");
  expect_config_error(R"(
[target]
radius = "1 um"
[material]
epsilon = [2.0, -0.1]
[source]
wavelength = "1 um"
)");
  expect_config_error(R"(
[target]
radius = "1 um"
[material]
epsilon = 2.0
[source]
wavelength = "1 um"
frequency = "300 THz"
)");
  expect_config_error(kBase + "[squeezing]\nr0 = 0.5\nlevel = \"6 dB\"\n");
  expect_config_error(kBase + "[squeezing]\nr0 = 0.5\nangular = \"gaussian_cap\"\n");
  expect_config_error(kBase + "[squeezing]\nr0 = 0.5\nspectral = \"delta\"\n");
  expect_config_error(kBase + "[numerics]\ntruncation = \"fixed:0\"\n");
  expect_config_error(kBase + "[numerics]\nmode = \"exact\"\n");
}

TEST(Config, BandwidthUnitIsMandatory) {
  std::string text = kSqueezed;
  text.erase(text.find("bandwidth_unit"));
  RunConfig c = parse_config(kBase + text);
  EXPECT_THROW(apply_overrides(c, {}), ConfigError);
  Overrides o;
  o.bandwidth_unit = "rad_s";
  EXPECT_THROW(apply_overrides(c, o), ConfigError);  // "2.5 THz" contradicts rad_s
  c = parse_config(kBase + text);
  o.bandwidth_unit = "hz";
  apply_overrides(c, o);
  EXPECT_DOUBLE_EQ(c.bandwidth(), 2 * M_PI * 2.5e12);
}

TEST(Config, OverridesAndProfile) {
  RunConfig c = parse_config(kBase + kSqueezed);
  Overrides o;
  o.truncation = "fixed:7";
  o.threads = 3;
  o.out = "x.csv";
  apply_overrides(c, o);
  EXPECT_EQ(c.truncation.to_string(), "fixed:7");
  EXPECT_EQ(c.threads, 3);
  EXPECT_EQ(c.out_path, "x.csv");
  for (const auto& [k, v] : c.echo) {
    EXPECT_NE(k, "flag.threads");
    EXPECT_NE(k, "flag.out");
  }
  const SqueezingProfile p = c.profile();
  EXPECT_EQ(p.r0, 0.69);
  ASSERT_TRUE(std::holds_alternative<TopHatCap>(p.angular));
  EXPECT_EQ(std::get<TopHatCap>(p.angular).theta_max, 0.3);
  Overrides bad;
  bad.threads = 0;
  EXPECT_THROW(apply_overrides(c, bad), ConfigError);
}

// ---------------------------------------------------------------------------
// dispersion tables

TEST(Dispersion, ParsesMixedSeparatorsAndSortsByFrequency) {
  std::istringstream in(
      "# header\n"
      "1600nm, 12.0, 0.1\n"
      "1500 nm\t12.2\t0.1   # trailing comment\n"
      "\n"
      "193.4 THz 12.1 0.1\n");
  const MaterialSpec m = parse_dispersion_table(in, "t.txt");
  const double w = 2 * M_PI * 193.4e12;
  EXPECT_NEAR(m.at(w).eps.real(), 12.1, 1e-12);
  const double w1500 = 2 * M_PI * constants::speed_of_light / 1500e-9;
  EXPECT_NEAR(m.at(w1500).eps.real(), 12.2, 1e-12);
}

TEST(Dispersion, ErrorsCarryLineNumbers) {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_dispersion_table(in, "t.txt");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(error_of("1500nm 12 0.1\n1600 12 0.1\n").find("t.txt:2"), std::string::npos);
  EXPECT_NE(error_of("1500nm 12 0.1\n1600nm 12 abc\n").find("t.txt:2"), std::string::npos);
  EXPECT_NE(error_of("1500nm 12\n").find("t.txt:1"), std::string::npos);
  EXPECT_NE(error_of("1500nm 12 0.1\n1500nm 12 0.1\n").find("duplicate"), std::string::npos);
  EXPECT_FALSE(error_of("# nothing\n").empty());
}

// ---------------------------------------------------------------------------
// CSV

TEST(Csv, SeventeenDigitsAndCrlf) {
  EXPECT_EQ(format_number(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(std::stod(format_number(M_PI)), M_PI);
  Table t;
  t.header = {"a", "b,c"};
  t.rows = {{1.0, 2.0}};
  t.comments = {"note"};
  std::ostringstream os;
  write_csv(os, t);
  EXPECT_EQ(os.str(), "# note\r\na,\"b,c\"\r\n1.0000000000000000e+00,2.0000000000000000e+00\r\n");
  EXPECT_EQ(quote_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, ColumnSelection) {
  Table t;
  t.header = {"a", "b", "c"};
  t.rows = {{1, 2, 3}};
  const Table s = t.select({"c", "a"});
  ASSERT_EQ(s.header, (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(s.rows[0], (std::vector<double>{3, 1}));
  EXPECT_THROW(t.select({"d"}), ConfigError);
}

// ---------------------------------------------------------------------------
// commands, in-process

TEST(Commands, CrossSectionsLogSweepHasOneRowPerRadius) {
  RunConfig c = load_config(std::string(MIEFORCE_CONFIGS) + "/sweep.toml");
  c.threads = 2;
  const Table t = cmd_cross_sections(c);
  ASSERT_EQ(t.rows.size(), 500u);
  const std::size_t pr = 6;
  ASSERT_EQ(t.header[pr], "sigma_pr[m^2]");
  for (const auto& r : t.rows) EXPECT_GE(r[pr], 0.0);
}

TEST(Commands, VacuumSphereGivesZeroCrossSections) {
  RunConfig c = parse_config(R"(
[target]
radius_min = "0.2 um"
radius_max = "5 um"
count = 7
[material]
epsilon = 1.0
[source]
wavelength = "1550 nm"
)");
  const Table t = cmd_cross_sections(c);
  for (const auto& r : t.rows)
    for (std::size_t j = 2; j < r.size(); ++j) EXPECT_EQ(r[j], 0.0);
}

TEST(Commands, Fig1PresetEndpoint) {
  RunConfig c = fig1_config();
  c.sweep.reset();
  c.radius = 10e-6;
  const Table cs = cmd_cross_sections(c);
  EXPECT_GE(cs.rows[0][6], 320e-12);
  const Table f = cmd_force(c);
  const double fz = f.rows[0][4];
  EXPECT_GT(std::abs(fz), 1.6e-13);
}

TEST(Commands, ForceSignsAndZeroSqueezing) {
  RunConfig c = parse_config(kBase + kSqueezed);
  c.threads = 2;
  const Table up = cmd_force(c);
  c.axis = -c.axis;
  const Table down = cmd_force(c);
  for (std::size_t j = 2; j < 14; ++j) EXPECT_NEAR(up.rows[0][j], -down.rows[0][j], 1e-12 * std::abs(up.rows[0][4]));
  EXPECT_GT(up.rows[0][4], 0.0);

  // No squeezing: no drive, and the thermal recoil cancels to rounding.
  c.r0 = 0.0;
  c.temperature = 0.0;
  const Table cold = cmd_force(c);
  for (std::size_t j = 2; j < 14; ++j) EXPECT_EQ(cold.rows[0][j], 0.0) << up.header[j];
  c.temperature = 1000.0;
  const Table hot = cmd_force(c);
  for (std::size_t j = 5; j < 8; ++j) EXPECT_EQ(hot.rows[0][j], 0.0) << up.header[j];
  EXPECT_EQ(hot.header[16], "recoil_residual");
  EXPECT_LT(hot.rows[0][16], 1e-10);
}

TEST(Commands, ForceNeedsSqueezing) {
  const RunConfig c = parse_config(kBase);
  EXPECT_THROW(cmd_force(c), ConfigError);
}

TEST(Commands, CertifyTruncationTooLowFailsTraceMapping) {
  RunConfig c = parse_config(R"(
[target]
radius = "1.23 um"
[material]
epsilon = [12.11, 0.1]
[source]
wavelength = "1550 nm"
[numerics]
truncation = "fixed:1"
)");
  c.threads = 4;
  const CertifyReport rep = cmd_certify(c);
  EXPECT_FALSE(rep.passed());
  bool trace_failed = false;
  for (const auto& ch : rep.checks)
    if (ch.name == "trace_mapping") trace_failed = !ch.passed;
  EXPECT_TRUE(trace_failed);
  std::ostringstream os;
  print_report(os, rep);
  EXPECT_NE(os.str().find("FAILED: trace_mapping"), std::string::npos);
}

TEST(Commands, CertifyLosslessPassesOpticalTheorem) {
  RunConfig c = parse_config(R"(
[target]
radius = "0.5 um"
[material]
epsilon = 2.25
[source]
wavelength = "1550 nm"
)");
  c.threads = 4;
  const CertifyReport rep = cmd_certify(c);
  for (const auto& ch : rep.checks) EXPECT_TRUE(ch.passed) << ch.name << " " << ch.residual;
  bool found = false;
  for (const auto& ch : rep.checks) found = found || ch.name == "optical_theorem";
  EXPECT_TRUE(found);
}

TEST(Commands, CertifyRefusesLargeSpheres) {
  RunConfig c = fig1_config();
  EXPECT_THROW(cmd_certify(c), ConfigError);
}

// ---------------------------------------------------------------------------
// the binary

TEST(Binary, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("cross-sections"), 2);  // --config is required
  EXPECT_EQ(run("cross-sections --config /nonexistent.toml"), 2);
  EXPECT_EQ(run("fig1 --bandwidth-unit furlongs"), 2);
}

TEST(Binary, ConfigErrorsExitTwo) {
  const auto bad = write_file("bad.toml", kBase + "[numerics]\nbogus = 1\n");
  EXPECT_EQ(run("cross-sections --config " + bad.string()), 2);
  EXPECT_NE(last_stderr().find("bad.toml:11"), std::string::npos) << last_stderr();

  std::string text = kSqueezed;
  text.erase(text.find("bandwidth_unit"));
  const auto nounit = write_file("nounit.toml", kBase + text);
  EXPECT_EQ(run("force --config " + nounit.string()), 2);
  EXPECT_NE(last_stderr().find("bandwidth_unit"), std::string::npos);
  EXPECT_EQ(run("force --config " + nounit.string() + " --bandwidth-unit hz"), 0);

  const auto good = write_file("good.toml", kBase);
  EXPECT_EQ(run("cross-sections --config " + good.string() + " --truncation fixed:x"), 2);
  EXPECT_EQ(run("cross-sections --config " + good.string() + " --threads 0"), 2);
}

TEST(Binary, NumericalFailureExitsThree) {
  // A very narrow cap on a two-ring grid cannot reach the drive tolerance.
  const auto f = write_file("narrow.toml", kBase + R"(
[squeezing]
r0 = 0.69
angular = "gaussian_cap"
sigma_theta = "0.001 rad"
spectral = "delta"
bandwidth = "1 THz"
bandwidth_unit = "hz"
[numerics]
n_theta = 2
n_phi = 4
max_doublings = 0
tolerance = 1e-14
)");
  EXPECT_EQ(run("force --config " + f.string()), 3) << last_stderr();
}

TEST(Binary, CrossSectionsCsvShape) {
  const auto out = scratch_dir() / "sweep.csv";
  ASSERT_EQ(run("cross-sections --config " + std::string(MIEFORCE_CONFIGS) + "/sweep.toml --out " + out.string()), 0);
  const Csv csv = parse_csv(read_file(out));
  EXPECT_EQ(csv.rows.size(), 500u);
  EXPECT_EQ(csv.header.size(), 7u);
  ASSERT_FALSE(csv.comments.empty());
  EXPECT_EQ(csv.comments.front(), "mieforce cross-sections");
  for (const auto& r : csv.rows) EXPECT_GE(r[csv.column("sigma_pr[m^2]")], 0.0);
}

TEST(Binary, OutputIsByteIdenticalAcrossThreadCounts) {
  const std::string cfg = std::string(MIEFORCE_CONFIGS) + "/sweep.toml";
  ASSERT_EQ(run("cross-sections --config " + cfg + " --threads 1"), 0);
  const std::string one = last_stdout();
  ASSERT_EQ(run("cross-sections --config " + cfg + " --threads 4"), 0);
  EXPECT_EQ(one, last_stdout());
  ASSERT_EQ(run("cross-sections --config " + cfg, "MIEFORCE_THREADS=3"), 0);
  EXPECT_EQ(one, last_stdout());

  const auto f = write_file("force.toml", kBase + kSqueezed + "[thermal]\ntemperature = \"300 K\"\n");
  ASSERT_EQ(run("force --config " + f.string() + " --threads 1"), 0);
  const std::string force_one = last_stdout();
  ASSERT_EQ(run("force --config " + f.string() + " --threads 4"), 0);
  EXPECT_EQ(force_one, last_stdout());
}

TEST(Binary, OutputColumnsAndTruncationFlag) {
  const auto f = write_file("cols.toml", kBase + "[output]\ncolumns = [\"x\", \"sigma_pr[m^2]\"]\n");
  ASSERT_EQ(run("cross-sections --config " + f.string() + " --truncation fixed:12"), 0);
  const Csv csv = parse_csv(last_stdout());
  EXPECT_EQ(csv.header, (std::vector<std::string>{"x", "sigma_pr[m^2]"}));
  bool echoed = false;
  for (const auto& c : csv.comments) echoed = echoed || c == "flag.truncation = \"fixed:12\"";
  EXPECT_TRUE(echoed);

  const auto bad = write_file("badcols.toml", kBase + "[output]\ncolumns = [\"nope\"]\n");
  EXPECT_EQ(run("cross-sections --config " + bad.string()), 2);
}

TEST(Binary, CertifyExitCodes) {
  EXPECT_EQ(run("certify --config " + std::string(MIEFORCE_CONFIGS) + "/certify.toml"), 0) << last_stdout();
  EXPECT_NE(last_stdout().find("all checks passed"), std::string::npos);

  const auto f = write_file("trunc1.toml", R"(
[target]
radius = "1.23 um"
[material]
epsilon = [12.11, 0.1]
[source]
wavelength = "1550 nm"
[numerics]
truncation = "fixed:1"
)");
  const auto report = scratch_dir() / "report.csv";
  EXPECT_EQ(run("certify --config " + f.string() + " --out " + report.string()), 4);
  EXPECT_NE(last_stdout().find("FAILED: trace_mapping"), std::string::npos);
  EXPECT_NE(read_file(report).find("trace_mapping"), std::string::npos);
}

TEST(Binary, Fig1PresetRuns) {
  ASSERT_EQ(run("fig1 --threads 4"), 0) << last_stderr();
  const Csv csv = parse_csv(last_stdout());
  ASSERT_EQ(csv.rows.size(), 600u);
  const auto& end = csv.rows.back();
  EXPECT_EQ(end[csv.column("a[m]")], 1e-5);
  EXPECT_GE(end[csv.column("sigma_pr[m^2]")], 320e-12);
  EXPECT_GT(end[csv.column("F_axial[N]")], 1.6e-13);
  EXPECT_NEAR(end[csv.column("P_sq[N/m^2]")], 4.96e-4, 0.05 * 5e-4);

  // The shipped config reproduces the preset's numbers.
  ASSERT_EQ(run("fig1 --threads 4 --config " + std::string(MIEFORCE_CONFIGS) + "/fig1.toml"), 0);
  const Csv file = parse_csv(last_stdout());
  EXPECT_EQ(file.rows, csv.rows);
}

TEST(Binary, ShippedConfigsParse) {
  for (const auto& e : fs::directory_iterator(MIEFORCE_CONFIGS)) {
    if (e.path().extension() != ".toml") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
  }
  ASSERT_EQ(run("cross-sections --config " + std::string(MIEFORCE_CONFIGS) + "/dispersive.toml"), 0) << last_stderr();
  ASSERT_EQ(run("force --config " + std::string(MIEFORCE_CONFIGS) + "/force_cap.toml"), 0) << last_stderr();
}
