#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drishti/error.hpp"
#include "drishti/media_io.hpp"
#include "drishti/sim.hpp"
#include "oracles.hpp"

using namespace drishti;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(DRISHTI_DATA_DIR) / "sim";
const fs::path kGolden = fs::path(DRISHTI_GOLDEN_DIR);

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct Run {
  int status = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  Run r;
  FILE* p = ::popen((std::string(DRISHTI_CLI) + " " + args + " 2>/dev/null").c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int raw = ::pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

// Feet the pipeline should speak for a fronto-parallel object at `z` metres:
// interior pixels match at the nearest integer disparity.
long expected_feet(double z) {
  const double bf = 0.1 * 400.0;
  return std::lround(bf / std::round(bf / z) * 3.28084);
}

// Copy of the fixture in a scratch directory, so tests can break pieces of it.
fs::path scratch_copy(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("drishti_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::copy(kFixture, dir, fs::copy_options::recursive);
  return dir;
}

}  // namespace

TEST_SUITE("cli-sim") {

TEST_CASE("fixture transcript matches golden file and the hand-derived oracle") {
  const auto result = sim::run_simulation(sim::load_config((kFixture / "sim.json").string()));
  const auto golden = lines_of(io::read_text_file((kGolden / "simulate_transcript.txt").string()));
  CHECK(result.transcript == golden);

  // Route in the fixture: north along Main Way, then east along Elm Street twice.
  const std::vector<std::string> oracle{
      "SPEAK[rate=0.8]: Head north on Main Way but beware there is chair is at " + std::to_string(expected_feet(1.524)) + " feet",
      "SPEAK[rate=0.8]: Head east on Elm Street but beware there is person is at " + std::to_string(expected_feet(0.9144)) +
          " feet and chair is at " + std::to_string(expected_feet(2.4384)) + " feet",
      "SPEAK[rate=0.8]: Head east on Elm Street but beware there is dog is at " + std::to_string(expected_feet(3.048)) + " feet",
  };
  CHECK(result.transcript == oracle);
  CHECK(result.exit_code() == 0);

  const std::vector<std::string> names{"setup", "disparity_depth", "image_load", "detection", "cumulative"};
  REQUIRE(result.timing.rows.size() == 5);
  double biggest = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(result.timing.rows[i].task == names[i]);
    CHECK(result.timing.rows[i].seconds >= 0.0);
    if (i < 4) biggest = std::max(biggest, result.timing.rows[i].seconds);
  }
  CHECK(result.timing.rows[4].seconds >= biggest);
  const auto csv = lines_of(result.timing.to_csv());
  REQUIRE(csv.size() == 6);
  CHECK(csv[0] == "task,seconds");
  CHECK(csv[5].rfind("cumulative,", 0) == 0);
}

TEST_CASE("transcript is deterministic") {
  const auto cfg = sim::load_config((kFixture / "sim.json").string());
  CHECK(sim::run_simulation(cfg).transcript == sim::run_simulation(cfg).transcript);
}

TEST_CASE("unknown destination beeps once and stops") {
  auto cfg = sim::load_config((kFixture / "sim.json").string());
  cfg.destination = "Atlantis";
  const auto result = sim::run_simulation(cfg);
  CHECK(result.transcript == std::vector<std::string>{"BEEP"});
  CHECK(result.exit_code() != 0);
  CHECK(result.timing.rows.size() == 5);
}

TEST_CASE("a broken frame becomes a beep and the run continues") {
  const auto dir = scratch_copy("broken");
  io::write_text_file((dir / "f2_left.pgm").string(), "P5\n320 240\n255\n");
  const auto result = sim::run_simulation(sim::load_config((dir / "sim.json").string()));
  REQUIRE(result.transcript.size() == 3);
  CHECK(result.transcript[0].rfind("SPEAK[rate=0.8]: ", 0) == 0);
  CHECK(result.transcript[1] == "BEEP");
  CHECK(result.transcript[2].rfind("SPEAK[rate=0.8]: ", 0) == 0);
  CHECK(result.exit_code() == 0);
  fs::remove_all(dir);
}

TEST_CASE("configuration errors") {
  const auto dir = scratch_copy("config");
  CHECK(oracle::error_code([&] { sim::load_config((dir / "absent.json").string()); }) == Errc::ConfigError);

  io::write_text_file((dir / "bad.json").string(), "{ not json");
  CHECK(oracle::error_code([&] { sim::load_config((dir / "bad.json").string()); }) == Errc::ConfigError);

  io::write_text_file((dir / "missing.json").string(),
                      R"({"calibration":"nope.txt","frames":[],"annotations":"annotations.csv","route_graph":"campus.csv","source":1,"destination":"x"})");
  CHECK(oracle::error_code([&] { sim::load_config((dir / "missing.json").string()); }) == Errc::ConfigError);

  io::write_text_file((dir / "window.json").string(),
                      R"({"calibration":"calibration.txt","frames":[],"annotations":"annotations.csv","route_graph":"campus.csv","source":1,"destination":"x","match":{"window":4}})");
  CHECK(oracle::error_code([&] { sim::load_config((dir / "window.json").string()); }) == Errc::ConfigError);

  io::write_text_file((dir / "nosource.json").string(),
                      R"({"calibration":"calibration.txt","frames":[],"annotations":"annotations.csv","route_graph":"campus.csv","destination":"x"})");
  CHECK(oracle::error_code([&] { sim::load_config((dir / "nosource.json").string()); }) == Errc::ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("simulate subcommand") {
  const fs::path csv = fs::temp_directory_path() / ("drishti_timing_" + std::to_string(::getpid()) + ".csv");
  const auto r = run_cli("simulate --config " + (kFixture / "sim.json").string() + " --timing-csv " + csv.string());
  CHECK(r.status == 0);
  std::vector<std::string> speech, timing;
  for (const auto& l : lines_of(r.out)) (l.rfind("TIMING,", 0) == 0 ? timing : speech).push_back(l);
  CHECK(speech == lines_of(io::read_text_file((kGolden / "simulate_transcript.txt").string())));
  REQUIRE(timing.size() == 5);
  CHECK(timing.back().rfind("TIMING,cumulative,", 0) == 0);
  CHECK(lines_of(io::read_text_file(csv.string())).size() == 6);
  fs::remove(csv);

  const auto beep = run_cli("simulate --config " + (kFixture / "sim.json").string() + " --destination Atlantis");
  CHECK(beep.status != 0);
  const auto lines = lines_of(beep.out);
  CHECK(std::count(lines.begin(), lines.end(), "BEEP") == 1);
  CHECK(std::none_of(lines.begin(), lines.end(), [](const std::string& l) { return l.rfind("SPEAK", 0) == 0; }));
}

TEST_CASE("stage subcommands") {
  const auto guide = run_cli("guide --phrase 'north on Main Way' --object chair:1.524");
  CHECK(guide.status == 0);
  CHECK(guide.out == "SPEAK[rate=0.8]: Head north on Main Way but beware there is chair is at 5 feet\n");

  const auto route = run_cli("route --graph " + (kFixture / "campus.csv").string() + " --from 1 --to library");
  CHECK(route.status == 0);
  CHECK(route.out.rfind("Head north on Main Way", 0) == 0);
  CHECK(run_cli("route --graph " + (kFixture / "campus.csv").string() + " --from 1 --to Atlantis").out == "BEEP\n");

  const auto give = run_cli("client give-input --graph " + (kFixture / "campus.csv").string() + " --destination Atlantis");
  CHECK(give.status == 2);
  CHECK(give.out == "BEEP\n");
  CHECK(run_cli("client speak-input --text hello").out == "SPEAK[rate=0.8]: hello\n");

  const auto det = run_cli("detect --annotations " + (kFixture / "annotations.csv").string() + " --frame f3");
  CHECK(det.out == "dog,154,124,62,52,0.9\n");

  const fs::path dsp = fs::temp_directory_path() / ("drishti_f1_" + std::to_string(::getpid()) + ".dsp");
  const auto disp = run_cli("disparity --left " + (kFixture / "f1_left.pgm").string() + " --right " +
                            (kFixture / "f1_right.pgm").string() + " --out " + dsp.string());
  CHECK(disp.status == 0);
  const auto depth = run_cli("depth --disparity " + dsp.string() + " --calibration " +
                             (kFixture / "calibration.txt").string() + " --box 124,84,52,82");
  CHECK(depth.status == 0);
  CHECK(depth.out.find("distance_m,124,84,52,82,1.5385") != std::string::npos);
  fs::remove(dsp);

  const auto cal = run_cli("stereo-calibrate --corners " + (kFixture / "corners.csv").string());
  CHECK(cal.status == 0);
  const auto rig = calib::parse_stereo_rig(cal.out);
  CHECK(rig.baseline() == doctest::Approx(0.06).epsilon(0.01));
  CHECK(rig.left.focal_mm() == doctest::Approx(2.0).epsilon(0.034));

  CHECK(run_cli("calibrate --corners /nonexistent.csv").status == 1);
}

TEST_CASE("serve and navigate over the fixture") {
  // Ephemeral ports are not exposed by the CLI, so pick one from the process id.
  const int port = 20000 + ::getpid() % 20000;
  const std::string server = std::string(DRISHTI_CLI) + " serve --config " + (kFixture / "sim.json").string() +
                             " --endpoint 127.0.0.1:" + std::to_string(port) + " 2>/dev/null &";
  REQUIRE(std::system(server.c_str()) == 0);
  Run nav;
  for (int attempt = 0; attempt < 50; ++attempt) {
    ::usleep(100000);
    nav = run_cli("client navigate --endpoint 127.0.0.1:" + std::to_string(port) + " --graph " +
                  (kFixture / "campus.csv").string() + " --from 1 --destination library --idle-ms 1500");
    if (nav.status == 0 && !nav.out.empty()) break;
  }
  auto lines = lines_of(nav.out);
  REQUIRE(lines.size() == 4);
  CHECK(std::vector<std::string>(lines.begin(), lines.begin() + 3) ==
        lines_of(io::read_text_file((kGolden / "simulate_transcript.txt").string())));
  CHECK(lines[3] == "BEEP");  // the server finished and went away
}

}  // TEST_SUITE
