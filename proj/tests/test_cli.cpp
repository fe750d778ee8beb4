#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string command = std::string(SYNTHCTL_BIN) + " " + args + " > " +
                              out.string() + " 2> " + err.string();
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out);
  result.err = read_file(err);
  return result;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("synthctl_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

const char* kExactPanel =
    "unit,time,outcome\n"
    "t,1,1.0\nt,2,2.0\nt,3,3.0\nt,4,4.0\n"
    "a,1,9.0\na,2,7.0\na,3,5.0\na,4,3.0\n"
    "b,1,1.0\nb,2,2.0\nb,3,3.0\nb,4,4.0\n";

}  // namespace

TEST_CASE("simulate writes a panel of the configured shape, deterministically") {
  const auto dir = fresh_dir("simulate");
  write(dir / "config.json",
        R"({"kind":"grouped","groups":20,"group_size":1,"rho":0.5,"noise_sd":0.25,
            "t_total":40,"t0":30,"seed":9})");
  const auto first = run("simulate --config " + (dir / "config.json").string() +
                             " --out-dir " + (dir / "run1").string(),
                         dir);
  REQUIRE(first.exit_code == 0);
  const std::string panel1 = read_file(dir / "run1" / "panel.csv");
  // header + (J+1) * T rows
  const auto rows = std::count(panel1.begin(), panel1.end(), '\n');
  CHECK(rows == 1 + 21 * 40);

  const auto second = run("simulate --config " + (dir / "config.json").string() +
                              " --out-dir " + (dir / "run2").string(),
                          dir);
  REQUIRE(second.exit_code == 0);
  CHECK(read_file(dir / "run2" / "panel.csv") == panel1);

  // manifest digest recomputes from the resolved config
  const json manifest = json::parse(read_file(dir / "run1" / "manifest.json"));
  char expected[17];
  std::snprintf(expected, sizeof(expected), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(manifest["config"].dump())));
  CHECK(manifest["config_digest"] == std::string(expected));
}

TEST_CASE("simulate rejects rho outside the unit interval with exit 2") {
  const auto dir = fresh_dir("simulate_bad");
  write(dir / "config.json",
        R"({"kind":"grouped","groups":2,"group_size":1,"rho":1.2,"noise_sd":0.1,
            "t_total":10,"t0":5,"seed":1})");
  const auto result = run("simulate --config " + (dir / "config.json").string() +
                              " --out-dir " + dir.string(),
                          dir);
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("rho") != std::string::npos);
}

TEST_CASE("fit frequentist on an exact-match fixture returns the unit weight") {
  const auto dir = fresh_dir("fit_freq");
  write(dir / "panel.csv", kExactPanel);
  const auto result = run("fit --panel " + (dir / "panel.csv").string() +
                              " --mode frequentist --t0-marker 3 --out-dir " +
                              (dir / "out").string(),
                          dir);
  REQUIRE(result.exit_code == 0);
  const json results = json::parse(read_file(dir / "out" / "results.json"));
  CHECK(results["weights"][1].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(results["weights"][0].get<double>() == doctest::Approx(0.0));
  CHECK(results["mean_effect"].get<double>() == doctest::Approx(0.0));
  CHECK(fs::exists(dir / "out" / "effects.csv"));
}

TEST_CASE("fit bayes smoke profile emits the configured interval levels") {
  const auto dir = fresh_dir("fit_bayes");
  write(dir / "panel.csv", kExactPanel);
  write(dir / "config.json",
        R"({"bayes":{"chains":2,"warmup":60,"draws":50},"levels":[0.75,0.95],"seed":4})");
  const auto result = run("fit --panel " + (dir / "panel.csv").string() +
                              " --mode bayes --t0-marker 3 --config " +
                              (dir / "config.json").string() + " --out-dir " +
                              (dir / "out").string(),
                          dir);
  REQUIRE(result.exit_code == 0);
  const json results = json::parse(read_file(dir / "out" / "results.json"));
  CHECK(results["mean_effect_intervals"].contains("0.75"));
  CHECK(results["mean_effect_intervals"].contains("0.95"));
  CHECK(results.contains("bias_bound_quantiles"));
  CHECK(results.contains("diagnostics"));
}

TEST_CASE("fit mle with too few pre-periods exits 3") {
  const auto dir = fresh_dir("fit_mle");
  // T0 = 2 with J = 2 donors: insufficient
  write(dir / "panel.csv", kExactPanel);
  const auto result = run("fit --panel " + (dir / "panel.csv").string() +
                              " --mode mle --t0-marker 2 --out-dir " +
                              (dir / "out").string(),
                          dir);
  CHECK(result.exit_code == 3);
  CHECK(result.err.find("pre-period") != std::string::npos);
}

TEST_CASE("fit with an unknown t0 marker exits 2") {
  const auto dir = fresh_dir("fit_marker");
  write(dir / "panel.csv", kExactPanel);
  const auto result = run("fit --panel " + (dir / "panel.csv").string() +
                              " --mode frequentist --t0-marker 99 --out-dir " +
                              (dir / "out").string(),
                          dir);
  CHECK(result.exit_code == 2);
}

TEST_CASE("bvm smoke profile writes densities, metrics, and manifest") {
  const auto dir = fresh_dir("bvm");
  write(dir / "config.json",
        R"({"t0_grid":[30],"freq_reps":100,"grid_points":101,
            "bayes":{"chains":2,"warmup":100,"draws":100},"seed":12})");
  const auto first = run("bvm --profile smoke --config " +
                             (dir / "config.json").string() + " --out-dir " +
                             (dir / "run1").string() + " --threads 2",
                         dir);
  REQUIRE(first.exit_code == 0);
  CHECK(fs::exists(dir / "run1" / "densities.csv"));
  CHECK(fs::exists(dir / "run1" / "manifest.json"));
  const std::string metrics = read_file(dir / "run1" / "metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 2);  // header + one t0

  const auto second = run("bvm --profile smoke --config " +
                              (dir / "config.json").string() + " --out-dir " +
                              (dir / "run2").string() + " --threads 1",
                          dir);
  REQUIRE(second.exit_code == 0);
  CHECK(read_file(dir / "run2" / "metrics.csv") == metrics);
}

TEST_CASE("missing subcommand or bad flags exit with the config code") {
  const auto dir = fresh_dir("usage");
  const auto result = run("fit --mode frequentist", dir);  // missing --panel
  CHECK(result.exit_code == 2);
}
