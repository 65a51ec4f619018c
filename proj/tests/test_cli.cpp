// End-to-end exercises of the command-line tool: exit-code contract,
// emitted artifacts, the diagnose round-trip, and the tau sweep against
// the ODE oracle.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return CROSSDIFF_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("crossdiff_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const std::string kEquilibriumConfig = R"(
r_u 2
r_v 2
dim 1
n 32
length 1
T 0.1
N 50
u_init constant:1
v_init constant:1
)";

const std::string kBoundaryConfig = R"(
alpha 0
a 1
d 2
r_u 2
r_v 2
dim 1
n 16
length 1
T 0.1
N 20
)";

// Parses a CSV with a header row into column vectors keyed by name.
std::map<std::string, std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.is_open());
  std::string line;
  REQUIRE(std::getline(in, line));
  std::vector<std::string> headers;
  std::istringstream hs(line);
  std::string tok;
  while (std::getline(hs, tok, ',')) headers.push_back(tok);
  std::map<std::string, std::vector<std::string>> cols;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    size_t i = 0;
    std::string cell;
    // Trailing empty cells still count, so split manually.
    std::vector<std::string> cells;
    std::string acc;
    for (char ch : line) {
      if (ch == ',') {
        cells.push_back(acc);
        acc.clear();
      } else {
        acc.push_back(ch);
      }
    }
    cells.push_back(acc);
    for (i = 0; i < headers.size(); ++i) {
      cols[headers[i]].push_back(i < cells.size() ? cells[i] : "");
    }
  }
  return cols;
}

}  // namespace

TEST_CASE("validate: admissible boundary fixture exits 0 and reports the regime") {
  const fs::path dir = temp_dir("validate");
  write_file(dir / "cfg.txt", kBoundaryConfig);
  const std::string cmd = std::string(cli_path()) + " validate --config " +
                          (dir / "cfg.txt").string() + " > " +
                          (dir / "out.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 0);
  std::ifstream in(dir / "out.txt");
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all.find("alpha_zero_boundary=1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("validate: inadmissible config exits 2") {
  const fs::path dir = temp_dir("invalid");
  write_file(dir / "cfg.txt", "alpha 0\na 1.5\n");
  CHECK(run_cli("validate --config " + (dir / "cfg.txt").string()) == 2);
  write_file(dir / "bad.txt", "no_such_key 1\n");
  CHECK(run_cli("validate --config " + (dir / "bad.txt").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("run: equilibrium fixture passes all monitors and emits the manifest") {
  const fs::path dir = temp_dir("run");
  write_file(dir / "cfg.txt", kEquilibriumConfig);
  const fs::path out = dir / "out";
  CHECK(run_cli("run --config " + (dir / "cfg.txt").string() + " --out " + out.string()) ==
        0);

  std::ifstream mf(out / "manifest.json");
  REQUIRE(mf.is_open());
  json manifest;
  mf >> manifest;
  CHECK(manifest.at("all_pass") == true);
  for (const auto& name : manifest.at("files")) {
    CHECK(fs::exists(out / name.get<std::string>()));
  }
  // Every enabled monitor reports a status in the summary.
  std::ifstream sf(out / "summary.json");
  json summary;
  sf >> summary;
  for (const char* key : {"max_v", "mass_u", "duality_u", "entropy_u_step"}) {
    CHECK(summary.at("monitors").contains(key));
  }
  const double max_v_margin = summary.at("monitors").at("max_v").at("worst_margin");
  CHECK(max_v_margin <= 1e-12 * 2.1);
  fs::remove_all(dir);
}

TEST_CASE("run: step-size violation exits 4") {
  const fs::path dir = temp_dir("run4");
  write_file(dir / "cfg.txt", "r_u 2\nr_v 2\nT 10\nN 10\nn 8\n");  // tau max(r) = 2
  CHECK(run_cli("run --config " + (dir / "cfg.txt").string() + " --out " +
                (dir / "out").string()) == 4);
  fs::remove_all(dir);
}

TEST_CASE("diagnose reproduces the stored monitor values at full resolution") {
  const fs::path dir = temp_dir("diagnose");
  write_file(dir / "cfg.txt", R"(
r_u 2
r_v 2
dim 1
n 24
length 1
T 0.1
N 50
u_init cosine_bump:0.3
v_init cosine_bump:-0.2
)");
  const fs::path out = dir / "out";
  const fs::path re = dir / "re";
  REQUIRE(run_cli("run --config " + (dir / "cfg.txt").string() + " --out " + out.string()) ==
          0);
  REQUIRE(run_cli("diagnose --config " + out.string() + " --out " + re.string()) == 0);

  for (const char* name :
       {"monitor_max_v.csv", "monitor_mass_u.csv", "monitor_duality_u.csv",
        "monitor_entropy_u_step.csv"}) {
    auto a = read_csv(out / name);
    auto b = read_csv(re / name);
    REQUIRE(a.at("value").size() == b.at("value").size());
    for (size_t r = 0; r < a.at("value").size(); ++r) {
      const double va = std::stod(a.at("value")[r]);
      const double vb = std::stod(b.at("value")[r]);
      CHECK(std::abs(va - vb) <= 1e-14 * std::max(1.0, std::abs(va)));
    }
  }
  // N = 50 <= 100 stores every step, so this is full resolution.
  std::ifstream sf(re / "summary.json");
  json summary;
  sf >> summary;
  CHECK(summary.at("snapshot_resolution") == false);
  fs::remove_all(dir);
}

TEST_CASE("sweep tau on the homogeneous fixture shows first-order ratios") {
  const fs::path dir = temp_dir("sweep");
  // Off the reaction equilibrium line so errors are nonzero.
  write_file(dir / "cfg.txt", R"(
r_u 2
r_v 2
dim 1
n 8
length 1
T 1
N 100
u_init constant:0.5
v_init constant:1.0
)");
  const fs::path out = dir / "out";
  REQUIRE(run_cli("sweep tau --config " + (dir / "cfg.txt").string() + " --out " +
                  out.string() + " --levels 1e-2,5e-3,2.5e-3") == 0);
  auto cols = read_csv(out / "sweep.csv");
  REQUIRE(cols.at("ode_error").size() == 3);
  for (size_t r = 1; r < 3; ++r) {
    const double ratio = std::stod(cols.at("ode_error_ratio")[r]);
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
  fs::remove_all(dir);
}
