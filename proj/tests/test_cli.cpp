#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(SUBDIFF_CLI_PATH) + " " + args +
                    " >/dev/null 2>/dev/null";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("subdiff-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  REQUIRE(std::getline(in, line).good());
  return line;
}

// Small configuration so the whole suite stays fast; the bundled demo config
// is exercised by the acceptance binary.
fs::path small_config(const fs::path& dir, const std::string& extra = "") {
  json j = {
      {"schema", "subdiff-config-v1"},
      {"alpha", 0.5},
      {"basis_size", 4},
      {"domain", {{"dim", 2}, {"lo", {-0.5, -0.5}}, {"hi", {0.5, 0.5}}}},
      {"unknown", {{"target", "source"}, {"preset", "e1"}}},
      {"g", {{"type", "exponential"}}},
      {"time", {{"T", 100.0}, {"nodes", 400}}},
      {"boundary_order", 6},
      {"probes",
       {{"omega_min", 0.5}, {"omega_max", 2.0}, {"n_omega", 3}, {"n_dir", 4}}},
      {"stability", {{"k", 1}, {"theta", 0.5}, {"c0", 0.05}}},
      {"continuation", {{"s", 3}, {"xi_angle", 0.3}, {"grid", 20}}},
      {"sweep", {{"count", 3}}},
  };
  if (!extra.empty()) {
    json patch = json::parse(extra);
    j.merge_patch(patch);
  }
  fs::path path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

}  // namespace

TEST_CASE("usage errors exit nonzero, malformed configs exit 2") {
  fs::path dir = fresh_dir("errors");
  CHECK(run("") != 0);
  CHECK(run("no-such-command") != 0);

  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run("synthesize --config " + (dir / "broken.json").string() +
            " --out " + dir.string()) == 2);

  std::ofstream(dir / "incomplete.json") << R"({"schema":"subdiff-config-v1"})";
  CHECK(run("synthesize --config " + (dir / "incomplete.json").string() +
            " --out " + dir.string()) == 2);

  std::ofstream(dir / "badschema.json") << R"({"schema":"other"})";
  CHECK(run("synthesize --config " + (dir / "badschema.json").string() +
            " --out " + dir.string()) == 2);

  CHECK(run("synthesize --out " + dir.string()) == 2);  // missing --config

  // Bad values inside an otherwise complete config.
  fs::path bad_alpha = small_config(dir, R"({"alpha": 1.5})");
  CHECK(run("synthesize --config " + bad_alpha.string() + " --out " +
            dir.string()) == 2);
  fs::path bad_preset = small_config(dir, R"({"unknown":{"preset":"zzz"}})");
  CHECK(run("synthesize --config " + bad_preset.string() + " --out " +
            dir.string()) == 2);
}

TEST_CASE("synthesize writes solution and trace artifacts") {
  fs::path dir = fresh_dir("synth");
  fs::path cfg = small_config(dir);
  CHECK(run("synthesize --config " + cfg.string() + " --out " + dir.string() +
            " --threads 2") == 0);
  CHECK(first_line(dir / "solution.csv") == "t,mode_index,coefficient");
  CHECK(first_line(dir / "trace.csv") == "t,boundary_point_id,value");
}

TEST_CASE("certify writes probes, margins, and a passing certificate") {
  fs::path dir = fresh_dir("certify");
  fs::path cfg = small_config(dir);
  CHECK(run("certify --config " + cfg.string() + " --out " + dir.string()) ==
        0);
  CHECK(first_line(dir / "probes.csv") ==
        "omega,xi_id,lhs_re,lhs_im,rhs_re,rhs_im,residual");
  CHECK(first_line(dir / "margin_grid.csv") == "re,im,margin");
  json cert = json::parse(slurp(dir / "certification.json"));
  CHECK(cert["min_margin"].get<double>() >= -1e-12);
  CHECK(cert["max_identity_residual"].get<double>() <= 1e-8);
  CHECK(cert["M"].get<double>() >= 1.0);
  CHECK(cert["m"].get<double>() > 0.0);
}

TEST_CASE("sweep writes the stability table") {
  fs::path dir = fresh_dir("sweep");
  fs::path cfg = small_config(dir);
  CHECK(run("sweep --config " + cfg.string() + " --out " + dir.string() +
            " --threads 2") == 0);
  std::string content = slurp(dir / "sweep.csv");
  CHECK(first_line(dir / "sweep.csv") ==
        "label,l2_norm,hk_norm,epsilon,branch,exponent,ratio");
  CHECK(content.find("e1,") != std::string::npos);
  CHECK(content.find("e3,") != std::string::npos);
}

TEST_CASE("reconstruct recovers the demo source to high accuracy") {
  fs::path dir = fresh_dir("reconstruct");
  fs::path cfg = small_config(dir);
  CHECK(run("reconstruct --config " + cfg.string() + " --out " + dir.string() +
            " --threads 2 --seed 11") == 0);
  CHECK(first_line(dir / "reconstruction.csv") == "mode,lambda,truth,estimate");
  json rep = json::parse(slurp(dir / "reconstruction.json"));
  CHECK(rep["relative_l2_error"].get<double>() <= 0.05);
  CHECK(rep["seed"].get<uint64_t>() == 11);
}

TEST_CASE("reconstruct with noise is seed-deterministic") {
  fs::path a = fresh_dir("noise-a");
  fs::path b = fresh_dir("noise-b");
  fs::path cfg = small_config(a, R"({"noise":{"level":0.01}})");
  CHECK(run("reconstruct --config " + cfg.string() + " --out " + a.string() +
            " --seed 5") == 0);
  CHECK(run("reconstruct --config " + cfg.string() + " --out " + b.string() +
            " --seed 5") == 0);
  CHECK(slurp(a / "reconstruction.csv") == slurp(b / "reconstruction.csv"));
  fs::path c = fresh_dir("noise-c");
  CHECK(run("reconstruct --config " + cfg.string() + " --out " + c.string() +
            " --seed 6") == 0);
  CHECK(slurp(a / "reconstruction.csv") != slurp(c / "reconstruction.csv"));
}

TEST_CASE("ml-table writes the kernel table") {
  fs::path dir = fresh_dir("mltable");
  CHECK(run("ml-table --out " + dir.string()) == 0);
  CHECK(first_line(dir / "ml_table.csv") == "beta1,beta2,tau,value");
}

TEST_CASE("plot-scripts: exit 2 on empty dir, scripts reference real columns") {
  fs::path empty = fresh_dir("plots-empty");
  CHECK(run("plot-scripts --out " + empty.string()) == 2);

  fs::path dir = fresh_dir("plots");
  fs::path cfg = small_config(dir);
  CHECK(run("sweep --config " + cfg.string() + " --out " + dir.string()) == 0);
  CHECK(run("reconstruct --config " + cfg.string() + " --out " +
            dir.string()) == 0);
  CHECK(run("plot-scripts --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "stability_curve.gp"));
  CHECK(fs::exists(dir / "reconstruction_overlay.gp"));
  CHECK(!fs::exists(dir / "margin_heatmap.gp"));  // no margin_grid.csv yet

  // Every quoted column name used in a script must appear in the CSV header.
  auto check_columns = [&](const fs::path& script, const fs::path& csv) {
    std::string text = slurp(script);
    std::string header = "," + first_line(csv) + ",";
    size_t pos = 0;
    int found = 0;
    while ((pos = text.find('"', pos)) != std::string::npos) {
      size_t end = text.find('"', pos + 1);
      REQUIRE(end != std::string::npos);
      std::string col = text.substr(pos + 1, end - pos - 1);
      CHECK(header.find("," + col + ",") != std::string::npos);
      ++found;
      pos = end + 1;
    }
    CHECK(found > 0);
  };
  check_columns(dir / "stability_curve.gp", dir / "sweep.csv");
  check_columns(dir / "reconstruction_overlay.gp", dir / "reconstruction.csv");

  CHECK(run("certify --config " + cfg.string() + " --out " + dir.string()) ==
        0);
  CHECK(run("plot-scripts --out " + dir.string()) == 0);
  check_columns(dir / "margin_heatmap.gp", dir / "margin_grid.csv");
}

TEST_CASE("artifacts are byte-identical across thread counts") {
  fs::path a = fresh_dir("det-a");
  fs::path b = fresh_dir("det-b");
  fs::path cfg = small_config(a);
  for (const std::string& sub : {"synthesize", "sweep"}) {
    CHECK(run(sub + " --config " + cfg.string() + " --out " + a.string() +
              " --threads 1") == 0);
    CHECK(run(sub + " --config " + cfg.string() + " --out " + b.string() +
              " --threads 4") == 0);
  }
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(slurp(a / "solution.csv") == slurp(b / "solution.csv"));
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
}
