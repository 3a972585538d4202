#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(WYFLOW_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(WYFLOW_TEST_TMP) / ("cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("run zero_flat_constant converges at step 0 and writes every artifact") {
    const fs::path dir = scratch("zero");
    const Outcome o = cli("run --scenario zero_flat_constant --out " + dir.string());
    CHECK(o.code == 0);
    for (const char* f : {"trace.csv", "summary.json", "w_final.csv", "R_final.csv", "config.ini"})
      CHECK(fs::exists(dir / f));
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["converged"] == true);
    CHECK(j["steps"] == 0);
    CHECK(j["case"] == "zero");
  }

  TEST_CASE("run positive_cap converges") {
    const fs::path dir = scratch("cap");
    CHECK(cli("run --scenario positive_cap --out " + dir.string()).code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "summary.json"))["converged"] == true);
  }

  TEST_CASE("truncated run exits 2") {
    const fs::path dir = scratch("trunc");
    CHECK(cli("run --max-steps 1 --scenario positive_cap_perturbed --out " + dir.string()).code == 2);
  }

  TEST_CASE("json format") {
    const fs::path dir = scratch("json");
    CHECK(cli("run --scenario zero_flat_constant --format json --out " + dir.string()).code == 0);
    CHECK(fs::exists(dir / "trace.json"));
    CHECK(fs::exists(dir / "w_final.json"));
    CHECK(cli("run --scenario zero_flat_constant --format xml --out " + dir.string()).code == 1);
  }

  TEST_CASE("identical config and seed reproduce trace and summary") {
    const fs::path a = scratch("rep_a"), b = scratch("rep_b");
    CHECK(cli("run --scenario negative_weighted --seed 3 --out " + a.string()).code == 0);
    CHECK(cli("run --scenario negative_weighted --seed 3 --out " + b.string()).code == 0);
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
    CHECK(slurp(a / "w_final.csv") == slurp(b / "w_final.csv"));
    auto ja = nlohmann::json::parse(slurp(a / "summary.json"));
    auto jb = nlohmann::json::parse(slurp(b / "summary.json"));
    ja.erase("wall_time_seconds");
    jb.erase("wall_time_seconds");
    CHECK(ja.dump() == jb.dump());
  }

  TEST_CASE("resolved config reproduces the run") {
    const fs::path a = scratch("echo_a"), b = scratch("echo_b");
    CHECK(cli("run --scenario zero_flat_perturbed --dt 2e-6 --max-steps 50 --out " + a.string()).code == 2);
    CHECK(cli("run --config " + (a / "config.ini").string() + " --out " + b.string()).code == 2);
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  }

  TEST_CASE("classify") {
    CHECK(cli("classify --scenario zero_flat_constant").out.rfind("zero", 0) == 0);
    CHECK(cli("classify --scenario positive_cap").out.rfind("positive", 0) == 0);
    const Outcome o = cli("classify --scenario negative_weighted");
    CHECK(o.code == 0);
    CHECK(o.out.rfind("negative", 0) == 0);
  }

  TEST_CASE("spectrum") {
    const fs::path dir = scratch("spec");
    const Outcome o = cli("spectrum --scenario zero_flat_constant --k 4 --mesh 1024 --out " + dir.string());
    CHECK(o.code == 0);
    CHECK(fs::exists(dir / "spectrum.csv"));
    CHECK(fs::exists(dir / "mode_3.csv"));
    const Outcome big = cli("spectrum --scenario zero_flat_constant --k 100000 --out " + dir.string());
    CHECK(big.code == 1);
    CHECK(big.out.find("error") != std::string::npos);
  }

  TEST_CASE("verify") {
    const fs::path dir = scratch("verify");
    const Outcome ok = cli("verify --scenario zero_flat_perturbed --out " + dir.string());
    CHECK(ok.code == 0);
    CHECK(fs::exists(dir / "verify_report.json"));
    CHECK(fs::exists(dir / "refinement_direct_curvature.csv"));
    std::ofstream(dir / "corrupt.ini") << "[scenario]\nname = zero_flat_perturbed\n[verify]\nsuites = direct_curvature\n"
                                          "order_min = 100\n";
    CHECK(cli("verify --config " + (dir / "corrupt.ini").string() + " --out " + dir.string()).code == 1);
    std::ofstream(dir / "empty.ini") << "[scenario]\nname = zero_flat_perturbed\n[verify]\nsuites =\n";
    CHECK(cli("verify --config " + (dir / "empty.ini").string() + " --out " + dir.string()).code == 1);
    CHECK(cli("verify").code == 1);
  }

  TEST_CASE("bad input exits 1") {
    const fs::path dir = scratch("bad");
    std::ofstream(dir / "c.ini") << "[flow]\nwarp_speed = 9\n";
    const Outcome o = cli("run --config " + (dir / "c.ini").string() + " --out " + dir.string());
    CHECK(o.code == 1);
    CHECK(o.out.find("warp_speed") != std::string::npos);
    CHECK(cli("run --scenario unknown_case").code == 1);
    CHECK(cli("").code == 1);
  }
}
