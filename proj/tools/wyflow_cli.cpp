#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "wyflow/conformal.hpp"
#include "wyflow/io.hpp"
#include "wyflow/scenario.hpp"
#include "wyflow/spectral.hpp"
#include "wyflow/verify.hpp"

namespace fs = std::filesystem;
using namespace wyflow;

namespace {

struct CommonOptions {
  std::optional<std::string> config;
  std::optional<std::string> scenario;
  std::optional<std::string> out;
  std::optional<double> dt;
  std::optional<double> tol;
  std::optional<long> max_steps;
  std::optional<std::size_t> mesh;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Scenario config file ([section] / key = value)");
  cmd->add_option("--scenario", o.scenario, "Preset scenario name");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--dt", o.dt, "Fixed time step (switches the dt policy to fixed)");
  cmd->add_option("--tol", o.tol, "Convergence tolerance on sup|R - r|");
  cmd->add_option("--max-steps", o.max_steps, "Step budget");
  cmd->add_option("--mesh", o.mesh, "Nodes per axis");
  cmd->add_option("--seed", o.seed, "Seed for random test fields");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

ScenarioConfig resolve(const CommonOptions& o) {
  std::optional<fs::path> path;
  if (o.config) path = fs::path(*o.config);
  ScenarioConfig c = load_config(o.scenario, path);
  if (o.out) c.out_dir = *o.out;
  if (o.dt) {
    c.flow.dt = *o.dt;
    c.flow.dt_policy = DtPolicy::Fixed;
  }
  if (o.tol) c.flow.tol_conv = *o.tol;
  if (o.max_steps) c.flow.max_steps = *o.max_steps;
  if (o.mesh) c.mesh = *o.mesh;
  if (o.seed) c.seed = *o.seed;
  if (o.format) c.format = *o.format;
  return c;
}

fs::path prepare_output(const ScenarioConfig& c) {
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  io::write_atomic(dir / "config.ini", to_ini(c));
  return dir;
}

void write_field(const fs::path& dir, const ScenarioConfig& c, const Background& bg, const Field& f,
                 const std::string& stem, const std::string& column) {
  if (c.format == "json")
    io::write_atomic(dir / (stem + ".json"), io::field_json(bg, f, column));
  else
    io::write_atomic(dir / (stem + ".csv"), io::field_csv(bg, f, column));
}

int cmd_run(const ScenarioConfig& c) {
  const Background bg = build_scenario_background(c);
  const fs::path dir = prepare_output(c);
  const auto [result, trace] = run(bg, initial_field(bg, c), c.flow);
  if (c.format == "json")
    io::write_atomic(dir / "trace.json", io::trace_json(trace));
  else
    io::write_atomic(dir / "trace.csv", io::trace_csv(trace));
  io::write_atomic(dir / "summary.json", io::summary_json(result));
  write_field(dir, c, bg, result.w_final, "w_final", "w");
  write_field(dir, c, bg, curvature_from_w(bg, result.w_final), "R_final", "R");
  std::cout << c.name << ": " << (result.converged ? "converged" : "max_steps reached") << " after "
            << result.steps_taken << " steps, r_inf = " << io::format_double(result.r_inf_estimate)
            << ", case = " << case_label_id(result.case_label) << '\n';
  return result.converged ? 0 : 2;
}

int cmd_classify(const ScenarioConfig& c) {
  const Background bg = build_scenario_background(c);
  const Classification cls = classify_sign(bg);
  std::cout << case_label_id(cls.label) << " lambda0=" << io::format_double(cls.lambda0) << '\n';
  return 0;
}

int cmd_spectrum(const ScenarioConfig& c) {
  const Background bg = build_scenario_background(c);
  const LinearizedOperator op = assemble_linearized(bg, initial_field(bg, c));
  const Spectrum spec = eigensolve(op, c.spectrum_k);
  const fs::path dir = prepare_output(c);
  io::write_atomic(dir / "spectrum.csv", io::spectrum_csv(spec));
  for (std::size_t a = 0; a < spec.pairs.size(); ++a)
    write_field(dir, c, bg, spec.pairs[a].psi, "mode_" + std::to_string(a), "psi");
  for (std::size_t a = 0; a < spec.pairs.size(); ++a)
    std::cout << a << ' ' << io::format_double(spec.pairs[a].lambda) << '\n';
  return 0;
}

int cmd_verify(const ScenarioConfig& c) {
  const std::vector<CheckOutcome> outcomes = run_verify(c);
  const fs::path dir = prepare_output(c);
  nlohmann::ordered_json report = nlohmann::ordered_json::array();
  bool all = true;
  for (const CheckOutcome& o : outcomes) {
    for (const auto& [stem, rep] : o.reports) io::write_atomic(dir / (stem + ".csv"), io::refinement_csv(rep));
    report.push_back({{"check", o.name}, {"passed", o.passed}, {"skipped", o.skipped}, {"detail", o.detail}});
    std::cout << (o.skipped ? "SKIP " : o.passed ? "PASS " : "FAIL ") << o.name << ": " << o.detail << '\n';
    all = all && o.passed;
  }
  io::write_atomic(dir / "verify_report.json", report.dump(2) + "\n");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Yamabe flow with boundary: scenario runner and verification harness"};
  app.require_subcommand(1);
  CommonOptions run_opts, classify_opts, spectrum_opts, verify_opts;
  std::optional<std::size_t> k;
  auto* run_cmd = app.add_subcommand("run", "Run the flow and write trace, summary and final fields");
  auto* classify_cmd = app.add_subcommand("classify", "Print the sign of the first eigenvalue of L");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Solve the linearized eigenproblem at the initial field");
  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle suite on the configured scenario");
  add_common(run_cmd, run_opts);
  add_common(classify_cmd, classify_opts);
  add_common(spectrum_cmd, spectrum_opts);
  add_common(verify_cmd, verify_opts);
  spectrum_cmd->add_option("--k", k, "Number of eigenpairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(resolve(run_opts));
    if (*classify_cmd) return cmd_classify(resolve(classify_opts));
    if (*spectrum_cmd) {
      ScenarioConfig c = resolve(spectrum_opts);
      if (k) c.spectrum_k = *k;
      return cmd_spectrum(c);
    }
    if (*verify_cmd) {
      if (!verify_opts.scenario && !verify_opts.config) {
        std::cerr << "verify: no scenario given\n" << verify_cmd->help();
        return 1;
      }
      return cmd_verify(resolve(verify_opts));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
