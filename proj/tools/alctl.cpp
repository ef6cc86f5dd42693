// alctl: run, audit and validate optimal-control scenarios on almost Lie algebroids.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "alcontrol/io.hpp"
#include "alcontrol/scenarios.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides
{
  std::optional<double> step;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> z0;
};

// A config argument is either a JSON file or the name of a built-in scenario.
alc::ScenarioConfig load(const std::string & arg, const Overrides & o)
{
  alc::ScenarioConfig c;
  if (fs::exists(arg)) {
    c = alc::parse_config(alc::read_file(arg));
  } else {
    c = alc::default_config(arg);
  }
  if (o.step) { c.step = *o.step; }
  if (o.tol) { c.tol = *o.tol; }
  if (o.seed) { c.seed = *o.seed; }
  if (o.z0) { c.z0_mode = *o.z0 == "abnormal" ? alc::Z0Mode::abnormal : alc::Z0Mode::normal; }
  if (!(c.step > 0.0)) { throw alc::ConfigError("--step", "must be positive"); }
  if (!(c.tol > 0.0)) { throw alc::ConfigError("--tol", "must be positive"); }
  return c;
}

std::string stem_of(const std::string & arg)
{
  const fs::path p(arg);
  return p.has_stem() ? p.stem().string() : arg;
}

void write_artifacts(const alc::ScenarioArtifacts & a, const fs::path & dir)
{
  fs::create_directories(dir);
  if (a.trajectory) {
    std::ostringstream ss;
    alc::write_trajectory_csv(ss, *a.trajectory);
    alc::write_file((dir / "trajectory.csv").string(), ss.str());
  }
  if (a.costate) {
    std::ostringstream ss;
    alc::write_costate_csv(ss, *a.costate, a.hamiltonian);
    alc::write_file((dir / "costate.csv").string(), ss.str());
  }
  alc::write_file((dir / "report.json").string(), alc::report_json(a.report) + "\n");
}

void print_report(std::ostream & os, const std::string & label, const alc::ScenarioReport & r)
{
  os << (r.pass() ? "PASS " : "FAIL ") << label << " (" << r.scenario << ", " << r.pipeline << ")\n";
  for (const auto & c : r.checks) {
    os << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << c.value << " (tol " << c.tolerance << ")\n";
  }
  for (const auto & n : r.notes) { os << "  note: " << n << '\n'; }
}

struct RunOutcome
{
  std::string text;
  int status{0};
};

RunOutcome run_one(const std::string & arg, const Overrides & o, const fs::path & out)
{
  RunOutcome r;
  std::ostringstream os;
  try {
    const auto cfg = load(arg, o);
    const auto art = alc::run_scenario(cfg);
    write_artifacts(art, out / stem_of(arg));
    print_report(os, arg, art.report);
    r.status = art.report.pass() ? 0 : 1;
  } catch (const alc::ConfigError & e) {
    os << "ERROR " << arg << ": config " << e.what() << '\n';
    r.status = 2;
  } catch (const std::exception & e) {
    os << "ERROR " << arg << ": " << e.what() << '\n';
    r.status = 1;
  }
  r.text = os.str();
  return r;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Optimal control on almost Lie algebroids"};
  app.require_subcommand(1);

  Overrides o;
  std::string out_dir = "alctl-out";
  auto add_common = [&](CLI::App * sub) {
    sub->add_option("--step", o.step, "Integrator step");
    sub->add_option("--tol", o.tol, "Audit tolerance");
    sub->add_option("--seed", o.seed, "Random seed for sampling");
    sub->add_option("--z0", o.z0, "Multiplier mode")->check(CLI::IsMember({"normal", "abnormal"}));
    sub->add_option("--out", out_dir, "Artifact directory")->capture_default_str();
  };

  std::vector<std::string> configs;
  auto * run = app.add_subcommand("run", "Run one or more scenario configs (files or built-in names)");
  run->add_option("config", configs, "Config files")->required();
  std::size_t jobs = 1;
  run->add_option("-j,--jobs", jobs, "Configs run in parallel")->capture_default_str();
  add_common(run);

  std::string config, traj_csv, costate_csv;
  auto * audit = app.add_subcommand("audit", "Audit a trajectory and costate against a config");
  audit->add_option("config", config, "Config file")->required();
  audit->add_option("--traj", traj_csv, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  audit->add_option("--costate", costate_csv, "Costate CSV")->required()->check(CLI::ExistingFile);
  add_common(audit);

  auto * validate = app.add_subcommand("validate", "Check the algebroid axioms of a config's chart");
  validate->add_option("config", config, "Config file")->required();
  add_common(validate);

  auto * list = app.add_subcommand("list-scenarios", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto & s : alc::list_scenarios()) { std::cout << s.name << "\t" << s.description << '\n'; }
    return 0;
  }

  if (run->parsed()) {
    std::vector<RunOutcome> outcomes(configs.size());
    jobs = std::max<std::size_t>(jobs, 1);
    for (std::size_t start = 0; start < configs.size(); start += jobs) {
      std::vector<std::future<RunOutcome>> batch;
      for (std::size_t i = start; i < std::min(configs.size(), start + jobs); ++i) {
        batch.push_back(std::async(std::launch::async, run_one, configs[i], o, fs::path(out_dir)));
      }
      for (std::size_t i = 0; i < batch.size(); ++i) { outcomes[start + i] = batch[i].get(); }
    }
    int status = 0;
    for (const auto & r : outcomes) {
      std::cout << r.text;
      status = std::max(status, r.status);
    }
    return status;
  }

  try {
    auto cfg = load(config, o);
    if (validate->parsed()) {
      const auto r = alc::validate_scenario(cfg);
      print_report(std::cout, config, r);
      return r.pass() ? 0 : 1;
    }
    cfg.pipeline = alc::Pipeline::audit;
    std::ifstream ts(traj_csv), cs(costate_csv);
    const auto traj = alc::read_trajectory_csv(ts);
    const auto costate = alc::read_costate_csv(cs);
    const auto art = alc::run_scenario(cfg, traj, costate);
    fs::create_directories(out_dir);
    alc::write_file((fs::path(out_dir) / (stem_of(config) + "-audit.json")).string(), alc::report_json(art.report) + "\n");
    print_report(std::cout, config, art.report);
    return art.report.pass() ? 0 : 1;
  } catch (const alc::ConfigError & e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
