#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rdaocp/output.hpp"

namespace {

using namespace rdaocp;
using json = nlohmann::json;

enum ExitCode { kOk = 0, kOther = 1, kValidation = 2, kSolver = 3, kPgd = 4, kIo = 5 };

struct CliConfig {
  std::string example = "ex1";
  int m = 1;
  std::string n = "8,16,32";
  std::string hu = "equal";
  double mu = 0.0;
  double rho = 0.0;
  double tol_u = 1e-10;
  int max_iter = 500;
  std::string out;
  std::string vtk;
  double cap = 2.0;
  bool variational = false;
  std::string jprime = "barycenter";
  bool verbose = false;
};

std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw InvalidArgument("--n: '" + item + "' is not an integer");
    }
    if (pos != item.size() || v < 2) throw InvalidArgument("--n: entries must be integers >= 2");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw InvalidArgument("--n: empty mesh list");
  return out;
}

// Reads the JSON config; keys match the long flag names. Flags given on the command line win.
void apply_config_file(const std::string& path, CliConfig& cfg, const CLI::App& app) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config '" + path + "': top level must be an object");
  const auto given = [&app](const std::string& flag) {
    const CLI::Option* opt = app.get_option_no_throw("--" + flag);
    return opt != nullptr && opt->count() > 0;
  };
  for (const auto& [key, value] : j.items()) {
    try {
      if (given(key)) continue;
      if (key == "example") cfg.example = value.get<std::string>();
      else if (key == "m") cfg.m = value.get<int>();
      else if (key == "n") {
        if (value.is_array()) {
          std::string s;
          for (const auto& v : value) s += (s.empty() ? "" : ",") + std::to_string(v.get<long long>());
          cfg.n = s;
        } else if (value.is_number_integer()) {
          cfg.n = std::to_string(value.get<long long>());
        } else {
          cfg.n = value.get<std::string>();
        }
      } else if (key == "hu") cfg.hu = value.get<std::string>();
      else if (key == "mu") cfg.mu = value.get<double>();
      else if (key == "rho") cfg.rho = value.get<double>();
      else if (key == "tol-u") cfg.tol_u = value.get<double>();
      else if (key == "max-iter") cfg.max_iter = value.get<int>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "vtk") cfg.vtk = value.get<std::string>();
      else if (key == "cap") cfg.cap = value.get<double>();
      else if (key == "variational") cfg.variational = value.get<bool>();
      else if (key == "jprime") cfg.jprime = value.get<std::string>();
      else if (key == "verbose") cfg.verbose = value.get<bool>();
      else
        throw InvalidArgument("unknown key");
    } catch (const json::exception& e) {
      throw InvalidArgument("config '" + path + "', field '" + key + "': " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("config '" + path + "', field '" + key + "': " + e.what());
    }
  }
}

StudyConfig to_study(const CliConfig& c) {
  if (c.mu < 0.0) throw InvalidArgument("--mu must be positive");
  StudyConfig s;
  s.example = parse_example(c.example);
  s.m = c.m;
  s.n_list = parse_n_list(c.n);
  s.hu = c.variational ? HuRule::Variational : parse_hu_rule(c.hu);
  s.mu = c.mu;
  s.rho = c.rho;
  s.tol_u = c.tol_u;
  s.max_iter = c.max_iter;
  s.cap = c.cap;
  if (c.jprime == "barycenter") s.j_prime_eval = JPrimeEval::Barycenter;
  else if (c.jprime == "mean") s.j_prime_eval = JPrimeEval::ElementMean;
  else throw InvalidArgument("--jprime must be 'barycenter' or 'mean'");
  s.validate();
  return s;
}

std::string with_suffix(const std::string& path, std::size_t n, std::size_t count,
                        const std::string& tag = "") {
  std::string stem = path;
  std::string ext = ".vtk";
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".vtk") stem.resize(stem.size() - 4);
  if (!tag.empty()) stem += "_" + tag;
  if (count > 1) stem += "_n" + std::to_string(n);
  return stem + ext;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!std::cout) throw IoError("failed to write to stdout");
  } else {
    write_file(path, text);
  }
}

int cmd_solve(const StudyConfig& cfg, const CliConfig& cli) {
  for (const std::size_t n : cfg.n_list) {
    const RunResult res = run_instance(cfg, n);
    const Instance& inst = res.instance;
    const OcpSolution& sol = res.solution;
    const StudyRow& r = res.row;
    std::printf("example %s  m=%d  n=%zu  h_u rule=%s", to_string(cfg.example).c_str(), cfg.m, n,
                to_string(cfg.hu).c_str());
    if (r.n_u) std::printf("  n_u=%zu", r.n_u);
    std::printf("\n  pgd: %s after %d iterations (rho=%g, restarts=%d)\n",
                sol.converged ? "converged" : "stopped", sol.iterations, sol.rho, sol.restarts);
    std::printf("  ||u-u_h||=%s  ||y-y_h||=%s  ||p-p_h||=%s\n", format_number(r.err_u).c_str(),
                format_number(r.err_y).c_str(), format_number(r.err_p).c_str());
    std::printf("  |||y-y_h|||=%s  |||p-p_h|||=%s\n", format_number(r.dg_y).c_str(),
                format_number(r.dg_p).c_str());
    if (!std::isnan(r.err_rec)) std::printf("  ||u-R_h u_h||=%s\n", format_number(r.err_rec).c_str());
    std::printf("  kkt violation=%s\n",
                format_number(kkt_violation(*inst.disc, sol.u.values, sol.p)).c_str());
    if (inst.spec.admissible.kind == AdmissibleKind::IntegralLowerBound) {
      const double integral = inst.space->integral(sol.u.values);
      const bool ok = integral >= inst.spec.admissible.lower - 1e-10;
      std::printf("  integral of u_h = %s (>= %g: %s)\n", format_number(integral).c_str(),
                  inst.spec.admissible.lower, ok ? "yes" : "no");
    }
    std::printf("  wall time %.3f s\n", r.wall_time);
    if (!cli.vtk.empty()) {
      write_state_vtk(with_suffix(cli.vtk, n, cfg.n_list.size()), sol);
      if (inst.control)
        write_control_vtk(with_suffix(cli.vtk, n, cfg.n_list.size(), "control"), *inst.control,
                          {{"u_h", sol.u.values}});
    }
  }
  return kOk;
}

int cmd_study(const StudyConfig& cfg, const CliConfig& cli) {
  const auto rows = run_convergence_study(cfg, [&](const RunResult& r) {
    if (cli.verbose)
      std::fprintf(stderr, "n=%zu: %d iterations, %.3f s\n", r.row.n, r.row.iterations,
                   r.row.wall_time);
  });
  std::ostringstream os;
  write_study_csv(os, rows, study_metadata(cfg));
  emit(cli.out, os.str());
  return kOk;
}

int cmd_estimate(const StudyConfig& cfg, const CliConfig& cli) {
  const auto rows = run_estimator_study(
      cfg, [&](const RunResult& r, const IndicatorReport& rep, const EffectivityReport& eff) {
        if (cli.verbose)
          std::fprintf(stderr, "n=%zu: %d iterations, %.3f s\n", r.row.n, r.row.iterations,
                       r.row.wall_time);
        if (cli.vtk.empty()) return;
        const std::size_t count = cfg.n_list.size();
        write_state_vtk(with_suffix(cli.vtk, r.row.n, count), r.solution,
                        {{"eta1_y", rep.eta1_y}, {"eta1_p", rep.eta1_p}, {"e_Ky", eff.e_y},
                         {"e_Kp", eff.e_p}});
        Vector labels = Vector::Zero(static_cast<Eigen::Index>(r.instance.control->num_elements()));
        for (std::size_t c = 0; c < rep.control.labels.size(); ++c)
          labels(static_cast<Eigen::Index>(c)) = static_cast<double>(rep.control.labels[c]);
        write_control_vtk(with_suffix(cli.vtk, r.row.n, count, "control"), *r.instance.control,
                          {{"u_h", r.solution.u.values},
                           {"e_Ku_capped", clip(eff.e_u, cfg.cap)},
                           {"eta0", rep.control.eta0_elements.cwiseSqrt()},
                           {"active_label", labels}});
      });
  std::ostringstream os;
  Metadata meta = study_metadata(cfg);
  meta.emplace_back("cap", format_number(cfg.cap));
  write_estimator_csv(os, rows, meta);
  emit(cli.out, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstructed discontinuous approximation solver for elliptic optimal control"};
  app.require_subcommand(1, 1);
  CliConfig cli;
  std::string config_path;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with option values (flags override)");
    sub->add_option("--example", cli.example, "ex1, ex2 or ex3");
    sub->add_option("--m", cli.m, "polynomial degree");
    sub->add_option("--n", cli.n, "comma separated grid resolutions, h = 1/n");
    sub->add_option("--hu", cli.hu, "control mesh rule: equal, quad, cubic or variational");
    sub->add_option("--mu", cli.mu, "penalty parameter (default 3 m^2)");
    sub->add_option("--rho", cli.rho, "gradient step size (default per example)");
    sub->add_option("--tol-u", cli.tol_u, "stopping tolerance on ||u_{n+1} - u_n||");
    sub->add_option("--max-iter", cli.max_iter, "iteration limit");
    sub->add_option("--out", cli.out, "CSV output path (default stdout)");
    sub->add_option("--vtk", cli.vtk, "VTK output path prefix");
    sub->add_option("--cap", cli.cap, "clip value for e_Ku fields");
    sub->add_flag("--variational", cli.variational, "variational discretisation of the control");
    sub->add_option("--jprime", cli.jprime, "j'(u) evaluation: barycenter or mean");
    sub->add_flag("-v,--verbose", cli.verbose, "progress on stderr");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve one problem instance per n");
  CLI::App* study = app.add_subcommand("study", "convergence study, EOC table as CSV");
  CLI::App* estimate = app.add_subcommand("estimate", "effectivity study, CSV plus VTK fields");
  for (CLI::App* sub : {solve, study, estimate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (!config_path.empty()) apply_config_file(config_path, cli, *active);
    if (active->count("--mu") > 0 && !(cli.mu > 0.0))
      throw InvalidArgument("--mu must be positive");
    const StudyConfig cfg = to_study(cli);
    if (active == solve) return cmd_solve(cfg, cli);
    if (active == study) return cmd_study(cfg, cli);
    return cmd_estimate(cfg, cli);
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const ConvergenceError& e) {
    std::cerr << "iteration failed: " << e.what() << '\n';
    return kPgd;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const ReconstructionError& e) {
    std::cerr << "reconstruction error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
