#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bwcrn/analysis.hpp"
#include "bwcrn/compiler.hpp"
#include "bwcrn/crn.hpp"
#include "bwcrn/hmm.hpp"
#include "bwcrn/model_io.hpp"
#include "bwcrn/sim.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int EXIT_OK = 0;
constexpr int EXIT_PARSE = 2;
constexpr int EXIT_NO_CONVERGENCE = 3;
constexpr int EXIT_INTEGRATION = 4;

using nlohmann::json;
namespace fs = std::filesystem;
using namespace bwcrn;

struct CommonOpts {
  std::string input;
  std::string out_dir = "out";
  std::uint64_t seed = 1234;
  double tol = -1.0;  // command-specific default when negative
  bool as_json = false;
  std::size_t h_star = 0;
  std::size_t v_star = 0;
  double t_max = 1e6;
  std::string clamp = "none";
  double checkpoint_dt = 0.0;
  std::size_t max_iters = 100000;
};

json mat_json(const Mat& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

void print_mat(const char* label, const Mat& m) {
  std::printf("%s:\n", label);
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::printf(" ");
    for (std::size_t c = 0; c < m.cols; ++c) std::printf(" %8.4f", m(r, c));
    std::printf("\n");
  }
}

void write_manifest(const CommonOpts& o, const std::string& command,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["input"] = o.input;
  j["out_dir"] = o.out_dir;
  j["seed"] = o.seed;
  j["tol"] = o.tol;
  j["t_max"] = o.t_max;
  j["h_star"] = o.h_star;
  j["v_star"] = o.v_star;
  j["clamp"] = o.clamp;
  j["checkpoint_dt"] = o.checkpoint_dt;
  j["version"] = kVersion;
  j["outputs"] = outputs;
  write_file_atomic((fs::path(o.out_dir) / (command + "_manifest.json")).string(),
                    j.dump(2) + "\n");
}

ClampMode clamp_from_string(const std::string& s) {
  if (s == "none") return ClampMode::None;
  if (s == "em-e") return ClampMode::EStep;
  if (s == "em-m") return ClampMode::MStep;
  throw std::invalid_argument("unknown clamp mode: " + s);
}

int cmd_train(const CommonOpts& o) {
  auto [hmm, obs] = parse_model_file(o.input);
  double tol = o.tol > 0 ? o.tol : 1e-12;
  BaumWelchResult res = baum_welch(hmm, obs, tol, o.max_iters);

  fs::create_directories(o.out_dir);
  std::string trace = "iteration,log_likelihood\n";
  for (std::size_t i = 0; i < res.log_likelihood_trace.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, res.log_likelihood_trace[i]);
    trace += buf;
  }
  std::string trace_path = (fs::path(o.out_dir) / "train_trace.csv").string();
  write_file_atomic(trace_path, trace);

  json j;
  j["theta_hat"] = mat_json(res.theta.entries);
  j["psi_hat"] = mat_json(res.psi.entries);
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["final_log_likelihood"] = res.log_likelihood_trace.back();
  std::string summary_path = (fs::path(o.out_dir) / "train_summary.json").string();
  write_file_atomic(summary_path, j.dump(2) + "\n");
  write_manifest(o, "train", {trace_path, summary_path});

  if (o.as_json) {
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    print_mat("theta_hat", res.theta.entries);
    print_mat("psi_hat", res.psi.entries);
    std::printf("iterations: %zu  log-likelihood: %.10f  converged: %s\n", res.iterations,
                res.log_likelihood_trace.back(), res.converged ? "yes" : "no");
  }
  return res.converged ? EXIT_OK : EXIT_NO_CONVERGENCE;
}

int cmd_compile(const CommonOpts& o) {
  auto [hmm, obs] = parse_model_file(o.input);
  CompilerConfig cc{o.h_star, o.v_star, obs.length()};
  CompiledNetwork cn = compile(hmm.n_hidden(), hmm.n_visible(), cc);
  RateAssignment rates = default_rates(cn.net);

  fs::create_directories(o.out_dir);
  std::string net_path = (fs::path(o.out_dir) / "network.txt").string();
  write_file_atomic(net_path, cn.net.export_text(rates.rates));

  json by_family = json::object();
  for (const Reaction& r : cn.net.reactions) {
    std::string f = family_name(r.family);
    by_family[f] = by_family.value(f, 0) + 1;
  }
  json by_kind = json::object();
  for (const Species& s : cn.net.species) {
    std::string k = kind_name(s.kind);
    by_kind[k] = by_kind.value(k, 0) + 1;
  }
  json j;
  j["species_total"] = cn.net.species.size();
  j["species_by_kind"] = by_kind;
  j["reactions_total"] = cn.net.reactions.size();
  j["reactions_by_family"] = by_family;
  j["petals"] = cn.net.petals.size();
  j["flowers"] = cn.net.flowers.size();
  std::string summary_path = (fs::path(o.out_dir) / "compile_summary.json").string();
  write_file_atomic(summary_path, j.dump(2) + "\n");
  write_manifest(o, "compile", {net_path, summary_path});

  if (o.as_json)
    std::printf("%s\n", j.dump(2).c_str());
  else
    std::printf("%zu species, %zu reactions, %zu petals, %zu flowers\n",
                cn.net.species.size(), cn.net.reactions.size(), cn.net.petals.size(),
                cn.net.flowers.size());
  return EXIT_OK;
}

std::string trajectory_csv(const ReactionNetwork& net, const Trajectory& traj) {
  std::string out = "t";
  for (const Species& s : net.species) out += "," + s.name();
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.times[i]);
    out += buf;
    for (double v : traj.states[i]) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

double max_conservation_drift(const ReactionNetwork& net, const Trajectory& traj) {
  if (traj.states.empty()) return 0.0;
  std::vector<double> first = conserved_sums(net, traj.states.front());
  double drift = 0.0;
  for (const Concentration& st : traj.states) {
    std::vector<double> s = conserved_sums(net, st);
    for (std::size_t i = 0; i < s.size(); ++i)
      drift = std::max(drift, std::fabs(s[i] - first[i]));
  }
  return drift;
}

int cmd_simulate(const CommonOpts& o) {
  auto [hmm, obs] = parse_model_file(o.input);
  CompilerConfig cc{o.h_star, o.v_star, obs.length()};
  CompiledNetwork cn = compile(hmm.n_hidden(), hmm.n_visible(), cc);
  RateAssignment rates = default_rates(cn.net);
  Concentration x0 = initial_concentrations(cn.layout, hmm, obs, o.seed);

  SimConfig cfg;
  cfg.t_max = o.t_max;
  cfg.convergence_tol = o.tol > 0 ? o.tol : 1e-7;
  cfg.checkpoint_interval = o.checkpoint_dt;
  cfg.clamp = clamp_from_string(o.clamp);

  Trajectory traj = simulate(cn.net, rates, x0, cfg);
  const Concentration& xf = traj.states.back();
  Readout ro = readout(cn.net, cn.layout, xf);
  FixedPointReport rep = check_fixed_point(hmm, obs, cn, rates, xf);

  fs::create_directories(o.out_dir);
  std::string traj_path = (fs::path(o.out_dir) / "trajectory.csv").string();
  write_file_atomic(traj_path, trajectory_csv(cn.net, traj));

  json j;
  j["converged"] = traj.converged;
  j["t_end"] = traj.t_end;
  j["final_rhs_norm"] = traj.final_rhs_norm;
  j["steps_accepted"] = traj.steps_accepted;
  j["steps_rejected"] = traj.steps_rejected;
  j["theta_hat"] = mat_json(ro.theta_hat);
  j["psi_hat"] = mat_json(ro.psi_hat);
  j["boundary"] = ro.boundary;
  j["boundary_species"] = ro.boundary_species;
  j["classification"] = classification_name(rep.classification);
  j["crn_rhs_norm"] = rep.crn_rhs_norm;
  json fam;
  for (std::size_t i = 0; i < 7; ++i) fam[kFamilyLabels[i]] = rep.family_residuals[i];
  j["fixed_point_residuals"] = fam;
  j["undefined_families"] = rep.undefined_families;
  j["conservation_max_drift"] = max_conservation_drift(cn.net, traj);

  if (cfg.clamp != ClampMode::None && traj.converged && traj.times.size() >= 3) {
    RateFit fit = fit_convergence_rate(traj, xf);
    json jf;
    jf["rate"] = fit.rate;
    jf["r_squared"] = fit.r_squared;
    jf["points_used"] = fit.points_used;
    jf["window_shrunk"] = fit.window_shrunk;
    j["rate_fit"] = jf;

    double slowest = -std::numeric_limits<double>::infinity();
    for (const Flower& f : cn.net.flowers) {
      bool moving = false;
      for (std::size_t sp : f.members) {
        SpeciesKind k = cn.net.species[sp].kind;
        bool clamped = (cfg.clamp == ClampMode::EStep &&
                        (k == SpeciesKind::Theta || k == SpeciesKind::Psi)) ||
                       (cfg.clamp == ClampMode::MStep &&
                        (k == SpeciesKind::Alpha || k == SpeciesKind::Beta ||
                         k == SpeciesKind::Gamma || k == SpeciesKind::Xi));
        moving = !clamped;
        break;
      }
      if (!moving || f.members.size() < 2) continue;
      MonomolecularSystem sys = extract_monomolecular(cn.net, rates, xf, f.id);
      slowest = std::max(slowest, spectral_abscissa(sys));
    }
    j["slowest_flower_abscissa"] = slowest;
  }

  std::string summary_path = (fs::path(o.out_dir) / "sim_summary.json").string();
  write_file_atomic(summary_path, j.dump(2) + "\n");
  write_manifest(o, "simulate", {traj_path, summary_path});

  if (o.as_json) {
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    print_mat("theta_hat", ro.theta_hat);
    print_mat("psi_hat", ro.psi_hat);
    std::printf("converged: %s  t_end: %.6g  rhs_norm: %.3g  classification: %s%s\n",
                traj.converged ? "yes" : "no", traj.t_end, traj.final_rhs_norm,
                classification_name(rep.classification),
                ro.boundary ? "  (boundary equilibrium)" : "");
  }
  return traj.converged ? EXIT_OK : EXIT_NO_CONVERGENCE;
}

int cmd_compare(const CommonOpts& o) {
  auto [hmm, obs] = parse_model_file(o.input);
  double tol = o.tol > 0 ? o.tol : 1e-12;
  BaumWelchResult classical = baum_welch(hmm, obs, tol, o.max_iters);

  SimConfig cfg;
  cfg.t_max = o.t_max;
  ChemicalRunResult chem = run_chemical_baum_welch(hmm, obs, cfg, o.seed, o.h_star, o.v_star);

  double dtheta = 0.0, dpsi = 0.0;
  for (std::size_t i = 0; i < chem.theta_hat.data.size(); ++i)
    dtheta = std::max(dtheta, std::fabs(chem.theta_hat.data[i] - classical.theta.entries.data[i]));
  for (std::size_t i = 0; i < chem.psi_hat.data.size(); ++i)
    dpsi = std::max(dpsi, std::fabs(chem.psi_hat.data[i] - classical.psi.entries.data[i]));

  json j;
  j["classical"] = {{"theta_hat", mat_json(classical.theta.entries)},
                    {"psi_hat", mat_json(classical.psi.entries)},
                    {"iterations", classical.iterations},
                    {"converged", classical.converged}};
  j["chemical"] = {{"theta_hat", mat_json(chem.theta_hat)},
                   {"psi_hat", mat_json(chem.psi_hat)},
                   {"converged", chem.traj.converged},
                   {"t_end", chem.traj.t_end},
                   {"boundary", chem.final_readout.boundary},
                   {"positive_equilibrium", chem.positive_equilibrium},
                   {"bw_residual", chem.bw_residual}};
  j["max_abs_diff_theta"] = dtheta;
  j["max_abs_diff_psi"] = dpsi;

  fs::create_directories(o.out_dir);
  std::string path = (fs::path(o.out_dir) / "compare.json").string();
  write_file_atomic(path, j.dump(2) + "\n");
  write_manifest(o, "compare", {path});

  if (o.as_json) {
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    print_mat("classical theta_hat", classical.theta.entries);
    print_mat("chemical  theta_hat", chem.theta_hat);
    print_mat("classical psi_hat", classical.psi.entries);
    print_mat("chemical  psi_hat", chem.psi_hat);
    std::printf("max |diff| theta: %.6f  psi: %.6f  chemical equilibrium: %s\n", dtheta, dpsi,
                chem.positive_equilibrium ? "positive" : "boundary");
  }
  return classical.converged && chem.traj.converged ? EXIT_OK : EXIT_NO_CONVERGENCE;
}

int cmd_spectrum(const CommonOpts& o) {
  auto [hmm, obs] = parse_model_file(o.input);
  CompilerConfig cc{o.h_star, o.v_star, obs.length()};
  CompiledNetwork cn = compile(hmm.n_hidden(), hmm.n_visible(), cc);
  RateAssignment rates = default_rates(cn.net);
  Concentration x0 = initial_concentrations(cn.layout, hmm, obs, o.seed);

  json flowers = json::array();
  for (const Flower& f : cn.net.flowers) {
    if (f.members.size() < 2) continue;
    MonomolecularSystem sys = extract_monomolecular(cn.net, rates, x0, f.id);
    json jf;
    jf["flower"] = f.id;
    jf["center"] = cn.net.species[f.center_species].name();
    jf["strongly_connected"] = sys.strongly_connected;
    json evs = json::array();
    double absc = -std::numeric_limits<double>::infinity();
    for (const auto& ev : reduced_spectrum(sys)) {
      evs.push_back({ev.real(), ev.imag()});
      absc = std::max(absc, ev.real());
    }
    jf["reduced_eigenvalues"] = evs;
    jf["spectral_abscissa"] = absc;
    flowers.push_back(jf);
  }
  json j;
  j["flowers"] = flowers;

  fs::create_directories(o.out_dir);
  std::string path = (fs::path(o.out_dir) / "spectrum.json").string();
  write_file_atomic(path, j.dump(2) + "\n");
  write_manifest(o, "spectrum", {path});
  std::printf("%s\n", o.as_json ? j.dump(2).c_str()
                                : ("wrote " + path).c_str());
  return EXIT_OK;
}

int cmd_oracle(const CommonOpts& o) {
  auto [hmm, obs] = parse_model_file(o.input);
  double oracle = oracle_likelihood(hmm, obs);
  double fwd = std::exp(forward(hmm, obs).log_likelihood());
  double rel = oracle != 0.0 ? std::fabs(oracle - fwd) / oracle : std::fabs(fwd);

  json j;
  j["oracle_likelihood"] = oracle;
  j["forward_likelihood"] = fwd;
  j["relative_difference"] = rel;

  fs::create_directories(o.out_dir);
  std::string path = (fs::path(o.out_dir) / "oracle.json").string();
  write_file_atomic(path, j.dump(2) + "\n");
  write_manifest(o, "oracle", {path});
  std::printf("%s\n", j.dump(2).c_str());
  return EXIT_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Baum-Welch reaction network toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string command;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "HMM model file (JSON)")->required();
    sub->add_option("--out-dir", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--tol", o.tol, "tolerance (command-specific default)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--json", o.as_json, "print machine-readable output");
  };

  CLI::App* train = app.add_subcommand("train", "classical Baum-Welch training");
  add_common(train);
  train->add_option("--max-iters", o.max_iters, "iteration cap");

  CLI::App* comp = app.add_subcommand("compile", "emit the reaction network");
  add_common(comp);
  comp->add_option("--h-star", o.h_star, "leader hidden state index (0-based)");
  comp->add_option("--v-star", o.v_star, "leader visible state index (0-based)");

  CLI::App* sim = app.add_subcommand("simulate", "integrate the reaction system");
  add_common(sim);
  sim->add_option("--h-star", o.h_star, "leader hidden state index (0-based)");
  sim->add_option("--v-star", o.v_star, "leader visible state index (0-based)");
  sim->add_option("--t-max", o.t_max, "time horizon");
  sim->add_option("--clamp", o.clamp, "clamp mode: none, em-e, em-m")
      ->check(CLI::IsMember({"none", "em-e", "em-m"}));
  sim->add_option("--checkpoint-dt", o.checkpoint_dt, "checkpoint spacing (0 = adaptive)");

  CLI::App* cmp = app.add_subcommand("compare", "classical vs chemical side by side");
  add_common(cmp);
  cmp->add_option("--h-star", o.h_star, "leader hidden state index (0-based)");
  cmp->add_option("--v-star", o.v_star, "leader visible state index (0-based)");
  cmp->add_option("--t-max", o.t_max, "time horizon");
  cmp->add_option("--max-iters", o.max_iters, "classical iteration cap");

  CLI::App* spec = app.add_subcommand("spectrum", "per-flower reduced spectra");
  add_common(spec);
  spec->add_option("--h-star", o.h_star, "leader hidden state index (0-based)");
  spec->add_option("--v-star", o.v_star, "leader visible state index (0-based)");

  CLI::App* orc = app.add_subcommand("oracle", "brute-force likelihood check");
  add_common(orc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? EXIT_OK : EXIT_PARSE;
  }

  try {
    if (train->parsed()) return cmd_train(o);
    if (comp->parsed()) return cmd_compile(o);
    if (sim->parsed()) return cmd_simulate(o);
    if (cmp->parsed()) return cmd_compare(o);
    if (spec->parsed()) return cmd_spectrum(o);
    if (orc->parsed()) return cmd_oracle(o);
  } catch (const IntegrationFailure& e) {
    std::fprintf(stderr, "integration failure: %s\n", e.what());
    return EXIT_INTEGRATION;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return EXIT_PARSE;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return EXIT_NO_CONVERGENCE;
  }
  return EXIT_OK;
}
