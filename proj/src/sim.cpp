#include "bwcrn/sim.hpp"

#include <algorithm>
#include <cmath>

#include "bwcrn/analysis.hpp"

namespace bwcrn {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct System {
  const ReactionNetwork& net;
  std::vector<const Reaction*> active;
  std::vector<std::size_t> free_ids;     // species integrated
  std::vector<double> flower_scale;      // per species: flower total at t=0, else 1
  std::vector<std::string> names;

  void rhs(const RateAssignment& rates, const Concentration& x, Concentration& dx) const {
    std::fill(dx.begin(), dx.end(), 0.0);
    for (const Reaction* r : active) {
      double flux = rates.rates[r->rate_key];
      for (const Term& t : r->reactants)
        for (std::size_t c = 0; c < t.coef; ++c) flux *= x[t.species];
      dx[r->from] -= flux;
      dx[r->to] += flux;
    }
  }

  double scaled_norm(const Concentration& dx) const {
    double m = 0.0;
    for (std::size_t id : free_ids) m = std::max(m, std::fabs(dx[id]) / flower_scale[id]);
    return m;
  }
};

System prepare(const ReactionNetwork& net, const Concentration& x0, ClampMode clamp) {
  System sys{net, {}, {}, {}, {}};
  const std::size_t n = net.species.size();

  std::vector<bool> transformed(n, false);
  for (const Reaction& r : net.reactions) {
    transformed[r.from] = true;
    transformed[r.to] = true;
  }

  auto clamped_kind = [&](SpeciesKind k) {
    if (k == SpeciesKind::E) return true;
    if (clamp == ClampMode::EStep) return k == SpeciesKind::Theta || k == SpeciesKind::Psi;
    if (clamp == ClampMode::MStep)
      return k == SpeciesKind::Alpha || k == SpeciesKind::Beta ||
             k == SpeciesKind::Gamma || k == SpeciesKind::Xi;
    return false;
  };

  std::vector<bool> constant(n, false);
  for (std::size_t i = 0; i < n; ++i)
    constant[i] = !transformed[i] || clamped_kind(net.species[i].kind);

  for (const Reaction& r : net.reactions) {
    bool dead = false;
    for (const Term& t : r.reactants)
      if (constant[t.species] && x0[t.species] == 0.0) dead = true;
    if (!dead && !constant[r.from]) sys.active.push_back(&r);
  }

  sys.flower_scale.assign(n, 1.0);
  for (const Flower& f : net.flowers) {
    double total = 0.0;
    for (std::size_t sp : f.members) total += x0[sp];
    if (total > 0.0)
      for (std::size_t sp : f.members) sys.flower_scale[sp] = total;
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!constant[i]) sys.free_ids.push_back(i);

  sys.names.resize(n);
  for (std::size_t i = 0; i < n; ++i) sys.names[i] = net.species[i].name();
  return sys;
}

}  // namespace

Trajectory simulate(const ReactionNetwork& net, const RateAssignment& rates,
                    const Concentration& x0, const SimConfig& cfg) {
  if (x0.size() != net.species.size())
    throw std::invalid_argument("initial state size does not match species count");
  for (std::size_t i = 0; i < x0.size(); ++i)
    if (x0[i] < 0.0)
      throw std::invalid_argument("negative initial concentration for " + net.species[i].name());
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) || !(cfg.t_max > 0.0))
    throw std::invalid_argument("tolerances and t_max must be positive");
  rates.validate();

  System sys = prepare(net, x0, cfg.clamp);
  const std::size_t n = x0.size();

  Trajectory traj;
  Concentration y = x0, ynew(n), yst(n), err(n, 0.0);
  Concentration k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

  std::size_t record_stride = 1, steps_since_record = 0;
  auto record = [&](double t, const Concentration& state) {
    traj.times.push_back(t);
    traj.states.push_back(state);
    if (cfg.checkpoint_interval <= 0.0 && traj.times.size() >= 8192) {
      std::vector<double> ts;
      std::vector<Concentration> ss;
      for (std::size_t i = 0; i < traj.times.size(); i += 2) {
        ts.push_back(traj.times[i]);
        ss.push_back(std::move(traj.states[i]));
      }
      traj.times = std::move(ts);
      traj.states = std::move(ss);
      record_stride *= 2;
    }
  };

  double t = 0.0;
  sys.rhs(rates, y, k1);
  record(0.0, y);

  double norm0 = sys.scaled_norm(k1);
  if (norm0 < cfg.convergence_tol) {
    traj.converged = true;
    traj.t_end = 0.0;
    traj.final_rhs_norm = norm0;
    return traj;
  }

  // Initial step from the ratio of state to slope, kept conservative.
  double ynorm = 0.0, fnorm = 0.0;
  for (std::size_t id : sys.free_ids) {
    ynorm = std::max(ynorm, std::fabs(y[id]));
    fnorm = std::max(fnorm, std::fabs(k1[id]));
  }
  double dt = 0.01 * (ynorm > 0 ? ynorm : 1.0) / (fnorm > 0 ? fnorm : 1.0);
  dt = std::clamp(dt, 1e-8, 1.0);

  double next_checkpoint = cfg.checkpoint_interval;
  const std::size_t nfree = sys.free_ids.size();

  while (t < cfg.t_max) {
    dt = std::min(dt, cfg.t_max - t);

    auto stage = [&](Concentration& out, std::initializer_list<std::pair<const Concentration*, double>> terms) {
      for (std::size_t id : sys.free_ids) {
        double acc = y[id];
        for (const auto& [k, a] : terms) acc += dt * a * (*k)[id];
        out[id] = acc;
      }
    };

    yst = y;
    stage(yst, {{&k1, a21}});
    sys.rhs(rates, yst, k2);
    stage(yst, {{&k1, a31}, {&k2, a32}});
    sys.rhs(rates, yst, k3);
    stage(yst, {{&k1, a41}, {&k2, a42}, {&k3, a43}});
    sys.rhs(rates, yst, k4);
    stage(yst, {{&k1, a51}, {&k2, a52}, {&k3, a53}, {&k4, a54}});
    sys.rhs(rates, yst, k5);
    stage(yst, {{&k1, a61}, {&k2, a62}, {&k3, a63}, {&k4, a64}, {&k5, a65}});
    sys.rhs(rates, yst, k6);

    ynew = y;
    for (std::size_t id : sys.free_ids)
      ynew[id] = y[id] + dt * (b1 * k1[id] + b3 * k3[id] + b4 * k4[id] + b5 * k5[id] + b6 * k6[id]);
    sys.rhs(rates, ynew, k7);

    double err_norm = 0.0;
    for (std::size_t id : sys.free_ids) {
      double e = dt * (e1 * k1[id] + e3 * k3[id] + e4 * k4[id] + e5 * k5[id] +
                       e6 * k6[id] + e7 * k7[id]);
      double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y[id]), std::fabs(ynew[id]));
      err_norm += (e / sc) * (e / sc);
    }
    err_norm = std::sqrt(err_norm / (nfree > 0 ? nfree : 1));

    bool negative = false;
    std::size_t neg_id = 0;
    for (std::size_t id : sys.free_ids)
      if (ynew[id] < 0.0) {
        negative = true;
        neg_id = id;
        break;
      }

    if (negative || err_norm > 1.0) {
      ++traj.steps_rejected;
      double shrink = negative ? 0.5 : std::max(0.1, 0.9 * std::pow(err_norm, -0.2));
      dt *= shrink;
      if (dt < 1e-14 * std::max(1.0, t)) {
        std::size_t worst = negative ? neg_id : sys.free_ids[0];
        if (!negative) {
          double wmax = 0.0;
          for (std::size_t id : sys.free_ids) {
            double e = std::fabs(dt * (e1 * k1[id] + e3 * k3[id] + e4 * k4[id] +
                                       e5 * k5[id] + e6 * k6[id] + e7 * k7[id]));
            double sc = cfg.abs_tol + cfg.rel_tol * std::fabs(y[id]);
            if (e / sc > wmax) {
              wmax = e / sc;
              worst = id;
            }
          }
        }
        throw IntegrationFailure("step size underflow near t=" + std::to_string(t) +
                                     " driven by species " + sys.names[worst],
                                 sys.names[worst]);
      }
      continue;
    }

    double tnew = t + dt;
    ++traj.steps_accepted;

    if (cfg.checkpoint_interval > 0.0) {
      while (next_checkpoint <= tnew + 1e-12 * std::max(1.0, tnew)) {
        double th = (next_checkpoint - t) / dt;
        double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
        double h10 = th * (1 - th) * (1 - th);
        double h01 = th * th * (3 - 2 * th);
        double h11 = th * th * (th - 1);
        Concentration yc = y;
        for (std::size_t id : sys.free_ids) {
          double v = h00 * y[id] + h10 * dt * k1[id] + h01 * ynew[id] + h11 * dt * k7[id];
          yc[id] = std::max(0.0, v);
        }
        record(next_checkpoint, yc);
        next_checkpoint += cfg.checkpoint_interval;
      }
    } else if (++steps_since_record >= record_stride) {
      steps_since_record = 0;
      record(tnew, ynew);
    }

    y.swap(ynew);
    k1.swap(k7);  // first-same-as-last
    t = tnew;

    double rhs_norm = sys.scaled_norm(k1);
    if (rhs_norm < cfg.convergence_tol) {
      traj.converged = true;
      traj.final_rhs_norm = rhs_norm;
      break;
    }
    traj.final_rhs_norm = rhs_norm;

    dt *= std::clamp(0.9 * std::pow(std::max(err_norm, 1e-10), -0.2), 0.2, 5.0);
  }

  traj.t_end = t;
  if (traj.times.empty() || traj.times.back() != t) record(t, y);
  return traj;
}

Readout readout(const ReactionNetwork& net, const SpeciesLayout& lay,
                const Concentration& x, double eps_rel) {
  const std::size_t H = lay.H, V = lay.V, L = lay.L;
  Readout out;
  out.theta_hat = Mat(H, H);
  out.psi_hat = Mat(H, V);
  out.gamma_hat = Mat(L, H);
  out.xi_hat.assign(L - 1, Mat(H, H));

  auto normalize = [&](double* dst, const std::vector<std::size_t>& ids) {
    double s = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) s += x[ids[i]];
    for (std::size_t i = 0; i < ids.size(); ++i) dst[i] = s > 0.0 ? x[ids[i]] / s : x[ids[i]];
    return s > 0.0;
  };

  std::vector<std::size_t> ids;
  for (std::size_t g = 0; g < H; ++g) {
    ids.clear();
    for (std::size_t h = 0; h < H; ++h) ids.push_back(lay.theta(g, h));
    out.theta_row_valid.push_back(normalize(out.theta_hat.row(g), ids));
  }
  for (std::size_t h = 0; h < H; ++h) {
    ids.clear();
    for (std::size_t w = 0; w < V; ++w) ids.push_back(lay.psi(h, w));
    out.psi_row_valid.push_back(normalize(out.psi_hat.row(h), ids));
  }
  for (std::size_t l = 0; l < L; ++l) {
    ids.clear();
    for (std::size_t h = 0; h < H; ++h) ids.push_back(lay.gamma(l, h));
    out.gamma_row_valid.push_back(normalize(out.gamma_hat.row(l), ids));
  }
  for (std::size_t l = 0; l + 1 < L; ++l) {
    ids.clear();
    for (std::size_t g = 0; g < H; ++g)
      for (std::size_t h = 0; h < H; ++h) ids.push_back(lay.xi(l, g, h));
    out.xi_slice_valid.push_back(normalize(out.xi_hat[l].data.data(), ids));
  }

  for (const Flower& f : net.flowers) {
    double total = 0.0;
    for (std::size_t sp : f.members) total += x[sp];
    for (std::size_t sp : f.members)
      if (x[sp] <= eps_rel * total) {
        out.boundary = true;
        out.boundary_species.push_back(net.species[sp].name());
      }
  }
  return out;
}

ChemicalRunResult run_chemical_baum_welch(const Hmm& hmm, const ObservationSequence& obs,
                                          const SimConfig& cfg, std::uint64_t seed,
                                          std::size_t h_star, std::size_t v_star) {
  hmm.validate();
  obs.validate(hmm);
  CompilerConfig cc{h_star, v_star, obs.length()};
  CompiledNetwork cn = compile(hmm.n_hidden(), hmm.n_visible(), cc);
  RateAssignment rates = default_rates(cn.net);
  Concentration x0 = initial_concentrations(cn.layout, hmm, obs, seed);

  ChemicalRunResult res;
  res.traj = simulate(cn.net, rates, x0, cfg);
  res.final_state = res.traj.states.back();
  res.final_readout = readout(cn.net, cn.layout, res.final_state);
  res.theta_hat = res.final_readout.theta_hat;
  res.psi_hat = res.final_readout.psi_hat;
  res.positive_equilibrium = !res.final_readout.boundary;

  FixedPointReport rep = check_fixed_point(hmm, obs, cn, rates, res.final_state);
  res.bw_residual = rep.bw_residual;
  return res;
}

}  // namespace bwcrn
