#include "bwcrn/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace bwcrn {

const char* classification_name(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::BothFixed: return "both-fixed";
    case FixedPointClass::CrnOnly: return "crn-only";
    case FixedPointClass::BwOnly: return "bw-only";
    case FixedPointClass::Neither: return "neither";
  }
  return "?";
}

const char* const kFamilyLabels[7] = {
    "alpha-init", "alpha-recursion", "beta-recursion", "gamma", "xi", "theta", "psi"};

namespace {

// Normalized deviation of values from target proportions: the target for
// entry i is weight_i / sum(weights) of the value total. Returns 1 when the
// weights are degenerate (zero or negative sum).
double proportion_residual(const std::vector<double>& values,
                           const std::vector<double>& weights, bool& undefined) {
  double vsum = 0.0, wsum = 0.0;
  for (double v : values) vsum += v;
  for (double w : weights) wsum += w;
  if (!(vsum > 0.0) || !(wsum > 0.0)) {
    undefined = true;
    return 1.0;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    worst = std::max(worst, std::fabs(values[i] - weights[i] / wsum * vsum) / vsum);
  return worst;
}

}  // namespace

FixedPointReport check_fixed_point(const Hmm& hmm, const ObservationSequence& obs,
                                   const CompiledNetwork& cn, const RateAssignment& rates,
                                   const Concentration& x, double bw_tol, double rhs_tol,
                                   double eps_rel) {
  const SpeciesLayout& lay = cn.layout;
  const std::size_t H = lay.H, V = lay.V, L = lay.L;
  const std::vector<std::size_t>& v = obs.symbols;

  auto a = [&](std::size_t l, std::size_t h) { return x[lay.alpha(l, h)]; };
  auto b = [&](std::size_t l, std::size_t h) { return x[lay.beta(l, h)]; };
  auto c = [&](std::size_t l, std::size_t h) { return x[lay.gamma(l, h)]; };
  auto xiv = [&](std::size_t l, std::size_t g, std::size_t h) { return x[lay.xi(l, g, h)]; };
  auto th = [&](std::size_t g, std::size_t h) { return x[lay.theta(g, h)]; };
  auto ps = [&](std::size_t h, std::size_t w) { return x[lay.psi(h, w)]; };

  FixedPointReport rep;
  std::array<bool, 7> undefined{};

  {
    std::vector<double> vals(H), wts(H);
    for (std::size_t h = 0; h < H; ++h) {
      vals[h] = a(0, h);
      wts[h] = x[lay.pi(h)] * ps(h, v[0]);
    }
    rep.family_residuals[0] = proportion_residual(vals, wts, undefined[0]);
  }

  for (std::size_t l = 1; l < L; ++l) {
    std::vector<double> vals(H), wts(H);
    for (std::size_t h = 0; h < H; ++h) {
      vals[h] = a(l, h);
      double s = 0.0;
      for (std::size_t g = 0; g < H; ++g) s += a(l - 1, g) * th(g, h);
      wts[h] = s * ps(h, v[l]);
    }
    bool u = false;
    rep.family_residuals[1] =
        std::max(rep.family_residuals[1], proportion_residual(vals, wts, u));
    undefined[1] = undefined[1] || u;
  }

  for (std::size_t l = 0; l + 1 < L; ++l) {
    std::vector<double> vals(H), wts(H);
    for (std::size_t h = 0; h < H; ++h) {
      vals[h] = b(l, h);
      double s = 0.0;
      for (std::size_t g = 0; g < H; ++g) s += th(h, g) * ps(g, v[l + 1]) * b(l + 1, g);
      wts[h] = s;
    }
    bool u = false;
    rep.family_residuals[2] =
        std::max(rep.family_residuals[2], proportion_residual(vals, wts, u));
    undefined[2] = undefined[2] || u;
  }

  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> vals(H), wts(H);
    for (std::size_t h = 0; h < H; ++h) {
      vals[h] = c(l, h);
      wts[h] = a(l, h) * b(l, h);
    }
    bool u = false;
    rep.family_residuals[3] =
        std::max(rep.family_residuals[3], proportion_residual(vals, wts, u));
    undefined[3] = undefined[3] || u;
  }

  for (std::size_t l = 0; l + 1 < L; ++l) {
    std::vector<double> vals, wts;
    vals.reserve(H * H);
    wts.reserve(H * H);
    for (std::size_t g = 0; g < H; ++g)
      for (std::size_t h = 0; h < H; ++h) {
        vals.push_back(xiv(l, g, h));
        wts.push_back(a(l, g) * th(g, h) * ps(h, v[l + 1]) * b(l + 1, h));
      }
    bool u = false;
    rep.family_residuals[4] =
        std::max(rep.family_residuals[4], proportion_residual(vals, wts, u));
    undefined[4] = undefined[4] || u;
  }

  for (std::size_t g = 0; g < H; ++g) {
    std::vector<double> vals(H), wts(H);
    for (std::size_t h = 0; h < H; ++h) {
      vals[h] = th(g, h);
      double s = 0.0;
      for (std::size_t l = 0; l + 1 < L; ++l) s += xiv(l, g, h);
      wts[h] = s;
    }
    bool u = false;
    rep.family_residuals[5] =
        std::max(rep.family_residuals[5], proportion_residual(vals, wts, u));
    undefined[5] = undefined[5] || u;
  }

  for (std::size_t h = 0; h < H; ++h) {
    std::vector<double> vals(V), wts(V, 0.0);
    for (std::size_t w = 0; w < V; ++w) vals[w] = ps(h, w);
    for (std::size_t l = 0; l < L; ++l) wts[v[l]] += c(l, h);
    bool u = false;
    rep.family_residuals[6] =
        std::max(rep.family_residuals[6], proportion_residual(vals, wts, u));
    undefined[6] = undefined[6] || u;
  }

  for (std::size_t i = 0; i < 7; ++i) {
    rep.bw_residual = std::max(rep.bw_residual, rep.family_residuals[i]);
    if (undefined[i]) rep.undefined_families.push_back(kFamilyLabels[i]);
  }

  Concentration dx = mass_action_rhs(cn.net, rates, x);
  std::vector<double> scale(dx.size(), 1.0);
  rep.positive = true;
  for (const Flower& f : cn.net.flowers) {
    double total = 0.0;
    for (std::size_t sp : f.members) total += x[sp];
    for (std::size_t sp : f.members) {
      if (total > 0.0) scale[sp] = total;
      if (x[sp] <= eps_rel * total) rep.positive = false;
    }
  }
  for (std::size_t i = 0; i < dx.size(); ++i)
    rep.crn_rhs_norm = std::max(rep.crn_rhs_norm, std::fabs(dx[i]) / scale[i]);

  bool bw_ok = rep.bw_residual < bw_tol;
  bool crn_ok = rep.crn_rhs_norm < rhs_tol;
  rep.classification = bw_ok ? (crn_ok ? FixedPointClass::BothFixed : FixedPointClass::BwOnly)
                             : (crn_ok ? FixedPointClass::CrnOnly : FixedPointClass::Neither);
  return rep;
}

Concentration embed_classical_state(const Hmm& hmm, const ObservationSequence& obs,
                                    const SpeciesLayout& lay) {
  Posteriors post = e_step(hmm, obs);
  Concentration x(lay.total(), 0.0);
  for (std::size_t h = 0; h < lay.H; ++h) x[lay.pi(h)] = hmm.pi[h];
  for (std::size_t l = 0; l < lay.L; ++l)
    for (std::size_t h = 0; h < lay.H; ++h) {
      x[lay.alpha(l, h)] = post.alpha(l, h);
      x[lay.beta(l, h)] = post.beta(l, h);
      x[lay.gamma(l, h)] = post.gamma(l, h);
    }
  for (std::size_t l = 0; l + 1 < lay.L; ++l)
    for (std::size_t g = 0; g < lay.H; ++g)
      for (std::size_t h = 0; h < lay.H; ++h) x[lay.xi(l, g, h)] = post.xi[l](g, h);
  for (std::size_t g = 0; g < lay.H; ++g)
    for (std::size_t h = 0; h < lay.H; ++h) x[lay.theta(g, h)] = hmm.theta(g, h);
  for (std::size_t h = 0; h < lay.H; ++h)
    for (std::size_t w = 0; w < lay.V; ++w) x[lay.psi(h, w)] = hmm.psi(h, w);
  for (std::size_t l = 0; l < lay.L; ++l) x[lay.E(l, obs.symbols[l])] = 1.0;
  return x;
}

MonomolecularSystem extract_monomolecular(const ReactionNetwork& net,
                                          const RateAssignment& rates,
                                          const Concentration& x, std::size_t flower_id) {
  const Flower& f = net.flowers.at(flower_id);
  MonomolecularSystem sys;
  sys.n = f.members.size();
  sys.r = 1;

  // Non-center members first, center last, so the all-ones kernel row ends
  // in the identity block.
  for (std::size_t sp : f.members)
    if (sp != f.center_species) sys.species_ids.push_back(sp);
  sys.species_ids.push_back(f.center_species);

  std::vector<std::size_t> pos(net.species.size(), SIZE_MAX);
  for (std::size_t i = 0; i < sys.species_ids.size(); ++i) pos[sys.species_ids[i]] = i;

  sys.A = Eigen::MatrixXd::Zero(sys.n, sys.n);
  for (std::size_t pid : f.petals)
    for (std::size_t ri : net.petals[pid].reactions) {
      const Reaction& r = net.reactions[ri];
      double k = rates.rates[r.rate_key];
      for (const Term& t : r.reactants) {
        if (t.species == r.from) continue;
        for (std::size_t cc = 0; cc < t.coef; ++cc) k *= x[t.species];
      }
      std::size_t src = pos[r.from], dst = pos[r.to];
      sys.A(dst, src) += k;
      sys.A(src, src) -= k;
    }

  // Strong connectivity under positive rates; flower topology makes this a
  // check that every petal species exchanges with the center both ways.
  sys.strongly_connected = true;
  std::size_t center = sys.n - 1;
  for (std::size_t i = 0; i + 1 < sys.n; ++i)
    if (!(sys.A(center, i) > 0.0) || !(sys.A(i, center) > 0.0))
      sys.strongly_connected = false;
  if (sys.n == 1) sys.strongly_connected = true;

  sys.Wprime = Eigen::MatrixXd::Ones(1, sys.n - 1);
  return sys;
}

std::vector<std::complex<double>> reduced_spectrum(const MonomolecularSystem& sys) {
  const std::size_t n = sys.n, r = sys.r;
  if (r > n) throw std::invalid_argument("kernel rank exceeds dimension");
  Eigen::MatrixXd W(r, n);
  W << sys.Wprime, Eigen::MatrixXd::Identity(r, r);
  double scale = std::max(1.0, sys.A.cwiseAbs().maxCoeff());
  if ((W * sys.A).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("W is not a left kernel of A");

  if (n == r) return {};
  Eigen::MatrixXd C = sys.A.topLeftCorner(n - r, n - r) -
                      sys.A.topRightCorner(n - r, r) * sys.Wprime;
  Eigen::EigenSolver<Eigen::MatrixXd> es(C);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    out.push_back(es.eigenvalues()[i]);
  return out;
}

double spectral_abscissa(const MonomolecularSystem& sys) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& ev : reduced_spectrum(sys)) m = std::max(m, ev.real());
  return m;
}

RateFit fit_convergence_rate(const Trajectory& traj, const Concentration& reference,
                             double window_lo, double window_hi) {
  if (traj.times.size() < 3) throw std::invalid_argument("trajectory too short to fit");
  double t0 = traj.times.front(), t1 = traj.times.back();
  double lo = t0 + window_lo * (t1 - t0), hi = t0 + window_hi * (t1 - t0);

  double ref_scale = 0.0;
  for (double v : reference) ref_scale = std::max(ref_scale, std::fabs(v));
  double floor = 1e-13 * std::max(1.0, ref_scale);

  RateFit fit;
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    double t = traj.times[i];
    if (t < lo || t > hi) continue;
    double d2 = 0.0;
    for (std::size_t j = 0; j < reference.size(); ++j) {
      double d = traj.states[i][j] - reference[j];
      d2 += d * d;
    }
    double dist = std::sqrt(d2);
    if (dist < floor) {
      fit.window_shrunk = true;
      continue;
    }
    ts.push_back(t);
    ys.push_back(std::log(dist));
  }
  if (ts.size() < 3) throw std::invalid_argument("too few usable points in the fit window");

  double n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  double denom = n * stt - st * st;
  if (denom == 0.0) throw std::invalid_argument("degenerate fit window");
  double slope = (n * sty - st * sy) / denom;
  double intercept = (sy - slope * st) / n;

  double ss_res = 0.0, ss_tot = 0.0, ymean = sy / n;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double pred = intercept + slope * ts[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }

  fit.rate = std::fabs(slope);
  fit.intercept = intercept;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.points_used = ts.size();
  return fit;
}

}  // namespace bwcrn
