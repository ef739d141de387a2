#ifndef BWCRN_SIM_HPP
#define BWCRN_SIM_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwcrn/compiler.hpp"
#include "bwcrn/crn.hpp"
#include "bwcrn/hmm.hpp"
#include "bwcrn/matrix.hpp"

namespace bwcrn {

enum class ClampMode {
  None,
  EStep,  // theta and psi held fixed; the E-step species evolve
  MStep,  // alpha, beta, gamma, xi held fixed; theta and psi evolve
};

struct SimConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  double t_max = 1e6;
  // Convergence on max over free species of |xdot| / (flower total).
  // The local-error noise floor of the integrator sits near
  // rel_tol times the fastest flower rate, so this must stay above it.
  double convergence_tol = 1e-7;
  // > 0: record at exact multiples via dense interpolation.
  // 0: record every accepted step, thinning to at most ~8192 points.
  double checkpoint_interval = 0.0;
  ClampMode clamp = ClampMode::None;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Concentration> states;
  bool converged = false;
  double t_end = 0.0;
  double final_rhs_norm = 0.0;  // flower-scaled, free species
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
};

class IntegrationFailure : public std::runtime_error {
 public:
  std::string species;
  IntegrationFailure(const std::string& msg, std::string sp)
      : std::runtime_error(msg), species(std::move(sp)) {}
};

// Adaptive embedded Runge-Kutta (order 5(4)). E species are always held
// constant, as are the kinds selected by cfg.clamp. Steps whose error test
// fails or whose candidate state has a negative entry are rejected and
// retried with a smaller step. Throws IntegrationFailure on step underflow.
Trajectory simulate(const ReactionNetwork& net, const RateAssignment& rates,
                    const Concentration& x0, const SimConfig& cfg);

struct Readout {
  Mat theta_hat;             // |H| x |H|, rows normalized by flower total
  Mat psi_hat;               // |H| x |V|
  Mat gamma_hat;             // L x |H|
  std::vector<Mat> xi_hat;   // L-1 slices, |H| x |H|
  std::vector<bool> theta_row_valid, psi_row_valid, gamma_row_valid, xi_slice_valid;
  bool boundary = false;     // some flower member at or below eps of its flower total
  std::vector<std::string> boundary_species;
};

// eps_rel: a flower member counts as boundary when <= eps_rel * flower total.
Readout readout(const ReactionNetwork& net, const SpeciesLayout& lay,
                const Concentration& x, double eps_rel = 1e-6);

struct ChemicalRunResult {
  Mat theta_hat;
  Mat psi_hat;
  Trajectory traj;
  Readout final_readout;
  Concentration final_state;
  bool positive_equilibrium = false;
  double bw_residual = 0.0;  // max residual over the fixed-point equation families
};

// Single-pot run: compile, initialize, integrate to convergence, read out.
ChemicalRunResult run_chemical_baum_welch(const Hmm& hmm, const ObservationSequence& obs,
                                          const SimConfig& cfg, std::uint64_t seed,
                                          std::size_t h_star = 0, std::size_t v_star = 0);

}  // namespace bwcrn

#endif
