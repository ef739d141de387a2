#ifndef BWCRN_ANALYSIS_HPP
#define BWCRN_ANALYSIS_HPP

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bwcrn/compiler.hpp"
#include "bwcrn/crn.hpp"
#include "bwcrn/hmm.hpp"
#include "bwcrn/sim.hpp"

namespace bwcrn {

enum class FixedPointClass { BothFixed, CrnOnly, BwOnly, Neither };

const char* classification_name(FixedPointClass c);

// Equation families, in order: alpha-init, alpha-recursion, beta-recursion,
// gamma, xi, theta, psi. Residuals are normalized by the flower total of the
// species being checked, so they are invariant under per-flower rescaling.
// A family whose update has an identically zero denominator is reported
// saturated at 1.
struct FixedPointReport {
  std::array<double, 7> family_residuals{};
  double bw_residual = 0.0;
  double crn_rhs_norm = 0.0;  // max-norm of the rhs, scaled per flower total
  bool positive = false;      // every flower member > eps_rel * flower total
  FixedPointClass classification = FixedPointClass::Neither;
  std::vector<std::string> undefined_families;
};

extern const char* const kFamilyLabels[7];

FixedPointReport check_fixed_point(const Hmm& hmm, const ObservationSequence& obs,
                                   const CompiledNetwork& cn, const RateAssignment& rates,
                                   const Concentration& x, double bw_tol = 1e-6,
                                   double rhs_tol = 1e-7, double eps_rel = 1e-6);

// Embeds a converged classical solution as a concentration vector:
// posterior gamma/xi as they are, scaled alpha/beta rows, parameters and
// E pattern in place.
Concentration embed_classical_state(const Hmm& hmm_at_fixed_point,
                                    const ObservationSequence& obs,
                                    const SpeciesLayout& lay);

// Linear abstraction xdot = A x of one flower at a state: each reaction
// contributes its petal rate times the product of its catalyst
// concentrations, entering A with column = source species.
struct MonomolecularSystem {
  Eigen::MatrixXd A;       // n x n, zero column sums
  Eigen::MatrixXd Wprime;  // r x (n - r); the full kernel matrix is (W' I_r)
  std::size_t n = 0;
  std::size_t r = 0;
  std::vector<std::size_t> species_ids;  // network ids, conserved block last
  bool strongly_connected = false;
};

MonomolecularSystem extract_monomolecular(const ReactionNetwork& net,
                                          const RateAssignment& rates,
                                          const Concentration& x, std::size_t flower_id);

// Eigenvalues of C = A11 - A12 W'. Throws if (W' I_r) is not a left kernel
// of A within 1e-12 of the largest rate magnitude.
std::vector<std::complex<double>> reduced_spectrum(const MonomolecularSystem& sys);

// max Re over the reduced spectrum (negative for a strongly connected flower).
double spectral_abscissa(const MonomolecularSystem& sys);

struct RateFit {
  double rate = 0.0;  // magnitude of the fitted slope of log distance
  double intercept = 0.0;
  double r_squared = 0.0;
  bool window_shrunk = false;
  std::size_t points_used = 0;
};

// Least-squares line through (t, log ||x(t) - reference||) over the given
// fraction window of the time span. Distances under 1e-13 of the reference
// scale are dropped with a warning flag.
RateFit fit_convergence_rate(const Trajectory& traj, const Concentration& reference,
                             double window_lo = 0.2, double window_hi = 0.8);

}  // namespace bwcrn

#endif
