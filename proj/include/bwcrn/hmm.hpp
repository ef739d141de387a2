#ifndef BWCRN_HMM_HPP
#define BWCRN_HMM_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwcrn/matrix.hpp"

namespace bwcrn {

// Row-stochastic matrix: nonnegative entries, each row summing to 1
// within ROW_SUM_TOL.
struct StochasticMap {
  Mat entries;

  static constexpr double ROW_SUM_TOL = 1e-12;

  std::size_t rows() const { return entries.rows; }
  std::size_t cols() const { return entries.cols; }
  double operator()(std::size_t r, std::size_t c) const { return entries(r, c); }

  // Throws std::invalid_argument naming the offending row.
  void validate(const std::string& what) const;
};

struct Hmm {
  std::vector<std::string> hidden_states;
  std::vector<std::string> visible_states;
  std::vector<double> pi;
  StochasticMap theta;  // |H| x |H|
  StochasticMap psi;    // |H| x |V|

  std::size_t n_hidden() const { return hidden_states.size(); }
  std::size_t n_visible() const { return visible_states.size(); }

  void validate() const;
};

struct ObservationSequence {
  std::vector<std::size_t> symbols;  // indices into visible_states

  std::size_t length() const { return symbols.size(); }

  void validate(const Hmm& hmm) const;
};

struct Posteriors {
  Mat alpha;                // L x |H|, rescaled per position
  Mat beta;                 // L x |H|, rescaled per position
  Mat gamma;                // L x |H|, rows sum to 1
  std::vector<Mat> xi;      // L-1 slices, each |H| x |H|, slice sums to 1
  double log_likelihood = 0.0;
};

struct ForwardResult {
  Mat values;                       // L x |H|, each row normalized to sum 1
  std::vector<double> log_scales;   // log of the normalizer per position
  double log_likelihood() const {
    double s = 0.0;
    for (double v : log_scales) s += v;
    return s;
  }
};

struct BackwardResult {
  Mat values;                      // L x |H|, each row normalized to sum 1
  std::vector<double> log_scales;
};

struct BaumWelchResult {
  StochasticMap theta;
  StochasticMap psi;
  std::vector<double> log_likelihood_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

ForwardResult forward(const Hmm& hmm, const ObservationSequence& obs);
BackwardResult backward(const Hmm& hmm, const ObservationSequence& obs);

// Throws std::runtime_error if the model assigns zero likelihood to obs.
Posteriors e_step(const Hmm& hmm, const ObservationSequence& obs);

// Rows with zero expected visits keep the corresponding row of the
// current model instead of erroring out.
void m_step(const Posteriors& post, const ObservationSequence& obs,
            const Hmm& current, StochasticMap& theta_out, StochasticMap& psi_out);

BaumWelchResult baum_welch(const Hmm& hmm, const ObservationSequence& obs,
                           double tol, std::size_t max_iters);

// Exact likelihood by summing over all |H|^L hidden paths.
// Throws std::invalid_argument if |H|^L exceeds 1e6.
double oracle_likelihood(const Hmm& hmm, const ObservationSequence& obs);

}  // namespace bwcrn

#endif
