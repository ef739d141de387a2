#include "bwcrn/hmm.hpp"

#include <cmath>
#include <cstdio>

namespace bwcrn {

void StochasticMap::validate(const std::string& what) const {
  for (std::size_t r = 0; r < rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols(); ++c) {
      double v = entries(r, c);
      if (v < 0.0)
        throw std::invalid_argument(what + " row " + std::to_string(r + 1) +
                                    " has a negative entry");
      s += v;
    }
    if (std::fabs(s - 1.0) > ROW_SUM_TOL)
      throw std::invalid_argument(what + " row " + std::to_string(r + 1) +
                                  " sums to " + std::to_string(s) + ", expected 1");
  }
}

void Hmm::validate() const {
  if (hidden_states.empty() || visible_states.empty())
    throw std::invalid_argument("model needs at least one hidden and one visible state");
  if (pi.size() != n_hidden())
    throw std::invalid_argument("pi length does not match hidden state count");
  double s = 0.0;
  for (double v : pi) {
    if (v < 0.0) throw std::invalid_argument("pi has a negative entry");
    s += v;
  }
  if (std::fabs(s - 1.0) > StochasticMap::ROW_SUM_TOL)
    throw std::invalid_argument("pi sums to " + std::to_string(s) + ", expected 1");
  if (theta.rows() != n_hidden() || theta.cols() != n_hidden())
    throw std::invalid_argument("theta must be |H| x |H|");
  if (psi.rows() != n_hidden() || psi.cols() != n_visible())
    throw std::invalid_argument("psi must be |H| x |V|");
  theta.validate("theta");
  psi.validate("psi");
}

void ObservationSequence::validate(const Hmm& hmm) const {
  if (symbols.size() < 2)
    throw std::invalid_argument("observation sequence must have length >= 2");
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] >= hmm.n_visible())
      throw std::invalid_argument("observation at position " + std::to_string(i + 1) +
                                  " is not a valid visible state");
}

namespace {

double normalize_row(double* row, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += row[i];
  if (s > 0.0)
    for (std::size_t i = 0; i < n; ++i) row[i] /= s;
  return s;
}

}  // namespace

ForwardResult forward(const Hmm& hmm, const ObservationSequence& obs) {
  hmm.validate();
  obs.validate(hmm);
  const std::size_t L = obs.length(), H = hmm.n_hidden();
  ForwardResult res;
  res.values = Mat(L, H);
  res.log_scales.resize(L);

  for (std::size_t h = 0; h < H; ++h)
    res.values(0, h) = hmm.pi[h] * hmm.psi(h, obs.symbols[0]);
  double s = normalize_row(res.values.row(0), H);
  if (s <= 0.0) throw std::runtime_error("model assigns zero likelihood to the sequence");
  res.log_scales[0] = std::log(s);

  for (std::size_t l = 1; l < L; ++l) {
    for (std::size_t h = 0; h < H; ++h) {
      double acc = 0.0;
      for (std::size_t g = 0; g < H; ++g)
        acc += res.values(l - 1, g) * hmm.theta(g, h);
      res.values(l, h) = acc * hmm.psi(h, obs.symbols[l]);
    }
    s = normalize_row(res.values.row(l), H);
    if (s <= 0.0) throw std::runtime_error("model assigns zero likelihood to the sequence");
    res.log_scales[l] = std::log(s);
  }
  return res;
}

BackwardResult backward(const Hmm& hmm, const ObservationSequence& obs) {
  hmm.validate();
  obs.validate(hmm);
  const std::size_t L = obs.length(), H = hmm.n_hidden();
  BackwardResult res;
  res.values = Mat(L, H);
  res.log_scales.assign(L, 0.0);

  for (std::size_t h = 0; h < H; ++h) res.values(L - 1, h) = 1.0;
  double s = normalize_row(res.values.row(L - 1), H);
  res.log_scales[L - 1] = std::log(s);

  for (std::size_t l = L - 1; l-- > 0;) {
    for (std::size_t h = 0; h < H; ++h) {
      double acc = 0.0;
      for (std::size_t g = 0; g < H; ++g)
        acc += hmm.theta(h, g) * hmm.psi(g, obs.symbols[l + 1]) * res.values(l + 1, g);
      res.values(l, h) = acc;
    }
    s = normalize_row(res.values.row(l), H);
    if (s <= 0.0) throw std::runtime_error("model assigns zero likelihood to the sequence");
    res.log_scales[l] = std::log(s);
  }
  return res;
}

Posteriors e_step(const Hmm& hmm, const ObservationSequence& obs) {
  const std::size_t L = obs.length(), H = hmm.n_hidden();
  ForwardResult fwd = forward(hmm, obs);
  BackwardResult bwd = backward(hmm, obs);

  Posteriors post;
  post.alpha = fwd.values;
  post.beta = bwd.values;
  post.log_likelihood = fwd.log_likelihood();
  post.gamma = Mat(L, H);
  post.xi.assign(L - 1, Mat(H, H));

  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t h = 0; h < H; ++h)
      post.gamma(l, h) = fwd.values(l, h) * bwd.values(l, h);
    double s = normalize_row(post.gamma.row(l), H);
    if (s <= 0.0)
      throw std::runtime_error("degenerate likelihood at position " + std::to_string(l + 1));
  }

  for (std::size_t l = 0; l + 1 < L; ++l) {
    Mat& slice = post.xi[l];
    double total = 0.0;
    for (std::size_t g = 0; g < H; ++g)
      for (std::size_t h = 0; h < H; ++h) {
        double v = fwd.values(l, g) * hmm.theta(g, h) *
                   hmm.psi(h, obs.symbols[l + 1]) * bwd.values(l + 1, h);
        slice(g, h) = v;
        total += v;
      }
    if (total <= 0.0)
      throw std::runtime_error("degenerate likelihood at position " + std::to_string(l + 1));
    for (double& v : slice.data) v /= total;
  }
  return post;
}

void m_step(const Posteriors& post, const ObservationSequence& obs,
            const Hmm& current, StochasticMap& theta_out, StochasticMap& psi_out) {
  const std::size_t L = obs.length(), H = current.n_hidden(), V = current.n_visible();
  theta_out.entries = Mat(H, H);
  psi_out.entries = Mat(H, V);

  for (std::size_t g = 0; g < H; ++g) {
    double den = 0.0;
    for (std::size_t l = 0; l + 1 < L; ++l)
      for (std::size_t h = 0; h < H; ++h) den += post.xi[l](g, h);
    if (den > 0.0) {
      for (std::size_t h = 0; h < H; ++h) {
        double num = 0.0;
        for (std::size_t l = 0; l + 1 < L; ++l) num += post.xi[l](g, h);
        theta_out.entries(g, h) = num / den;
      }
    } else {
      for (std::size_t h = 0; h < H; ++h) theta_out.entries(g, h) = current.theta(g, h);
    }
  }

  for (std::size_t h = 0; h < H; ++h) {
    double den = 0.0;
    for (std::size_t l = 0; l < L; ++l) den += post.gamma(l, h);
    if (den > 0.0) {
      for (std::size_t w = 0; w < V; ++w) {
        double num = 0.0;
        for (std::size_t l = 0; l < L; ++l)
          if (obs.symbols[l] == w) num += post.gamma(l, h);
        psi_out.entries(h, w) = num / den;
      }
    } else {
      for (std::size_t w = 0; w < V; ++w) psi_out.entries(h, w) = current.psi(h, w);
    }
  }
}

BaumWelchResult baum_welch(const Hmm& hmm, const ObservationSequence& obs,
                           double tol, std::size_t max_iters) {
  if (tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  Hmm model = hmm;
  BaumWelchResult res;
  res.theta = model.theta;
  res.psi = model.psi;

  for (std::size_t it = 0; it < max_iters; ++it) {
    Posteriors post = e_step(model, obs);
    res.log_likelihood_trace.push_back(post.log_likelihood);
    StochasticMap theta_new, psi_new;
    m_step(post, obs, model, theta_new, psi_new);

    double delta = 0.0;
    for (std::size_t i = 0; i < theta_new.entries.data.size(); ++i)
      delta = std::max(delta, std::fabs(theta_new.entries.data[i] - model.theta.entries.data[i]));
    for (std::size_t i = 0; i < psi_new.entries.data.size(); ++i)
      delta = std::max(delta, std::fabs(psi_new.entries.data[i] - model.psi.entries.data[i]));

    model.theta = theta_new;
    model.psi = psi_new;
    res.theta = theta_new;
    res.psi = psi_new;
    res.iterations = it + 1;
    if (delta < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double oracle_likelihood(const Hmm& hmm, const ObservationSequence& obs) {
  hmm.validate();
  obs.validate(hmm);
  const std::size_t L = obs.length(), H = hmm.n_hidden();
  double paths = std::pow(static_cast<double>(H), static_cast<double>(L));
  if (paths > 1e6)
    throw std::invalid_argument("path enumeration guard exceeded: |H|^L > 1e6");

  std::vector<std::size_t> path(L, 0);
  double total = 0.0;
  while (true) {
    double p = hmm.pi[path[0]] * hmm.psi(path[0], obs.symbols[0]);
    for (std::size_t l = 1; l < L && p > 0.0; ++l)
      p *= hmm.theta(path[l - 1], path[l]) * hmm.psi(path[l], obs.symbols[l]);
    total += p;

    std::size_t pos = 0;
    while (pos < L && ++path[pos] == H) path[pos++] = 0;
    if (pos == L) break;
  }
  return total;
}

}  // namespace bwcrn
