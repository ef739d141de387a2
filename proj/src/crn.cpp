#include "bwcrn/crn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bwcrn {

const char* kind_name(SpeciesKind k) {
  switch (k) {
    case SpeciesKind::Pi: return "pi";
    case SpeciesKind::Alpha: return "alpha";
    case SpeciesKind::Beta: return "beta";
    case SpeciesKind::Gamma: return "gamma";
    case SpeciesKind::Xi: return "xi";
    case SpeciesKind::Theta: return "theta";
    case SpeciesKind::Psi: return "psi";
    case SpeciesKind::E: return "E";
  }
  return "?";
}

std::string Species::name() const {
  std::string s = kind_name(kind);
  for (std::size_t i = 0; i < n_idx; ++i) s += "_" + std::to_string(idx[i] + 1);
  return s;
}

const char* family_name(Family f) {
  switch (f) {
    case Family::ForwardInit: return "forward-init";
    case Family::ForwardRecursion: return "forward-recursion";
    case Family::Backward: return "backward";
    case Family::GammaStep: return "gamma";
    case Family::XiStep: return "xi";
    case Family::MaximizationTheta: return "m-theta";
    case Family::MaximizationPsi: return "m-psi";
  }
  return "?";
}

std::size_t ReactionNetwork::add_species(SpeciesKind kind,
                                         std::initializer_list<std::size_t> idx) {
  Species s;
  s.id = species.size();
  s.kind = kind;
  s.n_idx = idx.size();
  std::size_t i = 0;
  for (std::size_t v : idx) s.idx[i++] = v;
  species.push_back(s);
  return s.id;
}

namespace {

std::map<std::size_t, long> stoich_map(const std::vector<Term>& terms) {
  std::map<std::size_t, long> m;
  for (const Term& t : terms) m[t.species] += static_cast<long>(t.coef);
  return m;
}

}  // namespace

bool ReactionNetwork::add_reaction(std::vector<Term> reactants, std::vector<Term> products,
                                   std::size_t rate_key, Family family) {
  auto rm = stoich_map(reactants);
  auto pm = stoich_map(products);
  if (rm == pm) return false;  // null reaction

  Reaction r;
  r.reactants = std::move(reactants);
  r.products = std::move(products);
  r.rate_key = rate_key;
  r.family = family;

  std::size_t n_from = 0, n_to = 0;
  for (const auto& [sp, c] : rm) {
    long net = c - (pm.count(sp) ? pm[sp] : 0);
    if (net > 0) {
      if (net != 1) throw std::invalid_argument("reaction is not a monomolecular transformation");
      r.from = sp;
      ++n_from;
    }
  }
  for (const auto& [sp, c] : pm) {
    long net = c - (rm.count(sp) ? rm[sp] : 0);
    if (net > 0) {
      if (net != 1) throw std::invalid_argument("reaction is not a monomolecular transformation");
      r.to = sp;
      ++n_to;
    }
  }
  if (n_from != 1 || n_to != 1)
    throw std::invalid_argument("reaction must transform exactly one species into another");

  reactions.push_back(std::move(r));
  return true;
}

std::string ReactionNetwork::export_text(const std::vector<double>& rates) const {
  std::ostringstream out;
  auto side = [&](const std::vector<Term>& terms) {
    std::string s;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i) s += " + ";
      s += std::to_string(terms[i].coef) + " " + species[terms[i].species].name();
    }
    return s;
  };
  for (const Reaction& r : reactions) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", rates[r.rate_key]);
    out << side(r.reactants) << " -> " << side(r.products)
        << " ; rate_key=k_" << petals[r.rate_key].key << " rate=" << buf
        << " ; family=" << family_name(r.family) << "\n";
  }
  return out.str();
}

void RateAssignment::validate() const {
  for (double r : rates)
    if (!(r > 0.0)) throw std::invalid_argument("petal rates must be positive");
}

Concentration mass_action_rhs(const ReactionNetwork& net, const RateAssignment& rates,
                              const Concentration& x) {
  if (x.size() != net.species.size())
    throw std::invalid_argument("concentration vector size does not match species count");
  if (rates.rates.size() != net.petals.size())
    throw std::invalid_argument("rate assignment size does not match petal count");

  Concentration dx(x.size(), 0.0);
  for (const Reaction& r : net.reactions) {
    double flux = rates.rates[r.rate_key];
    for (const Term& t : r.reactants)
      for (std::size_t c = 0; c < t.coef; ++c) flux *= x[t.species];
    dx[r.from] -= flux;
    dx[r.to] += flux;
  }
  return dx;
}

std::vector<double> conserved_sums(const ReactionNetwork& net, const Concentration& x) {
  std::vector<double> sums(net.flowers.size(), 0.0);
  for (const Flower& f : net.flowers)
    for (std::size_t sp : f.members) sums[f.id] += x[sp];
  return sums;
}

PositivityReport is_positive(const Concentration& x, double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  PositivityReport rep;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > eps)) {
      rep.positive = false;
      rep.near_zero.push_back(i);
    }
  return rep;
}

}  // namespace bwcrn
