#include "bwcrn/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bwcrn {

namespace {

using nlohmann::json;

std::vector<std::string> string_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(field + " must be a non-empty list of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string())
      throw std::invalid_argument(field + " must contain only strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<double> real_list(const json& j, const std::string& field) {
  if (!j.is_array())
    throw std::invalid_argument(field + " must be a list of reals");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number())
      throw std::invalid_argument(field + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Mat matrix_field(const json& j, const std::string& field,
                 std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows)
    throw std::invalid_argument(field + " must have " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> row = real_list(j[r], field + " row " + std::to_string(r + 1));
    if (row.size() != cols)
      throw std::invalid_argument(field + " row " + std::to_string(r + 1) + " must have " +
                                  std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

}  // namespace

std::pair<Hmm, ObservationSequence> parse_model_text(const std::string& text,
                                                     const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(origin + ": top level must be an object");

  static const std::set<std::string> known = {
      "hidden_states", "visible_states", "pi", "theta", "psi", "sequence"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw std::invalid_argument(origin + ": unknown field '" + item.key() + "'");
  for (const auto& k : known)
    if (!j.contains(k))
      throw std::invalid_argument(origin + ": missing field '" + k + "'");

  Hmm hmm;
  hmm.hidden_states = string_list(j["hidden_states"], "hidden_states");
  hmm.visible_states = string_list(j["visible_states"], "visible_states");
  std::size_t H = hmm.hidden_states.size(), V = hmm.visible_states.size();
  hmm.pi = real_list(j["pi"], "pi");
  hmm.theta.entries = matrix_field(j["theta"], "theta", H, H);
  hmm.psi.entries = matrix_field(j["psi"], "psi", H, V);
  hmm.validate();

  ObservationSequence obs;
  std::vector<std::string> seq = string_list(j["sequence"], "sequence");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::size_t w = 0;
    while (w < V && hmm.visible_states[w] != seq[i]) ++w;
    if (w == V)
      throw std::invalid_argument("sequence position " + std::to_string(i + 1) +
                                  ": unknown visible state '" + seq[i] + "'");
    obs.symbols.push_back(w);
  }
  obs.validate(hmm);
  return {hmm, obs};
}

std::pair<Hmm, ObservationSequence> parse_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_text(ss.str(), path);
}

std::string model_to_json(const Hmm& hmm, const ObservationSequence& obs) {
  json j;
  j["hidden_states"] = hmm.hidden_states;
  j["visible_states"] = hmm.visible_states;
  j["pi"] = hmm.pi;
  json theta = json::array(), psi = json::array();
  for (std::size_t r = 0; r < hmm.theta.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < hmm.theta.cols(); ++c) row.push_back(hmm.theta(r, c));
    theta.push_back(row);
  }
  for (std::size_t r = 0; r < hmm.psi.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < hmm.psi.cols(); ++c) row.push_back(hmm.psi(r, c));
    psi.push_back(row);
  }
  j["theta"] = theta;
  j["psi"] = psi;
  json seq = json::array();
  for (std::size_t s : obs.symbols) seq.push_back(hmm.visible_states[s]);
  j["sequence"] = seq;
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace bwcrn
