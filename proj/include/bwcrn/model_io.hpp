#ifndef BWCRN_MODEL_IO_HPP
#define BWCRN_MODEL_IO_HPP

#include <string>
#include <utility>

#include "bwcrn/hmm.hpp"

namespace bwcrn {

// Model file schema (JSON object, no other fields allowed):
//   hidden_states  : list of strings
//   visible_states : list of strings
//   pi             : list of reals, one per hidden state
//   theta          : list of rows (|H| x |H|)
//   psi            : list of rows (|H| x |V|)
//   sequence       : list of visible-state names
// Throws std::invalid_argument with a field diagnostic on any violation.
std::pair<Hmm, ObservationSequence> parse_model_file(const std::string& path);
std::pair<Hmm, ObservationSequence> parse_model_text(const std::string& text,
                                                     const std::string& origin);

std::string model_to_json(const Hmm& hmm, const ObservationSequence& obs);

// Writes via a temp file in the same directory followed by a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace bwcrn

#endif
