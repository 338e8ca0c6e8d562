#ifndef CHARGEOPT_MPS_HPP
#define CHARGEOPT_MPS_HPP

#include <string>

#include "chargeopt/model.hpp"

namespace chargeopt {

// Renders a problem in column-aligned MPS text. Bracketed names become
// underscore-separated (x[3] -> x_3, v[31,11,2] -> v_31_11_2) and name fields
// are widened past the classic 8 characters so those identifiers fit.
std::string to_mps(const MipProblem& problem, const std::string& name = "CHARGEOPT");

// Parses MPS text (whitespace-tolerant fields, INTORG/INTEND markers,
// OBJSENSE). Minimization input is negated so the result is always a
// maximization problem; a file produced by to_mps round-trips exactly.
MipProblem from_mps(const std::string& text);

void save_mps(const MipProblem& problem, const std::string& path);
MipProblem load_mps(const std::string& path);

} // namespace chargeopt

#endif
