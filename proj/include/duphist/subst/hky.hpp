#pragma once

#include <array>
#include <string>
#include <string_view>

#include "duphist/model/params.hpp"

namespace duphist {

using Matrix4 = std::array<std::array<double, 4>, 4>;

// Closed-form HKY transition probabilities; t in expected substitutions per site.
Matrix4 hky_transition(const HkyParams& params, double t);

// 0..3 for A,C,G,T (case-insensitive), -1 for anything else (treated as missing).
int nucleotide_code(char c);
char nucleotide_char(int code);
std::string reverse_complement(std::string_view s);

}  // namespace duphist
