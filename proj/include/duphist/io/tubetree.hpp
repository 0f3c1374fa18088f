#pragma once

#include <string>

#include "duphist/core/history.hpp"

namespace duphist {

// DOT graph: one cluster per species-tree node with a row of atoms per state
// along the branch (entry, then after each event), edges following every
// atom lineage between consecutive rows and across speciations.
std::string tube_tree_dot(const History& h);

}  // namespace duphist
