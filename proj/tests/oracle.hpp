#pragma once

#include <set>
#include <string>
#include <vector>

#include "hgp/model.hpp"
#include "hgp/solution.hpp"

namespace oracle {

/// Canonical forms of every solution, by exhaustive bottom-up enumeration of
/// instance trees over `occurrences`, constraint filtering, absorption of
/// trees that reappear inside other trees, and maximal leaf-disjoint forests.
std::set<std::string> solutions(const hgp::Model& model, const std::vector<hgp::Occurrence>& occurrences,
                                const std::vector<std::string>& roots);

/// Canonical forms of all instance trees of the root units (before merging).
std::set<std::string> trees(const hgp::Model& model, const std::vector<hgp::Occurrence>& occurrences,
                            const std::vector<std::string>& roots);

}  // namespace oracle
