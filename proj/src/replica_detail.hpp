#pragma once

#include <optional>
#include <vector>

#include "pepslab/replica.hpp"

namespace pepslab::detail {

// All of S_size in lexicographic order, so index == permutation_rank.
std::vector<Permutation> all_permutations(std::size_t size);

// Boundary permutation on `site`, or nullptr off the top row.
const Permutation* site_boundary(const ReplicaParams& p, const BoundaryPerms& b, Variant v, std::size_t site);

// h C(e, g) + J C(b, g) for every g of `group`.
std::vector<double> site_log_field(const ReplicaParams& p, const BoundaryPerms& b, Variant v, std::size_t site,
                                   const std::vector<Permutation>& group);

// Flop estimate of the character route, or nullopt when it does not apply.
std::optional<double> character_cost(const ReplicaParams& p);
double character_log_partition(const ReplicaParams& p, Variant v);

}  // namespace pepslab::detail
