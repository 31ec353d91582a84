#pragma once
// Exact maximum clique by branch and bound with greedy colouring bounds.
// Exponential in the worst case; meant for graphs of a few dozen vertices.

#include <cstddef>
#include <vector>

namespace cantor {

/// adjacency[i][j] must be symmetric; the diagonal is ignored.
/// Returns the vertices of one maximum clique in increasing order.
std::vector<std::size_t> max_clique(const std::vector<std::vector<bool>>& adjacency);

}  // namespace cantor
