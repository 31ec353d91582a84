#pragma once
// Plain-text exports: CSV tables, SVG interval strips and Graphviz DOT.

#include <string>
#include <vector>

#include "cantor/graphcover.hpp"
#include "cantor/interval_embed.hpp"
#include "cantor/metric_systems.hpp"

namespace cantor {

/// depth,max_ratio_num,max_ratio_den,bound,float_approx
std::string ratio_csv(const std::vector<RatioReport>& rows);

/// eps,n,count,estimate (the last column is a float).
std::string entropy_csv(const std::vector<EntropyRow>& rows);

/// One horizontal strip per level: A cells outlined, D cells filled.
/// Coordinates are rounded to doubles, so the picture is approximate.
std::string scheme_svg(const EmbeddingScheme& scheme, std::size_t levels);

/// Level n of a tower as a digraph; for n > 0 each vertex is labelled
/// with its image under the cover map to level n - 1.
std::string level_dot(const CoverSequence& seq, std::size_t n);

}  // namespace cantor
