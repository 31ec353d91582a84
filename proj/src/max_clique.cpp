#include "cantor/max_clique.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

namespace cantor {
namespace {

using Bits = std::vector<std::uint64_t>;

bool empty(const Bits& b) {
  return std::all_of(b.begin(), b.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t lowest(const Bits& b) {
  for (std::size_t w = 0; w < b.size(); ++w)
    if (b[w]) return w * 64 + static_cast<std::size_t>(std::countr_zero(b[w]));
  return b.size() * 64;
}

void reset(Bits& b, std::size_t i) { b[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }

struct Search {
  std::vector<Bits> nbr;
  std::vector<std::size_t> current, best;

  // Sequential greedy colouring of cand; returns vertices in colour order
  // with the colour count reached after each one.
  void colour(Bits cand, std::vector<std::size_t>& order, std::vector<std::size_t>& bound) const {
    std::size_t k = 0;
    while (!empty(cand)) {
      ++k;
      Bits q = cand;
      while (!empty(q)) {
        std::size_t v = lowest(q);
        reset(q, v);
        reset(cand, v);
        for (std::size_t w = 0; w < q.size(); ++w) q[w] &= ~nbr[v][w];
        order.push_back(v);
        bound.push_back(k);
      }
    }
  }

  void expand(Bits cand) {
    std::vector<std::size_t> order, bound;
    colour(cand, order, bound);
    for (std::size_t i = order.size(); i-- > 0;) {
      if (current.size() + bound[i] <= best.size()) return;
      std::size_t v = order[i];
      current.push_back(v);
      Bits next(cand.size());
      for (std::size_t w = 0; w < cand.size(); ++w) next[w] = cand[w] & nbr[v][w];
      if (empty(next)) {
        if (current.size() > best.size()) best = current;
      } else {
        expand(next);
      }
      current.pop_back();
      reset(cand, v);
    }
  }
};

}  // namespace

std::vector<std::size_t> max_clique(const std::vector<std::vector<bool>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) return {};
  const std::size_t words = (n + 63) / 64;
  Search s;
  s.nbr.assign(n, Bits(words));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && adjacency[i][j]) s.nbr[i][j / 64] |= std::uint64_t{1} << (j % 64);
  Bits all(words);
  for (std::size_t i = 0; i < n; ++i) all[i / 64] |= std::uint64_t{1} << (i % 64);
  s.expand(all);
  std::sort(s.best.begin(), s.best.end());
  return s.best;
}

}  // namespace cantor
