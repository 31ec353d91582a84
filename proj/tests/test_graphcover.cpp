#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "cantor/graphcover.hpp"

using namespace cantor;

namespace {

// Lengths of the two cycles one level up, from the cover rule applied to
// the lengths alone.
std::pair<std::size_t, std::size_t> next_lengths(TowerVariant v, std::size_t l1, std::size_t l2) {
  if (v == TowerVariant::WeaklyMixing) return {3 * l1 + l2, 2 * l1 + 2 * l2};
  return {3 * l1, 3 * l1 + 2 * l2};
}

// Closed edge walks through v of each length up to limit, by dynamic
// programming on path counts.
std::set<std::size_t> return_lengths(const Graph& g, std::size_t v, std::size_t limit) {
  auto out = g.out_neighbors();
  std::set<std::size_t> lengths;
  std::vector<bool> frontier(g.vertex_count, false);
  frontier[v] = true;
  for (std::size_t len = 1; len <= limit; ++len) {
    std::vector<bool> next(g.vertex_count, false);
    for (std::size_t u = 0; u < g.vertex_count; ++u)
      if (frontier[u])
        for (auto w : out[u]) next[w] = true;
    frontier = next;
    if (frontier[v]) lengths.insert(len);
  }
  return lengths;
}

}  // namespace

TEST_CASE("edge surjectivity") {
  CHECK(check_edge_surjective(Graph{1, {{0, 0}}}));
  CHECK_FALSE(check_edge_surjective(Graph{2, {{0, 1}}}));
  auto seq = build_weakly_mixing_sequence(1);
  const auto& g0 = seq.levels[0];
  CHECK(g0.vertex_count() == 4);
  CHECK(check_edge_surjective(g0.graph()));
}

TEST_CASE("bidirectionality") {
  Graph g{3, {{0, 1}, {1, 2}, {2, 0}}};
  CHECK(check_bidirectional({0, 1, 2}, g, g));
  auto seq = build_weakly_mixing_sequence(1);
  CHECK(check_bidirectional(seq.homs[0], seq.levels[1].graph(), seq.levels[0].graph()));

  // Branch vertex 0 with out-neighbours 1 and 2 sent to different vertices.
  Graph src{3, {{0, 1}, {0, 2}, {1, 0}, {2, 0}}};
  Graph dst{3, {{0, 1}, {0, 2}, {1, 0}, {2, 0}}};
  CHECK_FALSE(check_bidirectional({0, 1, 2}, src, dst));
  CHECK_THROWS(check_bidirectional({0, 0, 0}, src, dst));
}

TEST_CASE("cycle expressions") {
  auto seq = build_weakly_mixing_sequence(1);
  const auto& g0 = seq.levels[0];
  auto path = expand_cycle_expr(g0, {{1, 1}});
  REQUIRE(path.size() == 3);  // vertices of a closed walk with 2 edges
  CHECK(path.front() == g0.vertex(0, 0));
  CHECK(path.back() == g0.vertex(0, 0));
  CHECK(path[1] == g0.vertex(1, 1));
  CycleExpr e{{2, 1}, {1, 1}, {1, 2}};
  CHECK(expand_cycle_expr(g0, e).size() == 10);
  CHECK(expr_length(g0, e) == 9);
  CHECK_THROWS(expand_cycle_expr(g0, {}));
  CHECK_THROWS(expand_cycle_expr(g0, {{1, 3}}));
}

TEST_CASE("weakly mixing tower") {
  auto seq = build_weakly_mixing_sequence(4);
  CHECK(seq.levels[1].cycle_length(1) == 9);
  CHECK(seq.levels[1].cycle_length(2) == 10);
  CHECK(seq.levels[1].vertex_count() == 18);
  CHECK(seq.levels[2].cycle_length(1) == 37);
  CHECK(seq.levels[2].cycle_length(2) == 38);
  CHECK(seq.levels[2].vertex_count() == 74);

  auto audit = audit_covers(seq);
  CHECK(audit.homomorphisms);
  CHECK(audit.edge_surjective);
  CHECK(audit.bidirectional);
  CHECK(audit.base_to_base);

  std::size_t l1 = 2, l2 = 3;
  for (std::size_t n = 0; n <= 4; ++n) {
    CHECK(seq.levels[n].cycle_length(1) == l1);
    CHECK(seq.levels[n].cycle_length(2) == l2);
    CHECK(seq.levels[n].vertex_count() == l1 + l2 - 1);
    std::tie(l1, l2) = next_lengths(TowerVariant::WeaklyMixing, l1, l2);
  }
  auto rec = cycle_length_recursion(TowerVariant::WeaklyMixing, 6);
  for (const auto& lengths : rec) CHECK(lengths[1] == lengths[0] + 1);

  for (std::size_t n = 0; n < 4; ++n) {
    CHECK(check_minimality_certificate(seq, n).pass);
    CHECK(check_weak_mixing_certificate(seq, n).pass);
    CHECK(max_preimage_count(seq, n).first == 7);
    CHECK(max_preimage_count(seq, n).second == seq.levels[n].vertex(0, 0));
  }
  CHECK_THROWS(check_minimality_certificate(seq, 4));
  CHECK_THROWS(check_minimality_certificate(build_weakly_mixing_sequence(1), 1));
}

TEST_CASE("weak mixing certificate agrees with brute-force return lengths") {
  auto seq = build_weakly_mixing_sequence(2);
  for (std::size_t n = 0; n <= 1; ++n) {
    const auto& level = seq.levels[n];
    auto lengths = return_lengths(level.graph(), level.vertex(0, 0), 4 * level.vertex_count());
    bool consecutive = false;
    for (auto l : lengths) consecutive = consecutive || lengths.count(l + 1);
    CHECK(consecutive == check_weak_mixing_certificate(seq, n).pass);
  }
}

TEST_CASE("transitive tower") {
  auto seq = build_transitive_sequence(3);
  CHECK(seq.levels[1].cycle_length(1) == 6);
  CHECK(seq.levels[1].cycle_length(2) == 12);
  CHECK(seq.levels[1].vertex_count() == 17);
  auto audit = audit_covers(seq);
  CHECK(audit.homomorphisms);
  CHECK(audit.bidirectional);
  CHECK(audit.edge_surjective);

  // phi_0 of c_{1,1} stays inside c_{0,1}.
  const auto& g1 = seq.levels[1];
  for (std::size_t pos = 0; pos < g1.cycle_length(1); ++pos) {
    auto image = seq.levels[0].label(seq.homs[0][g1.vertex(pos == 0 ? 0 : 1, pos)]);
    CHECK(image.cycle != 2);
  }

  for (std::size_t n = 0; n < 3; ++n) {
    CHECK(check_transitivity_certificate(seq, n).pass);
    auto minimal = check_minimality_certificate(seq, n);
    CHECK_FALSE(minimal.pass);
    CHECK_FALSE(minimal.witness.empty());
  }
  CHECK(periodic_point_free_certificate(seq, 1).min_closed_path == 6);
  std::size_t previous = 0;
  for (std::size_t n = 0; n <= 3; ++n) {
    auto cert = periodic_point_free_certificate(seq, n);
    CHECK(cert.pass);
    CHECK(cert.min_closed_path > previous);
    previous = cert.min_closed_path;
  }
}

TEST_CASE("invariant subsystem") {
  auto sub = invariant_subsystem(build_transitive_sequence(3));
  std::size_t expected = 2;
  for (const auto& level : sub.levels) {
    CHECK(level.cycle_count() == 1);
    CHECK(level.cycle_length(1) == expected);
    expected *= 3;
  }
  for (std::size_t n = 0; n < sub.top(); ++n) {
    CHECK(check_minimality_certificate(sub, n).pass);
    CHECK_FALSE(check_weak_mixing_certificate(sub, n).pass);
  }
  CHECK_THROWS(invariant_subsystem(build_weakly_mixing_sequence(2)));

  auto loop = build_tower({1}, {{{1, 1}}}, 2);
  auto same = invariant_subsystem(loop);
  CHECK(same.levels.size() == loop.levels.size());
  CHECK(same.homs == loop.homs);
}

TEST_CASE("periodic point free certificate") {
  auto seq = build_weakly_mixing_sequence(2);
  CHECK(periodic_point_free_certificate(seq, 1).min_closed_path == 9);
  auto loop = build_tower({1}, {{{1, 1}}}, 1);
  auto cert = periodic_point_free_certificate(loop, 0);
  CHECK(cert.min_closed_path == 1);
  CHECK_FALSE(cert.pass);
}

TEST_CASE("successor threads") {
  auto seq = build_weakly_mixing_sequence(3);
  VertexThread base0{seq.levels[0].vertex(0, 0)};
  auto succ = successor_threads(seq, base0);
  REQUIRE(succ.size() == 2);
  std::set<std::size_t> tops{succ[0][0], succ[1][0]};
  CHECK(tops == std::set<std::size_t>{seq.levels[0].vertex(1, 1), seq.levels[0].vertex(2, 1)});

  const auto& top = seq.levels[3];
  for (std::size_t v = 0; v < top.vertex_count(); ++v) {
    auto t = thread_from_top(seq, 3, v);
    CHECK(is_valid_thread(seq, t));
    auto next = successor_threads(seq, t);
    CHECK_FALSE(next.empty());
    if (top.label(v).cycle != 0) CHECK(next.size() == 1);
    // Projection commutes with taking successors.
    VertexThread shorter(t.begin(), t.end() - 1);
    auto lower = successor_threads(seq, shorter);
    for (const auto& u : next) {
      VertexThread proj(u.begin(), u.end() - 1);
      CHECK(std::find(lower.begin(), lower.end(), proj) != lower.end());
    }
  }

  // Successor sets of the base thread are nested and shrink to one point.
  std::size_t previous = 3;
  for (std::size_t d = 0; d <= 3; ++d) {
    VertexThread t(d + 1);
    for (std::size_t i = 0; i <= d; ++i) t[i] = seq.levels[i].vertex(0, 0);
    std::set<std::size_t> level0;
    for (const auto& u : successor_threads(seq, t)) level0.insert(u[0]);
    CHECK(level0.size() <= previous);
    previous = level0.size();
  }
}

TEST_CASE("signed indices") {
  auto seq = build_weakly_mixing_sequence(1);
  const auto& g1 = seq.levels[1];
  for (std::size_t v = 0; v < g1.vertex_count(); ++v)
    CHECK(g1.vertex_from_signed(g1.signed_index(v)) == v);
  CHECK(g1.signed_index(g1.vertex(1, 3)) == 3);
  CHECK(g1.signed_index(g1.vertex(2, 3)) == -3);
  CHECK(g1.signed_index(g1.vertex(0, 0)) == 0);
  CHECK(variant_name(parse_variant("transitive")) == "transitive");
  CHECK_THROWS(parse_variant("chaotic"));
}
