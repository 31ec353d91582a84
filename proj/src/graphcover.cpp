#include "cantor/graphcover.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

#include "cantor/exact.hpp"

namespace cantor {

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  return std::find(edges.begin(), edges.end(), std::make_pair(u, v)) != edges.end();
}

std::vector<std::vector<std::size_t>> Graph::out_neighbors() const {
  std::vector<std::vector<std::size_t>> out(vertex_count);
  for (auto [u, v] : edges) out[u].push_back(v);
  return out;
}

std::vector<std::vector<std::size_t>> Graph::in_neighbors() const {
  std::vector<std::vector<std::size_t>> in(vertex_count);
  for (auto [u, v] : edges) in[v].push_back(u);
  return in;
}

bool check_edge_surjective(const Graph& g) {
  std::vector<bool> has_in(g.vertex_count), has_out(g.vertex_count);
  for (auto [u, v] : g.edges) {
    has_out[u] = true;
    has_in[v] = true;
  }
  for (std::size_t v = 0; v < g.vertex_count; ++v)
    if (!has_in[v] || !has_out[v]) return false;
  return true;
}

bool is_homomorphism(const VertexMap& hom, const Graph& source, const Graph& target) {
  if (hom.size() != source.vertex_count) return false;
  std::set<std::pair<std::size_t, std::size_t>> tedges(target.edges.begin(), target.edges.end());
  for (auto [u, v] : source.edges) {
    if (hom[u] >= target.vertex_count || hom[v] >= target.vertex_count) return false;
    if (!tedges.count({hom[u], hom[v]})) return false;
  }
  return true;
}

bool check_bidirectional(const VertexMap& hom, const Graph& source, const Graph& target) {
  if (!is_homomorphism(hom, source, target))
    throw PreconditionError("check_bidirectional: map is not a graph homomorphism");
  auto out = source.out_neighbors();
  auto in = source.in_neighbors();
  for (std::size_t u = 0; u < source.vertex_count; ++u) {
    for (std::size_t i = 1; i < out[u].size(); ++i)
      if (hom[out[u][i]] != hom[out[u][0]]) return false;
    for (std::size_t i = 1; i < in[u].size(); ++i)
      if (hom[in[u][i]] != hom[in[u][0]]) return false;
  }
  return true;
}

std::optional<std::size_t> min_cycle_length(const Graph& g) {
  auto out = g.out_neighbors();
  std::optional<std::size_t> best;
  std::vector<std::size_t> dist(g.vertex_count);
  constexpr std::size_t unseen = static_cast<std::size_t>(-1);
  for (std::size_t s = 0; s < g.vertex_count; ++s) {
    // BFS from s; the first edge back into s closes the shortest cycle through s.
    std::fill(dist.begin(), dist.end(), unseen);
    dist[s] = 0;
    std::deque<std::size_t> queue{s};
    bool closed = false;
    while (!queue.empty() && !closed) {
      std::size_t u = queue.front();
      queue.pop_front();
      if (best && dist[u] + 1 >= *best) break;
      for (std::size_t v : out[u]) {
        if (v == s) {
          best = dist[u] + 1;
          closed = true;
          break;
        }
        if (dist[v] == unseen) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return best;
}

CycleLevel::CycleLevel(std::size_t n, std::vector<std::size_t> cycle_lengths)
    : n_(n), lengths_(std::move(cycle_lengths)) {
  if (lengths_.empty()) throw PreconditionError("a cycle level needs at least one cycle");
  count_ = 1;
  for (std::size_t len : lengths_) {
    if (len == 0) throw PreconditionError("cycle length must be positive");
    offsets_.push_back(count_);
    count_ += len - 1;
  }
  graph_.vertex_count = count_;
  for (std::size_t c = 1; c <= lengths_.size(); ++c) {
    std::size_t len = lengths_[c - 1];
    for (std::size_t p = 0; p < len; ++p)
      graph_.edges.emplace_back(vertex(c, p), vertex(c, (p + 1) % len));
  }
}

std::size_t CycleLevel::cycle_length(std::size_t id) const {
  if (id == 0 || id > lengths_.size()) throw PreconditionError("unknown cycle id");
  return lengths_[id - 1];
}

std::size_t CycleLevel::vertex(std::size_t cycle, std::size_t pos) const {
  if (pos == 0) return 0;
  if (pos >= cycle_length(cycle)) throw PreconditionError("cycle position out of range");
  return offsets_[cycle - 1] + pos - 1;
}

VertexLabel CycleLevel::label(std::size_t v) const {
  if (v >= count_) throw PreconditionError("vertex out of range");
  if (v == 0) return {};
  for (std::size_t c = lengths_.size(); c >= 1; --c)
    if (v >= offsets_[c - 1] && lengths_[c - 1] > 1) return {c, v - offsets_[c - 1] + 1};
  throw PreconditionError("vertex out of range");
}

long CycleLevel::signed_index(std::size_t v) const {
  auto l = label(v);
  if (l.cycle == 0) return 0;
  if (l.cycle > 2) throw PreconditionError("signed index defined for two-cycle levels only");
  return l.cycle == 1 ? static_cast<long>(l.pos) : -static_cast<long>(l.pos);
}

bool CycleLevel::has_signed(long eta) const {
  if (eta == 0) return true;
  std::size_t c = eta > 0 ? 1 : 2;
  if (c > lengths_.size()) return false;
  auto pos = static_cast<std::size_t>(eta > 0 ? eta : -eta);
  return pos < lengths_[c - 1];
}

std::size_t CycleLevel::vertex_from_signed(long eta) const {
  if (!has_signed(eta)) throw PreconditionError("no vertex with signed index " + std::to_string(eta));
  if (eta == 0) return 0;
  return eta > 0 ? vertex(1, static_cast<std::size_t>(eta)) : vertex(2, static_cast<std::size_t>(-eta));
}

std::string CycleLevel::name(std::size_t v) const {
  auto l = label(v);
  std::string s = "v_" + std::to_string(n_) + "_";
  if (l.cycle == 0) return s + "0";
  return s + std::to_string(l.cycle) + "_" + std::to_string(l.pos);
}

std::size_t expr_length(const CycleLevel& level, const CycleExpr& expr) {
  std::size_t len = 0;
  for (const auto& t : expr) len += t.multiplicity * level.cycle_length(t.cycle);
  return len;
}

std::vector<std::size_t> expand_cycle_expr(const CycleLevel& level, const CycleExpr& expr) {
  if (expr.empty()) throw PreconditionError("empty cycle expression");
  std::vector<std::size_t> path{0};
  for (const auto& t : expr) {
    if (t.multiplicity == 0) throw PreconditionError("cycle multiplicity must be positive");
    std::size_t len = level.cycle_length(t.cycle);
    for (std::size_t r = 0; r < t.multiplicity; ++r)
      for (std::size_t p = 1; p <= len; ++p) path.push_back(level.vertex(t.cycle, p % len));
  }
  return path;
}

std::string variant_name(TowerVariant v) {
  switch (v) {
    case TowerVariant::WeaklyMixing: return "weakly-mixing";
    case TowerVariant::Transitive: return "transitive";
    case TowerVariant::Restricted: return "restricted";
    case TowerVariant::Custom: return "custom";
  }
  return "custom";
}

TowerVariant parse_variant(const std::string& s) {
  if (s == "weakly-mixing") return TowerVariant::WeaklyMixing;
  if (s == "transitive") return TowerVariant::Transitive;
  throw PreconditionError("unknown tower variant '" + s + "' (expected weakly-mixing|transitive)");
}

CoverSequence build_tower(std::vector<std::size_t> base_lengths, std::vector<CycleExpr> rule,
                          std::size_t levels, TowerVariant variant) {
  if (rule.size() != base_lengths.size())
    throw PreconditionError("rule must give one image per cycle");
  CoverSequence seq;
  seq.variant = variant;
  seq.levels.emplace_back(0, std::move(base_lengths));
  for (std::size_t n = 0; n < levels; ++n) {
    const CycleLevel& lower = seq.levels.back();
    std::vector<std::vector<std::size_t>> images;
    std::vector<std::size_t> lengths;
    for (const auto& expr : rule) {
      images.push_back(expand_cycle_expr(lower, expr));
      lengths.push_back(images.back().size() - 1);
    }
    CycleLevel upper(n + 1, lengths);
    // j-th vertex along c_{n+1,i} goes to the j-th vertex of its image path.
    VertexMap hom(upper.vertex_count(), 0);
    for (std::size_t c = 1; c <= lengths.size(); ++c)
      for (std::size_t p = 1; p < lengths[c - 1]; ++p) hom[upper.vertex(c, p)] = images[c - 1][p];
    seq.rules.push_back(rule);
    seq.homs.push_back(std::move(hom));
    seq.levels.push_back(std::move(upper));
  }
  return seq;
}

CoverSequence build_weakly_mixing_sequence(std::size_t levels) {
  if (levels == 0) throw PreconditionError("tower needs at least one cover");
  return build_tower({2, 3}, {{{2, 1}, {1, 1}, {1, 2}}, {{2, 1}, {1, 2}, {1, 2}}}, levels,
                     TowerVariant::WeaklyMixing);
}

CoverSequence build_transitive_sequence(std::size_t levels) {
  if (levels == 0) throw PreconditionError("tower needs at least one cover");
  return build_tower({2, 3}, {{{3, 1}}, {{2, 1}, {2, 2}, {1, 1}}}, levels,
                     TowerVariant::Transitive);
}

CoverSequence build_sequence(TowerVariant variant, std::size_t levels) {
  switch (variant) {
    case TowerVariant::WeaklyMixing: return build_weakly_mixing_sequence(levels);
    case TowerVariant::Transitive: return build_transitive_sequence(levels);
    default: throw PreconditionError("only weakly-mixing and transitive towers can be built");
  }
}

std::vector<std::vector<std::size_t>> cycle_length_recursion(TowerVariant variant,
                                                             std::size_t levels) {
  std::vector<std::vector<std::size_t>> out{{2, 3}};
  for (std::size_t n = 0; n < levels; ++n) {
    std::size_t l1 = out.back()[0], l2 = out.back()[1];
    if (variant == TowerVariant::WeaklyMixing)
      out.push_back({3 * l1 + l2, 2 * l1 + 2 * l2});
    else if (variant == TowerVariant::Transitive)
      out.push_back({3 * l1, 3 * l1 + 2 * l2});
    else
      throw PreconditionError("length recursion known for the two built towers only");
  }
  return out;
}

std::vector<bool> visited_vertices(std::size_t vertex_count, const std::vector<std::size_t>& path) {
  std::vector<bool> seen(vertex_count, false);
  for (std::size_t v : path) seen.at(v) = true;
  return seen;
}

namespace {

void require_cover_above(const CoverSequence& seq, std::size_t n) {
  if (n + 1 >= seq.levels.size())
    throw PreconditionError("no cover above level " + std::to_string(n));
}

// First vertex of V_n missed by phi_n(c_{n+1,c}), if any.
std::optional<std::size_t> first_missed(const CoverSequence& seq, std::size_t n, std::size_t c) {
  auto seen = visited_vertices(seq.levels[n].vertex_count(),
                               expand_cycle_expr(seq.levels[n], seq.rules[n][c - 1]));
  for (std::size_t v = 0; v < seen.size(); ++v)
    if (!seen[v]) return v;
  return std::nullopt;
}

}  // namespace

Certificate check_minimality_certificate(const CoverSequence& seq, std::size_t n) {
  require_cover_above(seq, n);
  for (std::size_t c = 1; c <= seq.levels[n + 1].cycle_count(); ++c) {
    if (auto v = first_missed(seq, n, c))
      return {false, "phi_" + std::to_string(n) + "(c_" + std::to_string(n + 1) + "_" +
                         std::to_string(c) + ") misses " + seq.levels[n].name(*v)};
  }
  return {true, ""};
}

Certificate check_transitivity_certificate(const CoverSequence& seq, std::size_t n) {
  require_cover_above(seq, n);
  for (std::size_t c = 1; c <= seq.levels[n + 1].cycle_count(); ++c)
    if (!first_missed(seq, n, c))
      return {true, "phi_" + std::to_string(n) + "(c_" + std::to_string(n + 1) + "_" +
                        std::to_string(c) + ") covers V_" + std::to_string(n)};
  return {false, "no cycle of level " + std::to_string(n + 1) + " covers V_" + std::to_string(n)};
}

Certificate check_weak_mixing_certificate(const CoverSequence& seq, std::size_t n) {
  if (n >= seq.levels.size()) throw PreconditionError("level out of range");
  // Closed paths at the base are exactly the words in the level's cycles.
  const auto& lengths = seq.levels[n].cycle_lengths();
  std::size_t g = 0;
  for (std::size_t len : lengths) g = std::gcd(g, len);
  if (g != 1)
    return {false, "all return lengths at level " + std::to_string(n) + " are multiples of " +
                       std::to_string(g)};
  std::size_t lo = *std::min_element(lengths.begin(), lengths.end());
  std::size_t hi = *std::max_element(lengths.begin(), lengths.end());
  std::size_t bound = lo * hi + hi + 2;
  std::vector<bool> reach(bound + 1, false);
  reach[0] = true;
  for (std::size_t m = 1; m <= bound; ++m) {
    for (std::size_t len : lengths)
      if (len <= m && reach[m - len]) {
        reach[m] = true;
        break;
      }
    if (m >= 2 && reach[m] && reach[m - 1])
      return {true, "closed paths of lengths " + std::to_string(m - 1) + " and " +
                        std::to_string(m)};
  }
  return {false, "no consecutive return lengths below " + std::to_string(bound)};
}

CoverAudit audit_covers(const CoverSequence& seq) {
  CoverAudit audit;
  for (const auto& level : seq.levels)
    audit.edge_surjective = audit.edge_surjective && check_edge_surjective(level.graph());
  for (std::size_t n = 0; n + 1 < seq.levels.size(); ++n) {
    const auto& src = seq.levels[n + 1].graph();
    const auto& tgt = seq.levels[n].graph();
    bool hom = is_homomorphism(seq.homs[n], src, tgt);
    audit.homomorphisms = audit.homomorphisms && hom;
    audit.bidirectional = audit.bidirectional && hom && check_bidirectional(seq.homs[n], src, tgt);
    audit.base_to_base = audit.base_to_base && seq.homs[n][0] == 0;
  }
  return audit;
}

CoverSequence invariant_subsystem(const CoverSequence& seq) {
  std::vector<CycleExpr> first_rules;
  for (std::size_t n = 0; n < seq.rules.size(); ++n) {
    const CycleExpr& e = seq.rules[n][0];
    for (const auto& t : e)
      if (t.cycle != 1)
        throw PreconditionError("image of c_" + std::to_string(n + 1) + "_1 uses c_" +
                                std::to_string(n) + "_" + std::to_string(t.cycle) +
                                "; first cycles are not invariant");
    first_rules.push_back(e);
  }
  CoverSequence out;
  out.variant = TowerVariant::Restricted;
  for (const auto& level : seq.levels)
    out.levels.emplace_back(level.level(), std::vector<std::size_t>{level.cycle_length(1)});
  for (std::size_t n = 0; n + 1 < out.levels.size(); ++n) {
    auto image = expand_cycle_expr(out.levels[n], first_rules[n]);
    VertexMap hom(out.levels[n + 1].vertex_count(), 0);
    for (std::size_t p = 1; p < out.levels[n + 1].cycle_length(1); ++p)
      hom[out.levels[n + 1].vertex(1, p)] = image[p];
    out.rules.push_back({first_rules[n]});
    out.homs.push_back(std::move(hom));
  }
  return out;
}

bool is_valid_thread(const CoverSequence& seq, const VertexThread& t) {
  if (t.empty() || t.size() > seq.levels.size()) return false;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= seq.levels[i].vertex_count()) return false;
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (seq.homs[i][t[i + 1]] != t[i]) return false;
  return true;
}

VertexThread thread_from_top(const CoverSequence& seq, std::size_t depth, std::size_t top_vertex) {
  if (depth >= seq.levels.size()) throw PreconditionError("thread depth exceeds tower");
  VertexThread t(depth + 1);
  t[depth] = top_vertex;
  for (std::size_t i = depth; i > 0; --i) t[i - 1] = seq.homs[i - 1].at(t[i]);
  return t;
}

std::vector<VertexThread> successor_threads(const CoverSequence& seq, const VertexThread& t) {
  if (!is_valid_thread(seq, t)) throw PreconditionError("invalid vertex thread");
  std::size_t d = t.size() - 1;
  auto out = seq.levels[d].graph().out_neighbors();
  std::set<VertexThread> result;
  for (std::size_t u : out[t[d]]) {
    VertexThread cand = thread_from_top(seq, d, u);
    bool edges_ok = true;
    for (std::size_t i = 0; i <= d && edges_ok; ++i)
      edges_ok = seq.levels[i].graph().has_edge(t[i], cand[i]);
    if (edges_ok) result.insert(std::move(cand));
  }
  return {result.begin(), result.end()};
}

PeriodCertificate periodic_point_free_certificate(const CoverSequence& seq, std::size_t n) {
  if (n >= seq.levels.size()) throw PreconditionError("level out of range");
  auto m = min_cycle_length(seq.levels[n].graph());
  PeriodCertificate cert;
  cert.min_closed_path = m.value_or(0);
  cert.pass = m && *m > 1;
  return cert;
}

std::pair<std::size_t, std::size_t> max_preimage_count(const CoverSequence& seq, std::size_t n) {
  require_cover_above(seq, n);
  std::vector<std::size_t> count(seq.levels[n].vertex_count(), 0);
  for (std::size_t v : seq.homs[n]) ++count[v];
  auto it = std::max_element(count.begin(), count.end());
  return {*it, static_cast<std::size_t>(it - count.begin())};
}

}  // namespace cantor
