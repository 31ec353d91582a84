#include "cantor/metric_systems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cantor/max_clique.hpp"
#include "cantor/parallel.hpp"

namespace cantor {

namespace {

void require_map(const std::vector<std::size_t>& map) {
  for (std::size_t x = 0; x < map.size(); ++x)
    if (map[x] >= map.size())
      throw PreconditionError("map sends point " + std::to_string(x) + " outside the system");
}

}  // namespace

FinitePointSystem FinitePointSystem::from_matrix(std::vector<std::vector<Scalar>> dist,
                                                 std::vector<std::size_t> map) {
  if (dist.size() != map.size()) throw PreconditionError("distance matrix and map sizes differ");
  for (const auto& row : dist)
    if (row.size() != map.size()) throw PreconditionError("distance matrix is not square");
  require_map(map);
  FinitePointSystem sys;
  sys.dist_ = std::move(dist);
  sys.map_ = std::move(map);
  sys.audit();
  return sys;
}

FinitePointSystem FinitePointSystem::from_coordinates(std::vector<std::vector<Scalar>> coords,
                                                      std::vector<std::size_t> map) {
  if (coords.size() != map.size()) throw PreconditionError("coordinate list and map sizes differ");
  require_map(map);
  const std::size_t n = coords.size();
  for (const auto& c : coords)
    if (c.size() != coords.front().size()) throw PreconditionError("coordinate dimensions differ");
  FinitePointSystem sys;
  sys.dist_.assign(n, std::vector<Scalar>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      Scalar d;
      for (std::size_t k = 0; k < coords[i].size(); ++k) d += abs(coords[i][k] - coords[j][k]);
      sys.dist_[i][j] = d;
      sys.dist_[j][i] = d;
    }
  sys.coords_ = std::move(coords);
  sys.map_ = std::move(map);
  sys.audit();
  return sys;
}

void FinitePointSystem::audit() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    if (sgn(dist_[i][i]) != 0) throw PreconditionError("d(x,x) != 0 at point " + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist_[i][j] != dist_[j][i])
        throw PreconditionError("metric not symmetric at " + std::to_string(i) + "," + std::to_string(j));
      if (sgn(dist_[i][j]) <= 0)
        throw PreconditionError("distinct points " + std::to_string(i) + "," + std::to_string(j) +
                                " at distance 0");
    }
  }
  if (!coords_.empty()) return;  // l1 distances satisfy the triangle inequality
  if (auto bad = find_triangle_violation(*this))
    throw PreconditionError("triangle inequality fails at " + std::to_string((*bad)[0]) + "," +
                            std::to_string((*bad)[1]) + "," + std::to_string((*bad)[2]));
}

std::optional<std::array<std::size_t, 3>> find_triangle_violation(const FinitePointSystem& sys) {
  const std::size_t n = sys.size();
  Scalar sum;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        sum = sys.dist(i, j) + sys.dist(j, k);
        if (sys.dist(i, k) > sum) return std::array<std::size_t, 3>{i, j, k};
      }
  return std::nullopt;
}

void FinitePointSystem::set_eps(std::vector<Scalar> eps) {
  if (eps.size() != size()) throw PreconditionError("eps list size differs from point count");
  for (const auto& e : eps)
    if (sgn(e) <= 0) throw PreconditionError("eps must be positive");
  eps_ = std::move(eps);
}

void FinitePointSystem::set_names(std::vector<std::string> names) {
  if (names.size() != size()) throw PreconditionError("name list size differs from point count");
  names_ = std::move(names);
}

std::string FinitePointSystem::name(std::size_t x) const {
  return names_.empty() ? std::to_string(x) : names_.at(x);
}

void FinitePointSystem::set_product_shape(std::size_t first, std::size_t second) {
  if (first * second != size()) throw PreconditionError("product shape does not match point count");
  shape_ = std::make_pair(first, second);
}

std::vector<std::optional<Scalar>> max_feasible_eps(const FinitePointSystem& sys) {
  std::vector<std::optional<Scalar>> out(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x)
    for (std::size_t y = 0; y < sys.size(); ++y) {
      if (y == x) continue;
      if (sys.dist(sys.image(x), sys.image(y)) >= sys.dist(x, y) &&
          (!out[x] || sys.dist(x, y) < *out[x]))
        out[x] = sys.dist(x, y);
    }
  return out;
}

LrsResult check_lrs(const FinitePointSystem& sys, std::size_t jobs) {
  const std::size_t n = sys.size();
  std::vector<std::optional<Scalar>> eps(n);
  if (sys.eps()) {
    for (std::size_t x = 0; x < n; ++x) eps[x] = (*sys.eps())[x];
  } else {
    eps = max_feasible_eps(sys);
  }

  struct Row {
    std::size_t checked = 0;
    std::optional<Scalar> margin;
    std::optional<LrsPair> witness;
  };
  std::vector<Row> rows(n);
  parallel_for(n, jobs, [&](std::size_t x) {
    Row& row = rows[x];
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x || (eps[x] && sys.dist(x, y) >= *eps[x])) continue;
      const Scalar& d = sys.dist(x, y);
      const Scalar& di = sys.dist(sys.image(x), sys.image(y));
      Scalar margin = d - di;
      ++row.checked;
      if (!row.margin || margin < *row.margin) row.margin = margin;
      if (sgn(margin) <= 0 && !row.witness) row.witness = LrsPair{x, y, d, di};
    }
  });

  LrsResult res;
  for (auto& row : rows) {
    res.pairs_checked += row.checked;
    if (row.margin && (!res.min_margin || *row.margin < *res.min_margin)) res.min_margin = row.margin;
    if (row.witness && res.pass) {
      res.pass = false;
      res.witness = row.witness;
    }
  }
  return res;
}

bool check_shrinking(const FinitePointSystem& sys) {
  for (std::size_t x = 0; x < sys.size(); ++x)
    for (std::size_t y = x + 1; y < sys.size(); ++y)
      if (sys.dist(sys.image(x), sys.image(y)) >= sys.dist(x, y)) return false;
  return true;
}

std::vector<std::size_t> fixed_points(const FinitePointSystem& sys) {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < sys.size(); ++x)
    if (sys.image(x) == x) out.push_back(x);
  return out;
}

std::vector<std::size_t> eventual_image(const FinitePointSystem& sys) {
  std::vector<bool> in(sys.size(), true);
  for (std::size_t step = 0; step < sys.size(); ++step) {
    std::vector<bool> next(sys.size(), false);
    for (std::size_t x = 0; x < sys.size(); ++x)
      if (in[x]) next[sys.image(x)] = true;
    in = std::move(next);
  }
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < sys.size(); ++x)
    if (in[x]) out.push_back(x);
  return out;
}

std::optional<std::size_t> empty_preimage_depth(const FinitePointSystem& sys, std::size_t x) {
  std::vector<bool> cur(sys.size(), false);
  cur.at(x) = true;
  for (std::size_t n = 1; n <= sys.size() + 1; ++n) {
    std::vector<bool> pre(sys.size(), false);
    bool any = false;
    for (std::size_t y = 0; y < sys.size(); ++y)
      if (cur[sys.image(y)]) pre[y] = any = true;
    if (!any) return n;
    cur = std::move(pre);
  }
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> cycles(const FinitePointSystem& sys) {
  const std::size_t n = sys.size();
  std::vector<int> state(n, 0);  // 0 unseen, 1 on current walk, 2 done
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> walk;
    std::size_t x = start;
    while (state[x] == 0) {
      state[x] = 1;
      walk.push_back(x);
      x = sys.image(x);
    }
    if (state[x] == 1) {
      auto it = std::find(walk.begin(), walk.end(), x);
      std::vector<std::size_t> cyc(it, walk.end());
      std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
      out.push_back(std::move(cyc));
    }
    for (auto v : walk) state[v] = 2;
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Scalar fraction(long num, long den) {
  Scalar q(num, den);
  q.canonicalize();
  return q;
}

FinitePointSystem random_system(std::mt19937_64& rng, std::size_t max_size) {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_size);
  const std::size_t n = size_dist(rng);
  std::uniform_int_distribution<int> kind_dist(0, 3);
  const int kind = kind_dist(rng);
  std::vector<std::vector<Scalar>> d(n, std::vector<Scalar>(n));
  std::vector<std::size_t> map(n);

  if (kind == 0) {
    // d(x,y) = max(h(x), h(y)) on a random rooted tree, h increasing away
    // from the root; the parent map is then shrinking.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> step(1, 8);
    std::vector<Scalar> h(n);
    h[order[0]] = fraction(step(rng), 4);
    map[order[0]] = order[0];
    for (std::size_t i = 1; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::size_t parent = order[pick(rng)];
      map[order[i]] = parent;
      h[order[i]] = h[parent] + fraction(step(rng), 8);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) d[i][j] = std::max(h[i], h[j]);
    return FinitePointSystem::from_matrix(std::move(d), std::move(map));
  }

  // Values in [1, 2] always satisfy the triangle inequality.
  std::uniform_int_distribution<int> num(0, 16);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = 1 + fraction(num(rng), 16);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  if (kind == 1) {
    std::iota(map.begin(), map.end(), 0);
    std::shuffle(map.begin(), map.end(), rng);
  } else if (kind == 2) {
    std::size_t target = pick(rng);
    for (auto& m : map) m = target;
  } else {
    for (auto& m : map) m = pick(rng);
  }
  return FinitePointSystem::from_matrix(std::move(d), std::move(map));
}

}  // namespace

OracleReport shrinking_propositions_oracle(std::size_t trials, std::size_t max_size,
                                           std::uint64_t seed, std::size_t jobs) {
  if (max_size == 0) throw PreconditionError("max_size must be positive");
  struct Trial {
    bool shrinking = false, surjective = false;
    std::vector<std::string> witnesses;
    std::vector<std::size_t> depths;
  };
  std::vector<Trial> results(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    std::mt19937_64 rng(seq);
    FinitePointSystem sys = random_system(rng, max_size);
    Trial& r = results[t];
    r.shrinking = check_shrinking(sys);
    if (!r.shrinking) return;
    std::set<std::size_t> image(sys.map().begin(), sys.map().end());
    r.surjective = image.size() == sys.size();
    auto fail = [&](const std::string& what) {
      r.witnesses.push_back("trial " + std::to_string(t) + " (" + std::to_string(sys.size()) +
                            " points): " + what);
    };
    if (r.surjective && sys.size() != 1) fail("surjective shrinking map on more than one point");
    auto fixed = fixed_points(sys);
    if (fixed.size() != 1) fail(std::to_string(fixed.size()) + " fixed points");
    auto eventual = eventual_image(sys);
    if (eventual.size() != 1 || (fixed.size() == 1 && eventual[0] != fixed[0]))
      fail("eventual image is not the fixed point");
    for (std::size_t x = 0; x < sys.size(); ++x) {
      if (sys.image(x) == x) continue;
      auto depth = empty_preimage_depth(sys, x);
      if (!depth) {
        fail("preimages of point " + std::to_string(x) + " never vanish");
      } else {
        r.depths.push_back(*depth);
      }
    }
  });

  OracleReport rep;
  rep.trials = trials;
  for (auto& r : results) {
    rep.shrinking += r.shrinking;
    rep.surjective_shrinking += r.surjective;
    if (!r.witnesses.empty()) ++rep.counterexamples;
    for (auto& w : r.witnesses) rep.witnesses.push_back(std::move(w));
    for (auto d : r.depths) ++rep.preimage_depths[d];
  }
  return rep;
}

std::size_t separated_count(const FinitePointSystem& sys, std::size_t n, const Scalar& eps) {
  if (n == 0) throw PreconditionError("separated_count needs n >= 1");
  if (sgn(eps) <= 0) throw PreconditionError("separated_count needs eps > 0");
  const std::size_t size = sys.size();
  if (size == 0) return 0;
  std::vector<std::vector<std::size_t>> orbit(size);
  for (std::size_t x = 0; x < size; ++x) {
    std::size_t p = x;
    for (std::size_t j = 0; j < n; ++j) {
      orbit[x].push_back(p);
      p = sys.image(p);
    }
  }
  std::vector<std::vector<bool>> adj(size, std::vector<bool>(size, false));
  for (std::size_t x = 0; x < size; ++x)
    for (std::size_t y = x + 1; y < size; ++y)
      for (std::size_t j = 0; j < n; ++j)
        if (sys.dist(orbit[x][j], orbit[y][j]) > eps) {
          adj[x][y] = adj[y][x] = true;
          break;
        }
  return max_clique(adj).size();
}

std::vector<EntropyRow> entropy_estimate(const FinitePointSystem& sys,
                                         const std::vector<Scalar>& eps_list,
                                         const std::vector<std::size_t>& n_list) {
  std::vector<EntropyRow> rows;
  for (const auto& eps : eps_list)
    for (std::size_t n : n_list) {
      EntropyRow row;
      row.eps = eps;
      row.n = n;
      row.count = separated_count(sys, n, eps);
      row.estimate = std::log(static_cast<double>(row.count)) / static_cast<double>(n);
      rows.push_back(std::move(row));
    }
  return rows;
}

FinitePointSystem product_system(const FinitePointSystem& first, const FinitePointSystem& second) {
  const std::size_t n1 = first.size(), n2 = second.size();
  std::vector<std::size_t> map(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) map[i * n2 + j] = first.image(i) * n2 + second.image(j);

  std::optional<FinitePointSystem> prod;
  if (first.embedded() && second.embedded() && n1 && n2) {
    std::vector<std::vector<Scalar>> coords;
    coords.reserve(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        auto c = first.coordinates()[i];
        const auto& c2 = second.coordinates()[j];
        c.insert(c.end(), c2.begin(), c2.end());
        coords.push_back(std::move(c));
      }
    prod = FinitePointSystem::from_coordinates(std::move(coords), std::move(map));
  } else {
    std::vector<std::vector<Scalar>> d(n1 * n2, std::vector<Scalar>(n1 * n2));
    for (std::size_t p = 0; p < n1 * n2; ++p)
      for (std::size_t q = 0; q < n1 * n2; ++q)
        d[p][q] = first.dist(p / n2, q / n2) + second.dist(p % n2, q % n2);
    prod = FinitePointSystem::from_matrix(std::move(d), std::move(map));
  }

  std::vector<std::string> names;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      names.push_back("(" + first.name(i) + "," + second.name(j) + ")");
  prod->set_names(std::move(names));
  if (first.eps() && second.eps()) {
    std::vector<Scalar> eps(n1 * n2);
    for (std::size_t p = 0; p < n1 * n2; ++p)
      eps[p] = std::min((*first.eps())[p / n2], (*second.eps())[p % n2]);
    prod->set_eps(std::move(eps));
  }
  prod->set_product_shape(n1, n2);
  return std::move(*prod);
}

std::uint64_t minimal_set_label(const OdometerSpec& spec, const ResiduePoint& x,
                                const ResiduePoint& y, std::size_t n) {
  if (n == 0 || x.depth() < n || y.depth() < n)
    throw PreconditionError("minimal_set_label needs points of depth >= n >= 1");
  if (!is_valid(spec, x) || !is_valid(spec, y)) throw PreconditionError("invalid residue point");
  std::uint64_t s = spec.term(n);
  return (y.digits[n - 1] + s - x.digits[n - 1]) % s;
}

std::uint64_t minimal_set_label(const FinitePointSystem& product, const OdometerSpec& spec,
                                std::size_t point, std::size_t n) {
  const auto& shape = product.product_shape();
  if (!shape) throw PreconditionError("minimal_set_label needs a product system");
  auto [n1, n2] = *shape;
  if (point >= n1 * n2) throw PreconditionError("point out of range");
  std::uint64_t s = spec.term(n);
  if (n1 % s != 0 || n2 % s != 0)
    throw PreconditionError("factors are not odometer truncations of depth >= n");
  return (point % n2 + s - (point / n2) % s) % s;
}

std::size_t lrs_cylinder_depth(const EmbeddingScheme& scheme, std::size_t depth, long label) {
  const auto& spec = scheme.odometer_spec();
  std::size_t deepest = 0;
  for (std::size_t n = scheme.first_level(); n < depth; ++n) {
    auto r = static_cast<long>(static_cast<std::uint64_t>(label) % spec.term(n));
    if (scheme.level(n).is_exceptional(r)) deepest = n;
  }
  return deepest + 1;
}

namespace {

std::vector<Scalar> depth_midpoints(const EmbeddingScheme& scheme, std::size_t depth) {
  const SchemeLevel& lvl = scheme.level(depth);
  auto s = scheme.odometer_spec().term(depth);
  std::vector<Scalar> mids(s);
  for (std::uint64_t i = 0; i < s; ++i) mids[i] = lvl.cell(static_cast<long>(i)).D->mid();
  return mids;
}

// eps_x: distance to the nearest midpoint outside x's LRS cylinder.
std::vector<Scalar> cylinder_eps(const EmbeddingScheme& scheme, std::size_t depth,
                                 const std::vector<Scalar>& mids) {
  const auto& spec = scheme.odometer_spec();
  const std::size_t n = mids.size();
  std::vector<Scalar> eps(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::uint64_t s = spec.term(lrs_cylinder_depth(scheme, depth, static_cast<long>(x)));
    std::optional<Scalar> best;
    for (std::size_t y = 0; y < n; ++y) {
      if (y % s == x % s) continue;
      Scalar d = abs(mids[x] - mids[y]);
      if (!best || d < *best) best = d;
    }
    eps[x] = best ? *best : Scalar(1);
  }
  return eps;
}

EmbeddingScheme deep_enough(const EmbeddingScheme& scheme, std::size_t depth) {
  if (scheme.kind() != SchemeKind::Odometer) throw PreconditionError("an odometer scheme is required");
  return scheme.depth() >= depth ? scheme : build_scheme(scheme.source(), depth);
}

}  // namespace

FinitePointSystem midpoint_system(const EmbeddingScheme& scheme, std::size_t depth) {
  if (scheme.kind() != SchemeKind::Odometer) throw PreconditionError("an odometer scheme is required");
  auto mids = depth_midpoints(scheme, depth);
  const std::size_t n = mids.size();
  std::vector<std::vector<Scalar>> coords(n);
  std::vector<std::size_t> map(n);
  std::vector<std::string> names(n);
  for (std::size_t x = 0; x < n; ++x) {
    coords[x] = {mids[x]};
    map[x] = (x + 1) % n;
    names[x] = "x" + std::to_string(x);
  }
  auto sys = FinitePointSystem::from_coordinates(std::move(coords), std::move(map));
  sys.set_eps(cylinder_eps(scheme, depth, mids));
  sys.set_names(std::move(names));
  return sys;
}

FinitePointSystem full_shift_system(std::size_t word_length) {
  if (word_length == 0 || word_length > 16) throw PreconditionError("word length must be in 1..16");
  const std::size_t n = std::size_t{1} << word_length;
  mpz_class denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), 3, word_length);
  std::vector<std::vector<Scalar>> coords(n);
  std::vector<std::size_t> map(n);
  std::vector<std::string> names(n);
  for (std::size_t w = 0; w < n; ++w) {
    // Symbol i is bit i; the point is sum 2 w_i 3^{-(i+1)} plus half a cell.
    mpz_class num = 0;
    std::string word;
    for (std::size_t i = 0; i < word_length; ++i) {
      num = num * 3 + ((w >> i) & 1 ? 2 : 0);
      word += (w >> i) & 1 ? '1' : '0';
    }
    Scalar x(num, denom);
    x += Scalar(1) / (2 * Scalar(denom));
    x.canonicalize();
    coords[w] = {x};
    map[w] = w >> 1;
    names[w] = word;
  }
  auto sys = FinitePointSystem::from_coordinates(std::move(coords), std::move(map));
  sys.set_names(std::move(names));
  return sys;
}

// ---------------------------------------------------------------------------

std::size_t ExtensionSystem::isolated_index(long j) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].kind == ZPoint::Kind::Isolated && points[i].j == j) return i;
  throw PreconditionError("no isolated point y_" + std::to_string(j));
}

std::size_t ExtensionSystem::layer_index(ZPoint::Kind kind, long label) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].kind == kind && points[i].label == label) return i;
  throw PreconditionError("no layer point with label " + std::to_string(label));
}

namespace {

struct Cut {
  std::size_t anchor_depth;
  std::uint64_t s_inner, s_outer;  // U_n and U_{n+1} periods
};

Cut slack_cut(const EmbeddingScheme& scheme, const ResiduePoint& z, std::size_t n, std::size_t m) {
  if (n == 0) throw PreconditionError("slack index n starts at 1");
  if (z.depth() != m) throw PreconditionError("anchor must be given at the refinement depth");
  const auto& spec = scheme.odometer_spec();
  if (!is_valid(spec, z)) throw PreconditionError("invalid anchor");
  std::size_t e = lrs_cylinder_depth(scheme, m, static_cast<long>(z.top()));
  if (e + n > m)
    throw PreconditionError("refinement " + std::to_string(m) + " cannot separate U_" +
                            std::to_string(n) + " from U_" + std::to_string(n + 1) +
                            "; use refinement >= " + std::to_string(e + n));
  return {e, spec.term(e + n - 1), spec.term(e + n)};
}

}  // namespace

Scalar certify_slack(const EmbeddingScheme& scheme_in, const ResiduePoint& z, std::size_t n,
                     std::size_t m) {
  EmbeddingScheme scheme = deep_enough(scheme_in, m);
  Cut cut = slack_cut(scheme, z, n, m);
  const SchemeLevel& lvl = scheme.level(m);
  const auto s = static_cast<long>(scheme.odometer_spec().term(m));
  const auto zl = static_cast<long>(z.top());
  const Interval& dz = *lvl.cell(zl).D;
  const Interval& dtz = *lvl.cell((zl + 1) % s).D;
  std::optional<Scalar> best;
  for (long c = 0; c < s; ++c) {
    auto uc = static_cast<std::uint64_t>(c);
    auto uz = static_cast<std::uint64_t>(zl);
    if (uc % cut.s_inner != uz % cut.s_inner || uc % cut.s_outer == uz % cut.s_outer) continue;
    Scalar bound = gap(dz, *lvl.cell(c).D) - supdist(dtz, *lvl.cell((c + 1) % s).D);
    if (!best || bound < *best) best = bound;
  }
  if (!best || sgn(*best) <= 0)
    throw PreconditionError("slack for U_" + std::to_string(n) + " not certified at refinement " +
                            std::to_string(m) + "; refine further");
  return *best / 2;
}

std::vector<Scalar> contraction_slack(const EmbeddingScheme& scheme, const ResiduePoint& z,
                                      std::size_t count, std::size_t m, const Scalar& scale) {
  std::vector<Scalar> a;
  for (std::size_t n = 1; n <= count; ++n) {
    Scalar v = certify_slack(scheme, z, n, m) * scale;
    Scalar cap = n == 1 ? Scalar(1, 4) : a.back() / 4;
    a.push_back(std::min(v, cap));
  }
  return a;
}

namespace {

Scalar power_of(unsigned base, std::uint64_t e) {
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), base, e);
  return Scalar(v);
}

std::map<long, Scalar> extension_heights(const std::vector<std::uint64_t>& k,
                                         const std::vector<Scalar>& a, long tail, unsigned base) {
  const std::size_t N = k.size();
  auto K = [&](std::size_t n) { return static_cast<long>(k[n - 1]); };
  auto A = [&](std::size_t n) { return a[n - 1]; };
  std::map<long, Scalar> h;
  for (std::size_t n = 1; n <= N; ++n) {
    h[-K(n)] = -1 + A(n + 1) / 2;
    h[-K(n) + 1] = -1 + A(n) + A(n + 1) / 2;
  }
  for (std::size_t n = 2; n <= N; ++n) {
    long span = K(n) - K(n - 1) - 1;
    for (long j = -K(n) + 2; j <= -K(n - 1); ++j) {
      if (h.count(j)) continue;
      Scalar t(-j - K(n - 1), 2 * span);
      t.canonicalize();
      h[j] = -1 + t * (A(n) + A(n + 1)) + A(n) / 2;
    }
  }
  for (long l = -K(1) + 2; l <= tail; ++l)
    if (!h.count(l)) h[l] = 1 - 1 / power_of(base, static_cast<std::uint64_t>(l + K(1)));
  return h;
}

}  // namespace

ExtensionSystem build_attractor_repellor(const EmbeddingScheme& scheme_in, const ResiduePoint& z,
                                         const ExtensionOptions& options) {
  if (options.levels == 0) throw PreconditionError("extension needs at least one level");
  if (options.tail < 0) throw PreconditionError("tail must be non-negative");
  if (options.tail_base < 2) throw PreconditionError("tail base must be at least 2");
  const std::size_t m = options.refine;
  const std::size_t N = options.levels;

  ExtensionSystem ext;
  ext.base = deep_enough(scheme_in, m);
  ext.anchor = z;
  ext.options = options;
  const EmbeddingScheme& scheme = ext.base;
  const auto& spec = scheme.odometer_spec();
  if (z.depth() != m) throw PreconditionError("anchor must be given at the refinement depth");
  if (!is_valid(spec, z)) throw PreconditionError("invalid anchor");
  ext.anchor_depth = lrs_cylinder_depth(scheme, m, static_cast<long>(z.top()));
  if (ext.anchor_depth + N + 1 > m)
    throw PreconditionError("refinement " + std::to_string(m) + " too shallow for " +
                            std::to_string(N) + " levels; use refinement >= " +
                            std::to_string(ext.anchor_depth + N + 1));

  for (std::size_t n = 1; n <= N; ++n)
    ext.k.push_back(first_backward_return_time(spec, z, ext.anchor_depth + n - 1));

  ext.offset = 0;
  ext.scale = 1;
  if (options.normalize) {
    const auto& cells = scheme.level(1).cells;
    Scalar lo = cells.front().D->lo, hi = cells.front().D->hi;
    for (const auto& c : cells) {
      lo = std::min(lo, c.D->lo);
      hi = std::max(hi, c.D->hi);
    }
    ext.offset = lo;
    ext.scale = 1 / (hi - lo);
  }
  for (std::size_t n = 1; n <= N + 1; ++n) ext.slack.push_back(certify_slack(scheme, z, n, m) * ext.scale);
  ext.a = contraction_slack(scheme, z, N + 1, m, ext.scale);
  ext.height = extension_heights(ext.k, ext.a, options.tail, options.tail_base);

  auto mids = depth_midpoints(scheme, m);
  const auto s = static_cast<long>(mids.size());
  auto xcoord = [&](long label) -> Scalar { return (mids[static_cast<std::size_t>(label)] - ext.offset) * ext.scale; };
  auto mod = [&](long v) { return ((v % s) + s) % s; };
  const auto zl = static_cast<long>(z.top());

  for (auto kind : {ZPoint::Kind::Attractor, ZPoint::Kind::Repellor})
    for (long i = 0; i < s; ++i)
      ext.points.push_back({kind, i, 0, xcoord(i), Scalar(kind == ZPoint::Kind::Attractor ? 1 : -1)});
  for (const auto& [j, h] : ext.height) ext.points.push_back({ZPoint::Kind::Isolated, mod(zl + j), j, xcoord(mod(zl + j)), h});

  const std::size_t n = ext.points.size();
  std::vector<std::vector<Scalar>> coords(n);
  std::vector<std::size_t> map(n);
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ZPoint& p = ext.points[i];
    coords[i] = {p.x, p.height};
    switch (p.kind) {
      case ZPoint::Kind::Attractor:
        map[i] = static_cast<std::size_t>(mod(p.label + 1));
        names[i] = "(x" + std::to_string(p.label) + ",+1)";
        break;
      case ZPoint::Kind::Repellor:
        map[i] = static_cast<std::size_t>(s + mod(p.label + 1));
        names[i] = "(x" + std::to_string(p.label) + ",-1)";
        break;
      case ZPoint::Kind::Isolated:
        map[i] = p.j < options.tail ? i + 1 : static_cast<std::size_t>(mod(p.label + 1));
        names[i] = "y" + std::to_string(p.j);
        break;
    }
  }
  ext.system = FinitePointSystem::from_coordinates(std::move(coords), std::move(map));
  ext.system.set_names(std::move(names));

  auto mid_eps = cylinder_eps(scheme, m, mids);
  const auto& sys = ext.system;
  // Isolated points whose next step does not move them closer to the repellor.
  std::vector<std::size_t> rising;
  for (const auto& [j, h] : ext.height)
    if (j == options.tail || ext.height.at(j + 1) >= h) rising.push_back(ext.isolated_index(j));

  std::vector<Scalar> eps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ZPoint& p = ext.points[i];
    if (p.kind == ZPoint::Kind::Isolated) {
      std::optional<Scalar> best;
      for (std::size_t o = 0; o < n; ++o)
        if (o != i && (!best || sys.dist(i, o) < *best)) best = sys.dist(i, o);
      eps[i] = *best;
      continue;
    }
    eps[i] = mid_eps[static_cast<std::size_t>(p.label)] * ext.scale;
    if (p.kind == ZPoint::Kind::Repellor) {
      if (p.label == zl) {
        eps[i] = std::min(eps[i], Scalar(ext.a[0] / 2));
      } else {
        for (auto r : rising) eps[i] = std::min(eps[i], sys.dist(i, r));
      }
    }
  }
  ext.system.set_eps(std::move(eps));
  return ext;
}

bool CheckReport::pass() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.pass; });
}

const CheckItem& CheckReport::item(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return i;
  throw PreconditionError("no check item named " + name);
}

namespace {

void fold_margin(CheckItem& item, const Scalar& margin) {
  if (!item.margin || margin < *item.margin) item.margin = margin;
  if (sgn(margin) <= 0) item.pass = false;
}

CheckItem lrs_item(const FinitePointSystem& sys, std::size_t jobs) {
  CheckItem item;
  item.name = "lrs within eps";
  LrsResult r = check_lrs(sys, jobs);
  item.pass = r.pass;
  item.margin = r.min_margin;
  if (r.witness)
    item.witnesses.push_back(sys.name(r.witness->x) + " vs " + sys.name(r.witness->y) + ": d = " +
                             to_string(r.witness->distance) + ", d(image) = " +
                             to_string(r.witness->image_distance));
  return item;
}

}  // namespace

CheckReport verify_extension_lrs(const ExtensionSystem& ext, std::size_t jobs) {
  CheckReport rep;
  rep.check = "extension lrs";
  const auto& sys = ext.system;

  CheckItem decay;
  decay.name = "slack decay a_1 < 1/2, a_{n+1} < a_n/2";
  fold_margin(decay, Scalar(1, 2) - ext.a[0]);
  for (std::size_t i = 0; i + 1 < ext.a.size(); ++i) fold_margin(decay, ext.a[i] / 2 - ext.a[i + 1]);
  for (std::size_t i = 0; i < ext.a.size(); ++i) {
    fold_margin(decay, ext.a[i]);
    fold_margin(decay, 2 * ext.slack[i] - ext.a[i]);
  }
  rep.items.push_back(decay);

  CheckItem iso;
  iso.name = "isolated points";
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (ext.points[i].kind != ZPoint::Kind::Isolated) continue;
    // Distance to the layers X x {+-1} is at least the height gap.
    fold_margin(iso, 1 - abs(ext.points[i].height));
    for (std::size_t o = 0; o < sys.size(); ++o)
      if (o != i) fold_margin(iso, sys.dist(i, o));
  }
  rep.items.push_back(iso);

  rep.items.push_back(lrs_item(sys, jobs));

  CheckItem crit;
  crit.name = "critical pairs ((z,-1), y_{-k_n})";
  const auto zi = ext.layer_index(ZPoint::Kind::Repellor, static_cast<long>(ext.anchor.top()));
  for (auto kn : ext.k) {
    auto yi = ext.isolated_index(-static_cast<long>(kn));
    Scalar margin = sys.dist(zi, yi) - sys.dist(sys.image(zi), sys.image(yi));
    fold_margin(crit, margin);
    if (sgn(margin) <= 0) crit.witnesses.push_back("n with k_n = " + std::to_string(kn));
  }
  rep.items.push_back(crit);

  CheckItem mono;
  mono.name = "backward orbit approaches the repellor";
  const long k1 = static_cast<long>(ext.k.front());
  for (const auto& [j, h] : ext.height) {
    if (j >= -k1) break;
    bool jump = std::find(ext.k.begin(), ext.k.end(), static_cast<std::uint64_t>(-j)) != ext.k.end();
    if (jump) continue;
    Scalar margin = h - ext.height.at(j + 1);
    fold_margin(mono, margin);
    if (sgn(margin) <= 0) mono.witnesses.push_back("y_" + std::to_string(j));
  }
  rep.items.push_back(mono);

  CheckItem attract;
  attract.name = "forward orbit rises toward the attractor";
  for (const auto& [j, h] : ext.height) {
    if (j < -k1 || j >= ext.options.tail) continue;
    Scalar margin = ext.height.at(j + 1) - h;
    fold_margin(attract, margin);
    if (sgn(margin) <= 0) attract.witnesses.push_back("y_" + std::to_string(j));
  }
  rep.items.push_back(attract);
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<Scalar> deform(const Scalar& x, const Scalar& y, const Scalar& w) {
  if (y > 0 || y < -2) throw PreconditionError("second coordinate outside [-2, 0]");
  Scalar lambda = y >= -1 ? Scalar(-y) : Scalar(1);
  return {x * lambda, y, w * lambda};
}

DeformedTripleSystem build_fixed_point_system(const EmbeddingScheme& first, const ResiduePoint& z,
                                              ExtensionOptions options,
                                              const EmbeddingScheme& second,
                                              std::size_t second_depth) {
  options.normalize = true;
  DeformedTripleSystem out;
  out.ext = build_attractor_repellor(first, z, options);
  out.second = deep_enough(second, second_depth);
  out.second_depth = second_depth;
  const ExtensionSystem& ext = out.ext;

  for (const auto& [j, h] : ext.height) {
    Scalar y = h - 1;
    if (y < -1) continue;
    Scalar next = j < options.tail ? ext.height.at(j + 1) - 1 : Scalar(0);
    if (abs(y) <= abs(next))
      throw PreconditionError("|y| > |pi_2 F(y)| fails at y_" + std::to_string(j) +
                              "; the tail does not approach the attractor monotonically");
  }

  {
    const auto& cells = out.second.level(1).cells;
    Scalar lo = cells.front().D->lo, hi = cells.front().D->hi;
    for (const auto& c : cells) {
      lo = std::min(lo, c.D->lo);
      hi = std::max(hi, c.D->hi);
    }
    out.second_offset = lo;
    out.second_scale = 1 / (hi - lo);
  }
  auto mids2 = depth_midpoints(out.second, second_depth);
  auto eps2 = cylinder_eps(out.second, second_depth, mids2);
  const std::size_t s2 = mids2.size();
  const std::size_t s1 = ext.system.size() == 0 ? 0 : out.ext.base.odometer_spec().term(options.refine);
  out.artifact_period = std::min<std::uint64_t>(s1, s2);

  WPoint collapsed;
  collapsed.collapsed = true;
  out.points.push_back(collapsed);
  out.collapsed = 0;
  std::vector<std::size_t> slot(ext.points.size(), 0);  // first W index of each Z point
  for (std::size_t i = 0; i < ext.points.size(); ++i) {
    const ZPoint& p = ext.points[i];
    if (p.kind == ZPoint::Kind::Attractor) continue;
    slot[i] = out.points.size();
    for (std::size_t q = 0; q < s2; ++q) {
      WPoint w;
      w.z = i;
      w.label2 = static_cast<long>(q);
      w.x = p.x;
      w.y = p.height - 1;
      w.w = (mids2[q] - out.second_offset) * out.second_scale;
      out.points.push_back(std::move(w));
    }
  }

  const std::size_t n = out.points.size();
  std::vector<std::vector<Scalar>> coords(n);
  std::vector<std::size_t> map(n);
  std::vector<std::string> names(n);
  coords[0] = {0, 0, 0};
  map[0] = 0;
  names[0] = "fixed";
  for (std::size_t i = 1; i < n; ++i) {
    const WPoint& w = out.points[i];
    coords[i] = deform(w.x, w.y, w.w);
    std::size_t zi = ext.system.image(w.z);
    map[i] = ext.points[zi].kind == ZPoint::Kind::Attractor
                 ? 0
                 : slot[zi] + (static_cast<std::size_t>(w.label2) + 1) % s2;
    names[i] = "(" + ext.system.name(w.z) + ",w" + std::to_string(w.label2) + ")";
  }
  out.system = FinitePointSystem::from_coordinates(std::move(coords), std::move(map));
  out.system.set_names(std::move(names));

  const auto& sys = out.system;
  auto regime = [&](std::size_t i) { return i == 0 ? 1 : (out.points[i].y >= -1 ? 1 : 0); };
  std::vector<Scalar> eps(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<Scalar> e;
    auto cap = [&](const Scalar& v) {
      if (!e || v < *e) e = v;
    };
    if (i == 0) {
      for (std::size_t o = 1; o < n; ++o)
        if (out.points[o].y < -1) cap(sys.dist(0, o));
    } else {
      const WPoint& w = out.points[i];
      const ZPoint& p = ext.points[w.z];
      Scalar lambda = w.y >= -1 ? Scalar(-w.y) : Scalar(1);
      cap(lambda * eps2[static_cast<std::size_t>(w.label2)] * out.second_scale);
      if (p.kind == ZPoint::Kind::Isolated) {
        for (std::size_t o = 0; o < n; ++o)
          if (o != i && (o == 0 || out.points[o].z != w.z)) cap(sys.dist(i, o));
      } else {
        cap((*ext.system.eps())[w.z]);
      }
      for (std::size_t o = 0; o < n; ++o)
        if (regime(o) != regime(i)) cap(sys.dist(i, o));
    }
    eps[i] = e ? *e : Scalar(1);
  }
  out.system.set_eps(std::move(eps));
  return out;
}

std::vector<std::size_t> periodic_points(const DeformedTripleSystem& sys) {
  std::vector<std::size_t> out;
  for (const auto& c : cycles(sys.system))
    if (c.size() < sys.artifact_period) out.insert(out.end(), c.begin(), c.end());
  std::sort(out.begin(), out.end());
  return out;
}

CheckReport verify_deformed_lrs(const DeformedTripleSystem& w, std::size_t jobs) {
  CheckReport rep;
  rep.check = "deformed lrs";
  const auto& sys = w.system;
  rep.items.push_back(lrs_item(sys, jobs));

  CheckItem fixed;
  fixed.name = "strict contraction toward the fixed point";
  for (std::size_t i = 1; i < sys.size(); ++i) {
    if (w.points[i].y < -1) continue;
    Scalar margin = sys.dist(w.collapsed, i) - sys.dist(w.collapsed, sys.image(i));
    fold_margin(fixed, margin);
    if (sgn(margin) <= 0 && fixed.witnesses.size() < 16) fixed.witnesses.push_back(sys.name(i));
  }
  rep.items.push_back(fixed);

  CheckItem factor;
  factor.name = "|y| > 3 |pi_2 F(y)| on [-1, 0)";
  const auto& ext = w.ext;
  for (const auto& [j, h] : ext.height) {
    Scalar y = h - 1;
    if (y < -1) continue;
    Scalar next = j < ext.options.tail ? ext.height.at(j + 1) - 1 : Scalar(0);
    Scalar margin = abs(y) - 3 * abs(next);
    fold_margin(factor, margin);
    if (sgn(margin) <= 0) factor.witnesses.push_back("y_" + std::to_string(j));
  }
  rep.items.push_back(factor);

  CheckItem seam;
  seam.name = "deformed metric equals the sum metric on y = -1";
  Scalar minus_one(-1);
  for (std::size_t a = 1; a < sys.size(); ++a)
    for (std::size_t b = 1; b < sys.size(); ++b) {
      const WPoint& p = w.points[a];
      const WPoint& q = w.points[b];
      auto u = deform(p.x, minus_one, p.w);
      auto v = deform(q.x, minus_one, q.w);
      Scalar deformed = abs(u[0] - v[0]) + abs(u[1] - v[1]) + abs(u[2] - v[2]);
      Scalar plain = abs(p.x - q.x) + abs(p.w - q.w);
      if (deformed != plain) {
        seam.pass = false;
        if (seam.witnesses.size() < 16) seam.witnesses.push_back(sys.name(a) + " vs " + sys.name(b));
      }
    }
  rep.items.push_back(seam);
  return rep;
}

}  // namespace cantor
