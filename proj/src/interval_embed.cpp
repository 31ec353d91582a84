#include "cantor/interval_embed.hpp"

#include <algorithm>

#include "cantor/parallel.hpp"

namespace cantor {

namespace {

constexpr std::size_t kGraphSplit = 12;

std::int64_t as_exponent(std::uint64_t v) {
  if (v > static_cast<std::uint64_t>(INT64_MAX)) throw PreconditionError("exponent overflow");
  return static_cast<std::int64_t>(v);
}

}  // namespace

const SchemeCell& SchemeLevel::cell(long label) const {
  auto it = index_.find(label);
  if (it == index_.end())
    throw PreconditionError("no cell with label " + std::to_string(label) + " at level " +
                            std::to_string(n));
  return cells[it->second];
}

void SchemeLevel::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < cells.size(); ++i) index_[cells[i].label] = i;
}

bool SchemeLevel::is_exceptional(long label) const {
  return std::find(exceptional.begin(), exceptional.end(), label) != exceptional.end();
}

const OdometerSpec& EmbeddingScheme::odometer_spec() const {
  if (kind_ != SchemeKind::Odometer) throw PreconditionError("scheme is not an odometer scheme");
  return std::get<OdometerSpec>(source_);
}

const CoverSequence& EmbeddingScheme::cover() const {
  if (kind_ != SchemeKind::Graph || !cover_) throw PreconditionError("scheme is not a graph scheme");
  return *cover_;
}

const SchemeLevel& EmbeddingScheme::level(std::size_t n) const {
  if (n < first_ || n > depth())
    throw PreconditionError("level " + std::to_string(n) + " not built (levels " +
                            std::to_string(first_) + ".." + std::to_string(depth()) + ")");
  return levels_[n - first_];
}

SchemeLevel& EmbeddingScheme::mutable_level(std::size_t n) {
  return const_cast<SchemeLevel&>(std::as_const(*this).level(n));
}

std::vector<long> EmbeddingScheme::successors(std::size_t n, long label) const {
  if (kind_ == SchemeKind::Odometer) {
    auto s = static_cast<long>(odometer_spec().term(n));
    if (label < 0 || label >= s) throw PreconditionError("label out of range");
    return {(label + 1) % s};
  }
  const CycleLevel& lvl = cover().levels.at(n);
  std::size_t v = lvl.vertex_from_signed(label);
  std::vector<long> out;
  for (auto [a, b] : lvl.graph().edges)
    if (a == v) out.push_back(lvl.signed_index(b));
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<long>& EmbeddingScheme::children(std::size_t n, long label) const {
  static const std::vector<long> none;
  if (n < first_ || n >= depth()) return none;
  const auto& m = children_[n - first_];
  auto it = m.find(label);
  return it == m.end() ? none : it->second;
}

Scalar EmbeddingScheme::closed_form_bound(std::size_t j) const {
  if (kind_ == SchemeKind::Odometer) {
    const auto& spec = odometer_spec();
    std::uint64_t k = spec.k(j + 1);
    return pow2(-as_exponent(j * k), Scalar(static_cast<unsigned long>(3 * k)));
  }
  auto s = cover().levels.at(j).vertex_count();
  return pow2(-as_exponent(s), Scalar(12));
}

void EmbeddingScheme::link() {
  children_.assign(levels_.size(), {});
  for (auto& lvl : levels_) lvl.reindex();
  for (std::size_t i = 1; i < levels_.size(); ++i)
    for (const auto& c : levels_[i].cells)
      if (c.parent && c.D) children_[i - 1][*c.parent].push_back(c.label);
  for (auto& m : children_)
    for (auto& [label, kids] : m) std::sort(kids.begin(), kids.end());
}

Scalar odometer_length(const OdometerSpec& spec, std::size_t n, std::uint64_t i, const Scalar& a_n) {
  std::uint64_t s = spec.term(n);
  std::uint64_t offset = (spec.term(n - 1) + 1) % s;
  std::uint64_t m = (i % s + s - offset) % s;
  return pow2(-as_exponent(n * spec.k(n + 1) * m), a_n / 3);
}

Scalar graph_length(const CoverSequence& seq, std::size_t n, std::size_t vertex,
                    const Scalar& a_prev) {
  const CycleLevel& lvl = seq.levels.at(n);
  std::uint64_t s = lvl.vertex_count();
  std::uint64_t threshold = n == 0 ? 1 : seq.levels[n - 1].cycle_length(1);
  auto lab = lvl.label(vertex);
  std::uint64_t e;
  if (lab.cycle == 0)
    e = 2 * s * s;
  else if (lab.pos <= threshold)
    e = 2 * s * s + lab.pos * s;
  else
    e = s * s + lab.pos * s;
  return pow2(-as_exponent(e), a_prev / 3);
}

EmbeddingScheme build_odometer_scheme(const OdometerSpec& spec, std::size_t depth) {
  if (depth == 0) throw PreconditionError("scheme depth must be at least 1");
  spec.require_embeddable(depth);

  EmbeddingScheme scheme;
  scheme.kind_ = SchemeKind::Odometer;
  scheme.source_ = spec;
  scheme.first_ = 1;

  SchemeLevel first;
  first.n = 1;
  first.a = Scalar(1, 2);
  std::uint64_t s1 = spec.term(1);
  first.b = pow2(-as_exponent(spec.k(2) * (s1 - 1)), first.a);
  for (std::uint64_t i = 0; i < s1; ++i) {
    SchemeCell c;
    c.label = static_cast<long>(i);
    c.A = make_interval(Scalar(static_cast<unsigned long>(i)),
                        Scalar(static_cast<unsigned long>(i)) + first.a);
    c.D = middle_subinterval(c.A, odometer_length(spec, 1, i, first.a));
    first.cells.push_back(std::move(c));
  }
  first.exceptional = {static_cast<long>(spec.term(0) % s1)};
  scheme.levels_.push_back(std::move(first));

  for (std::size_t n = 1; n < depth; ++n) {
    const SchemeLevel& prev = scheme.levels_.back();
    std::uint64_t sn = spec.term(n), sn1 = spec.term(n + 1), k = spec.k(n + 1);
    SchemeLevel next;
    next.n = n + 1;
    next.a = pow2(-as_exponent(n), prev.b) / Scalar(static_cast<unsigned long>(k));
    next.b = pow2(-as_exponent((n + 1) * spec.k(n + 2) * (sn1 - 1)), next.a);
    next.cells.resize(sn1);
    for (std::uint64_t i = 0; i < sn; ++i) {
      auto parts = split_equal(*prev.cells[i].D, k);
      // Children j = i + r s_n are placed left to right in increasing j.
      for (std::uint64_t r = 0; r < k; ++r) {
        std::uint64_t j = i + r * sn;
        SchemeCell& c = next.cells[j];
        c.label = static_cast<long>(j);
        c.parent = static_cast<long>(i);
        c.A = parts[r];
        c.D = middle_subinterval(c.A, odometer_length(spec, n + 1, j, next.a));
      }
    }
    next.exceptional = {static_cast<long>(sn)};
    scheme.levels_.push_back(std::move(next));
  }
  scheme.link();
  return scheme;
}

EmbeddingScheme build_graph_scheme(const CoverSequence& seq, std::size_t depth) {
  if (depth > seq.top())
    throw PreconditionError("graph scheme depth " + std::to_string(depth) + " exceeds tower height " +
                            std::to_string(seq.top()));
  for (const auto& lvl : seq.levels)
    if (lvl.cycle_count() != 2) throw PreconditionError("graph scheme needs two-cycle levels");

  EmbeddingScheme scheme;
  scheme.kind_ = SchemeKind::Graph;
  scheme.source_ = GraphSource{seq.variant, seq.top()};
  scheme.cover_ = std::make_shared<const CoverSequence>(seq);
  scheme.first_ = 0;

  auto exceptional_for = [&](std::size_t n) {
    const CycleLevel& lvl = seq.levels[n];
    long t = n == 0 ? 1 : static_cast<long>(seq.levels[n - 1].cycle_length(1));
    std::vector<long> ex;
    for (long eta : {-t, t})
      if (lvl.has_signed(eta)) ex.push_back(eta);
    return ex;
  };

  {
    const CycleLevel& lvl = seq.levels[0];
    SchemeLevel zero;
    zero.n = 0;
    zero.a = Scalar(1, 2);
    auto s0 = static_cast<long>(lvl.vertex_count());
    zero.b = pow2(-as_exponent(3 * static_cast<std::uint64_t>(s0 * s0)), zero.a);
    for (long i = -s0 + 1; i <= s0 - 1; ++i) {
      SchemeCell c;
      c.label = i;
      c.A = make_interval(Scalar(i), Scalar(i) + zero.a);
      if (lvl.has_signed(i))
        c.D = middle_subinterval(c.A, graph_length(seq, 0, lvl.vertex_from_signed(i), zero.a));
      zero.cells.push_back(std::move(c));
    }
    zero.exceptional = exceptional_for(0);
    zero.reindex();
    scheme.levels_.push_back(std::move(zero));
  }

  for (std::size_t n = 0; n < depth; ++n) {
    const SchemeLevel& prev = scheme.levels_.back();
    const CycleLevel& lower = seq.levels[n];
    const CycleLevel& upper = seq.levels[n + 1];
    const VertexMap& hom = seq.homs[n];

    std::map<std::size_t, std::vector<Interval>> parts;
    std::vector<std::size_t> used(lower.vertex_count(), 0);
    SchemeLevel next;
    next.n = n + 1;
    // Preimages take parts in dense vertex order: base, cycle 1, cycle 2.
    for (std::size_t w = 0; w < upper.vertex_count(); ++w) {
      std::size_t v = hom[w];
      long parent_label = lower.signed_index(v);
      if (used[v] >= kGraphSplit)
        throw PreconditionError(lower.name(v) + " has more than 12 preimages");
      auto it = parts.find(v);
      if (it == parts.end())
        it = parts.emplace(v, split_equal(*prev.cell(parent_label).D, kGraphSplit)).first;
      SchemeCell c;
      c.label = upper.signed_index(w);
      c.parent = parent_label;
      c.A = it->second[used[v]++];
      c.D = middle_subinterval(c.A, graph_length(seq, n + 1, w, prev.a));
      next.cells.push_back(std::move(c));
    }
    std::sort(next.cells.begin(), next.cells.end(),
              [](const SchemeCell& x, const SchemeCell& y) { return x.label < y.label; });
    next.a = next.cells.front().A.diam();
    for (const auto& c : next.cells)
      if (c.A.diam() > next.a) next.a = c.A.diam();
    std::uint64_t s = upper.vertex_count();
    next.b = pow2(-as_exponent(3 * s * s), next.a);
    next.exceptional = exceptional_for(n + 1);
    next.reindex();
    scheme.levels_.push_back(std::move(next));
  }
  scheme.link();
  return scheme;
}

EmbeddingScheme build_scheme(const SchemeSource& source, std::size_t depth) {
  if (const auto* spec = std::get_if<OdometerSpec>(&source)) return build_odometer_scheme(*spec, depth);
  const auto& g = std::get<GraphSource>(source);
  return build_graph_scheme(build_sequence(g.variant, std::max(g.levels, depth)), depth);
}

EmbeddingScheme assemble_scheme(SchemeKind kind, SchemeSource source,
                                std::vector<SchemeLevel> levels) {
  if (levels.empty()) throw PreconditionError("scheme has no levels");
  EmbeddingScheme scheme;
  scheme.kind_ = kind;
  scheme.source_ = std::move(source);
  scheme.first_ = levels.front().n;
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i].n != scheme.first_ + i) throw PreconditionError("scheme levels not consecutive");
  if (kind == SchemeKind::Graph) {
    const auto& g = std::get<GraphSource>(scheme.source_);
    scheme.cover_ = std::make_shared<const CoverSequence>(
        build_sequence(g.variant, std::max(g.levels, levels.back().n)));
  }
  scheme.levels_ = std::move(levels);
  scheme.link();
  return scheme;
}

Interval cylinder(const EmbeddingScheme& scheme, const ResiduePoint& p, std::size_t depth) {
  if (scheme.kind() != SchemeKind::Odometer)
    throw PreconditionError("residue points index odometer schemes only");
  if (depth == 0 || depth > p.depth() || depth > scheme.depth())
    throw PreconditionError("cylinder depth exceeds built levels");
  return *scheme.level(depth).cell(static_cast<long>(p.digits[depth - 1])).D;
}

Interval cylinder(const EmbeddingScheme& scheme, const VertexThread& t, std::size_t depth) {
  if (scheme.kind() != SchemeKind::Graph)
    throw PreconditionError("vertex threads index graph schemes only");
  if (depth >= t.size() || depth > scheme.depth())
    throw PreconditionError("cylinder depth exceeds built levels");
  long label = scheme.cover().levels[depth].signed_index(t[depth]);
  return *scheme.level(depth).cell(label).D;
}

std::vector<long> induced_map_label(const EmbeddingScheme& scheme, long label, std::size_t depth) {
  return scheme.successors(depth, label);
}

bool SchemeAudit::pass() const {
  return std::all_of(items.begin(), items.end(), [](const AuditItem& i) { return i.pass; });
}

const AuditItem& SchemeAudit::item(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return i;
  throw PreconditionError("no audit item named " + name);
}

namespace {

struct Auditor {
  SchemeAudit audit;
  AuditItem& get(const std::string& name) {
    for (auto& i : audit.items)
      if (i.name == name) return i;
    audit.items.push_back({name, true, ""});
    return audit.items.back();
  }
  void check(const std::string& name, bool ok, const std::string& detail) {
    auto& i = get(name);
    if (!ok && i.pass) {
      i.pass = false;
      i.detail = detail;
    }
  }
};

std::string where(std::size_t n, long label) {
  return "level " + std::to_string(n) + " label " + std::to_string(label);
}

}  // namespace

SchemeAudit audit_scheme(const EmbeddingScheme& scheme) {
  Auditor au;
  const bool odo = scheme.kind() == SchemeKind::Odometer;
  for (std::size_t n = scheme.first_level(); n <= scheme.depth(); ++n) {
    const SchemeLevel& lvl = scheme.level(n);

    std::vector<const SchemeCell*> by_a;
    for (const auto& c : lvl.cells) by_a.push_back(&c);
    std::sort(by_a.begin(), by_a.end(),
              [](const SchemeCell* x, const SchemeCell* y) { return x->A.lo < y->A.lo; });
    for (std::size_t i = 0; i + 1 < by_a.size(); ++i)
      au.check("A interiors disjoint", interiors_disjoint(by_a[i]->A, by_a[i + 1]->A),
               where(n, by_a[i]->label));
    std::vector<const SchemeCell*> by_d;
    for (auto* c : by_a)
      if (c->D) by_d.push_back(c);
    for (std::size_t i = 0; i + 1 < by_d.size(); ++i)
      au.check("D pairwise disjoint", disjoint(*by_d[i]->D, *by_d[i + 1]->D),
               where(n, by_d[i]->label));

    Scalar min_d, max_d;
    bool first = true;
    for (const auto& c : lvl.cells) {
      if (!c.D) continue;
      const Interval& D = *c.D;
      au.check("D centred inside A",
               D.strictly_inside(c.A) && (D.lo - c.A.lo) == (c.A.hi - D.hi), where(n, c.label));
      au.check("diam D <= 2^-n", D.diam() <= pow2(-static_cast<std::int64_t>(n)), where(n, c.label));
      if (first || D.diam() < min_d) min_d = D.diam();
      if (first || D.diam() > max_d) max_d = D.diam();
      first = false;
      if (c.parent) {
        const SchemeLevel& up = scheme.level(n - 1);
        const SchemeCell& p = up.cell(*c.parent);
        au.check("A nested in parent D", p.D && c.A.inside(*p.D), where(n, c.label));
        if (odo) {
          auto s = static_cast<long>(scheme.odometer_spec().term(n - 1));
          au.check("congruence nesting", c.label % s == *c.parent, where(n, c.label));
        } else {
          const CoverSequence& seq = scheme.cover();
          std::size_t w = seq.levels[n].vertex_from_signed(c.label);
          au.check("cover nesting", seq.levels[n - 1].signed_index(seq.homs[n - 1][w]) == *c.parent,
                   where(n, c.label));
          au.check("A = parent D / 12", c.A.diam() * kGraphSplit == p.D->diam(), where(n, c.label));
        }
      }
      if (odo) {
        Scalar three_d = 3 * D.diam();
        au.check("sandwich a_n >= 3 diam D >= b_n", lvl.a >= three_d && three_d >= lvl.b,
                 where(n, c.label));
        if (n > 3) au.check("diam A / 3 >= diam D", c.A.diam() / 3 >= D.diam(), where(n, c.label));
      } else {
        au.check("diam A > 3 diam D", c.A.diam() > 3 * D.diam(), where(n, c.label));
      }
    }
    if (odo) {
      const auto& spec = scheme.odometer_spec();
      std::uint64_t s = spec.term(n), start = (spec.term(n - 1) + 1) % s;
      for (std::uint64_t m = 0; m + 1 < s; ++m) {
        long x = static_cast<long>((start + m) % s), y = static_cast<long>((start + m + 1) % s);
        au.check("length chain l(s_{n-1}+1) > ... > l(s_{n-1})",
                 lvl.cell(x).D->diam() > lvl.cell(y).D->diam(), where(n, x));
      }
    } else if (!first) {
      au.check("min diam D >= b_n", min_d >= lvl.b, "level " + std::to_string(n));
    }
  }
  return au.audit;
}

namespace {

std::vector<PairRecord> parent_pairs(const EmbeddingScheme& scheme, std::size_t j, long parent) {
  std::vector<PairRecord> out;
  const auto& kids = scheme.children(j, parent);
  const SchemeLevel& lower = scheme.level(j + 1);
  for (std::size_t x = 0; x < kids.size(); ++x) {
    for (std::size_t y = x + 1; y < kids.size(); ++y) {
      const SchemeCell& cx = lower.cell(kids[x]);
      const SchemeCell& cy = lower.cell(kids[y]);
      Scalar g = gap(*cx.D, *cy.D);
      for (long u : scheme.successors(j + 1, kids[x]))
        for (long v : scheme.successors(j + 1, kids[y])) {
          PairRecord r;
          r.parent = parent;
          r.first = kids[x];
          r.second = kids[y];
          r.first_image = u;
          r.second_image = v;
          r.source_gap = g;
          r.image_spread = supdist(lower.cell(u).A, lower.cell(v).A);
          out.push_back(std::move(r));
        }
    }
  }
  return out;
}

// a/b > c/d for positive b, d without forming the quotients.
bool ratio_greater(const PairRecord& x, const PairRecord& y) {
  return x.image_spread * y.source_gap > y.image_spread * x.source_gap;
}

std::vector<long> parents_with_d(const EmbeddingScheme& scheme, std::size_t j) {
  std::vector<long> labels;
  for (const auto& c : scheme.level(j).cells)
    if (c.D) labels.push_back(c.label);
  return labels;
}

void require_next_level(const EmbeddingScheme& scheme, std::size_t j) {
  if (j < scheme.first_level() || j + 1 > scheme.depth())
    throw PreconditionError("depth " + std::to_string(j) + " needs level " + std::to_string(j + 1) +
                            " built (built through " + std::to_string(scheme.depth()) + ")");
}

}  // namespace

RatioReport derivative_ratio_bound(const EmbeddingScheme& scheme, std::size_t j, std::size_t jobs) {
  require_next_level(scheme, j);
  auto parents = parents_with_d(scheme, j);
  std::vector<std::vector<PairRecord>> per(parents.size());
  parallel_for(parents.size(), jobs, [&](std::size_t i) { per[i] = parent_pairs(scheme, j, parents[i]); });

  RatioReport rep;
  rep.depth = j;
  rep.closed_form_bound = scheme.closed_form_bound(j);
  const SchemeLevel& lvl = scheme.level(j);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const PairRecord* best = nullptr;
    for (const auto& r : per[i])
      if (!best || ratio_greater(r, *best)) best = &r;
    if (!best) continue;
    Scalar own = best->image_spread / best->source_gap;
    if (lvl.is_exceptional(parents[i])) {
      rep.exceptional.emplace_back(parents[i], own);
      continue;
    }
    if (!rep.argmax || ratio_greater(*best, *rep.argmax)) rep.argmax = *best;
    if (scheme.is_branch(j, parents[i])) {
      rep.branch.emplace_back(parents[i], own);
    } else if (own > rep.max_ratio_off_branch) {
      rep.max_ratio_off_branch = own;
    }
  }
  if (rep.argmax) rep.max_ratio = rep.argmax->image_spread / rep.argmax->source_gap;
  return rep;
}

LrsPairReport verify_lrs_pairs(const EmbeddingScheme& scheme, std::size_t d, std::size_t jobs) {
  require_next_level(scheme, d);
  auto parents = parents_with_d(scheme, d);
  std::vector<std::vector<PairRecord>> per(parents.size());
  const SchemeLevel& lvl = scheme.level(d);
  parallel_for(parents.size(), jobs, [&](std::size_t i) {
    if (!lvl.is_exceptional(parents[i])) per[i] = parent_pairs(scheme, d, parents[i]);
  });

  LrsPairReport rep;
  rep.depth = d;
  bool have_margin = false;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (lvl.is_exceptional(parents[i])) {
      rep.excluded_parents.push_back(parents[i]);
      continue;
    }
    bool branch = scheme.is_branch(d, parents[i]);
    if (branch) rep.branch_parents.push_back(parents[i]);
    for (auto& r : per[i]) {
      Scalar margin = r.source_gap - r.image_spread;
      ++rep.pairs_checked;
      if (!have_margin || margin < rep.min_margin) rep.min_margin = margin;
      have_margin = true;
      if (sgn(margin) <= 0) {
        rep.pass = false;
        if (!branch) rep.pass_off_branch = false;
        rep.failures.push_back(r);
      }
      rep.pairs.push_back(std::move(r));
    }
  }
  return rep;
}

BranchWitness all_base_expansion(const EmbeddingScheme& scheme, std::size_t j) {
  if (scheme.kind() != SchemeKind::Graph) throw PreconditionError("all-base thread needs a graph scheme");
  require_next_level(scheme, j);
  const SchemeLevel& lower = scheme.level(j + 1);
  // T of the all-base thread is the thread of first vertices on cycle 1.
  const Interval& x = *lower.cell(0).D;
  const Interval& tx = *lower.cell(1).D;
  BranchWitness best;
  best.depth = j;
  bool found = false;
  for (long c : scheme.children(j, 0)) {
    if (c == 0) continue;
    const Interval& y = *lower.cell(c).D;
    for (long u : scheme.successors(j + 1, c)) {
      const Interval& ty = *lower.cell(u).D;
      if (!interiors_disjoint(tx, ty)) continue;
      Scalar q = gap(tx, ty) / supdist(x, y);
      if (!found || q > best.lower_bound) {
        best.child = c;
        best.image = u;
        best.lower_bound = q;
        found = true;
      }
    }
  }
  return best;
}

std::vector<long> odometer_ratio_identity_violations(const EmbeddingScheme& scheme, std::size_t n) {
  const auto& spec = scheme.odometer_spec();
  const SchemeLevel& lvl = scheme.level(n);
  Scalar expected = pow2(-as_exponent(n * spec.k(n + 1)));
  std::vector<long> bad;
  auto s = static_cast<long>(spec.term(n));
  for (long z = 0; z < s; ++z) {
    if (lvl.is_exceptional(z)) continue;
    Scalar r = lvl.cell((z + 1) % s).D->diam() / lvl.cell(z).D->diam();
    if (r != expected) bad.push_back(z);
  }
  return bad;
}

}  // namespace cantor
