// Acceptance suite: one PASS/FAIL line per criterion, diagnostics indented
// below it. Exact margins go to acceptance_report.json in the working
// directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cantor/serialize.hpp"

using namespace cantor;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  Json margins = Json::object();

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED: " + what);
    }
  }
  void note(const std::string& text) { notes.push_back(text); }
};

std::string fmt(const Scalar& x) {
  std::string exact = to_string(x);
  if (exact.size() <= 60) return exact;
  return approx_string(x) + " (" + std::to_string(bit_size(x)) + "-bit rational)";
}

double log2_approx(const Scalar& x) { return log_approx(x) / std::log(2.0); }

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

EmbeddingScheme odometer(std::size_t depth) {
  return build_odometer_scheme(OdometerSpec::geometric(2, 2, depth), depth);
}

// 1 ------------------------------------------------------------------------
Outcome odometer_audits() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  auto scheme = odometer(8);
  auto audit = audit_scheme(scheme);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& item : audit.items) o.require(item.pass, item.name + ": " + item.detail);
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto& lvl = scheme.level(n);
    for (const auto& c : lvl.cells) {
      Scalar three_d = 3 * c.D->diam();
      if (!(lvl.a >= three_d && three_d >= lvl.b))
        o.require(false, "sandwich at level " + std::to_string(n) + " label " + std::to_string(c.label));
    }
  }
  o.require(secs < 60, "build and audit within 60 s");
  o.note(std::to_string(audit.items.size()) + " audit items, build+audit " + fixed(secs) + " s");
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome derivative_decay() {
  Outcome o;
  auto scheme = odometer(9);
  Scalar previous;
  const Scalar limit(1, 10000);
  for (std::size_t j = 1; j <= 8; ++j) {
    auto rep = derivative_ratio_bound(scheme, j);
    std::uint64_t k = scheme.odometer_spec().k(j + 1);
    Scalar bound = pow2(-static_cast<long>(j * k), Scalar(static_cast<unsigned long>(3 * k)));
    o.require(rep.closed_form_bound == bound, "closed form at depth " + std::to_string(j));
    o.require(rep.max_ratio <= bound, "ratio <= 3k/2^{jk} at depth " + std::to_string(j));
    if (j > 1) o.require(rep.max_ratio < previous, "strict decrease at depth " + std::to_string(j));
    previous = rep.max_ratio;
    o.note("depth " + std::to_string(j) + ": max ratio " + approx_string(rep.max_ratio) + " <= bound " +
           to_string(bound));
    o.margins["depth " + std::to_string(j)] = to_json(Scalar(bound - rep.max_ratio));
  }
  o.require(previous <= limit, "ratio <= 1e-4 at depth 8");
  return o;
}

// 3 ------------------------------------------------------------------------
Outcome diameter_identity() {
  Outcome o;
  auto scheme = odometer(8);
  const auto& spec = scheme.odometer_spec();
  std::size_t labels = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    auto bad = odometer_ratio_identity_violations(scheme, n);
    o.require(bad.empty(), "identity violated at level " + std::to_string(n));
    const auto& lvl = scheme.level(n);
    auto s = static_cast<long>(spec.term(n));
    Scalar expected = pow2(-static_cast<long>(n * spec.k(n + 1)));
    for (long i = 0; i < s; ++i) {
      if (i == static_cast<long>(spec.term(n - 1))) continue;
      Scalar ratio = lvl.cell((i + 1) % s).D->diam() / lvl.cell(i).D->diam();
      o.require(ratio == expected, "ratio at level " + std::to_string(n) + " label " + std::to_string(i));
      ++labels;
    }
  }
  // z_n = s_{n-1} happens at most once along any residue chain.
  std::size_t worst = 0;
  for (const auto& p : all_points(spec, 8)) {
    std::size_t hits = 0;
    for (std::size_t n = 1; n <= 8; ++n) hits += p.digits[n - 1] == spec.term(n - 1);
    worst = std::max(worst, hits);
  }
  o.require(worst <= 1, "at most one exceptional level per point");
  o.note(std::to_string(labels) + " non-exceptional labels checked; max exceptional levels per point = " +
         std::to_string(worst));
  return o;
}

// 4 ------------------------------------------------------------------------
Outcome weakly_mixing_tower() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  auto seq = build_weakly_mixing_sequence(4);
  auto audit = audit_covers(seq);
  o.require(audit.homomorphisms, "homomorphisms");
  o.require(audit.edge_surjective, "edge surjective");
  o.require(audit.bidirectional, "bidirectional");
  auto rec = cycle_length_recursion(TowerVariant::WeaklyMixing, 6);
  for (std::size_t n = 0; n < rec.size(); ++n)
    o.require(rec[n][1] == rec[n][0] + 1, "|c_2| = |c_1| + 1 at level " + std::to_string(n));
  std::size_t max_pre = 0;
  for (std::size_t n = 0; n < seq.top(); ++n) {
    o.require(check_minimality_certificate(seq, n).pass, "minimality at level " + std::to_string(n));
    o.require(check_weak_mixing_certificate(seq, n).pass, "weak mixing at level " + std::to_string(n));
    max_pre = std::max(max_pre, max_preimage_count(seq, n).first);
  }
  o.require(max_pre == 7, "max preimage count 7");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 10, "runtime under 10 s");
  o.note("cycle lengths at level 4: " + std::to_string(seq.levels[4].cycle_length(1)) + ", " +
         std::to_string(seq.levels[4].cycle_length(2)) + "; max preimage " + std::to_string(max_pre) + "; " +
         fixed(secs) + " s");
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome transitive_tower() {
  Outcome o;
  auto seq = build_transitive_sequence(4);
  std::size_t previous = 0;
  for (std::size_t n = 0; n <= seq.top(); ++n) {
    if (n < seq.top()) {
      o.require(check_transitivity_certificate(seq, n).pass, "transitivity at level " + std::to_string(n));
      auto minimal = check_minimality_certificate(seq, n);
      o.require(!minimal.pass && !minimal.witness.empty(), "minimality fails with witness at level " +
                                                                std::to_string(n));
      if (n == 0) o.note("minimality witness: " + minimal.witness);
    }
    auto cert = periodic_point_free_certificate(seq, n);
    o.require(cert.min_closed_path > previous, "minimal closed path grows at level " + std::to_string(n));
    previous = cert.min_closed_path;
  }
  auto sub = invariant_subsystem(seq);
  std::size_t expected = 2;
  std::string lengths;
  for (const auto& level : sub.levels) {
    o.require(level.cycle_count() == 1 && level.cycle_length(1) == expected, "restricted cycle 2*3^n");
    lengths += std::to_string(level.cycle_length(1)) + " ";
    expected *= 3;
  }
  o.note("restricted cycle lengths: " + lengths + "; min closed path at top level " + std::to_string(previous));
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome graph_scheme() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  auto scheme = build_graph_scheme(build_weakly_mixing_sequence(3), 3);
  auto audit = audit_scheme(scheme);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& item : audit.items) o.require(item.pass, item.name + ": " + item.detail);
  std::size_t bits = 0;
  for (std::size_t n = 0; n <= 3; ++n)
    for (const auto& c : scheme.level(n).cells)
      if (c.D) bits = std::max({bits, bit_size(c.D->lo), bit_size(c.D->hi)});
  o.require(secs < 300, "depth-3 build under 5 min");
  o.note("build+audit " + fixed(secs) + " s, largest endpoint " + std::to_string(bits) + " bits");
  for (std::size_t j = 0; j < 3; ++j) {
    auto rep = derivative_ratio_bound(scheme, j);
    o.require(rep.within_bound(), "ratio <= 12*2^{-s_n} at level " + std::to_string(j) + " (all parents)");
    o.note("level " + std::to_string(j) + ": bound log2 " + fixed(log2_approx(rep.closed_form_bound), 1) +
           ", max ratio log2 " + fixed(log2_approx(rep.max_ratio), 1) + ", off the base branch log2 " +
           fixed(log2_approx(rep.max_ratio_off_branch), 1) +
           (rep.within_bound_off_branch() ? " (within bound)" : " (above bound)"));
    auto w = all_base_expansion(scheme, j);
    o.note("  all-base thread: difference quotient >= 2^" + fixed(log2_approx(w.lower_bound), 1) +
           " (child " + std::to_string(w.child) + " -> " + std::to_string(w.image) + ")");
  }
  return o;
}

// 7 ------------------------------------------------------------------------
Outcome lrs_certificates() {
  Outcome o;
  auto odo = odometer(7);
  for (std::size_t d = 1; d <= 6; ++d) {
    auto rep = verify_lrs_pairs(odo, d);
    o.require(rep.pass && rep.min_margin > 0, "odometer depth " + std::to_string(d));
    o.margins["odometer depth " + std::to_string(d)] = to_json(rep.min_margin);
    o.note("odometer depth " + std::to_string(d) + ": " + std::to_string(rep.pairs_checked) +
           " pairs, min margin " + fmt(rep.min_margin));
  }

  auto graph = build_graph_scheme(build_weakly_mixing_sequence(2), 2);
  for (std::size_t d = 0; d < 2; ++d) {
    auto rep = verify_lrs_pairs(graph, d);
    std::string where = "graph children at level " + std::to_string(d + 1);
    o.require(rep.pass, where + " (all parents)");
    std::string first = rep.failures.empty() ? std::string("none")
                                              : "parent " + std::to_string(rep.failures.front().parent) +
                                                    " children " + std::to_string(rep.failures.front().first) +
                                                    "," + std::to_string(rep.failures.front().second);
    o.note(where + ": " + std::to_string(rep.pairs_checked) + " pairs, " + std::to_string(rep.failures.size()) +
           " failures (first: " + first + "); off the base branch " +
           (rep.pass_off_branch ? "all pass" : "failures remain"));
  }

  auto spec = OdometerSpec::geometric(2, 2, 6);
  auto mid = midpoint_system(build_odometer_scheme(spec, 3), 3);
  auto prod = product_system(mid, mid);
  auto prod_rep = check_lrs(prod);
  o.require(prod_rep.pass && prod_rep.min_margin && *prod_rep.min_margin > 0, "product system at depth 3");
  if (prod_rep.min_margin) {
    o.margins["product depth 3"] = to_json(*prod_rep.min_margin);
    o.note("product depth 3: " + std::to_string(prod_rep.pairs_checked) + " pairs, min margin " +
           fmt(*prod_rep.min_margin));
  }

  auto scheme5 = build_odometer_scheme(spec, 5);
  ExtensionOptions ext_opt;
  ext_opt.levels = 3;
  ext_opt.tail = 16;
  ext_opt.refine = 5;
  auto ext = build_attractor_repellor(scheme5, point_from_top(spec, 5, 0), ext_opt);
  auto ext_rep = verify_extension_lrs(ext);
  for (const auto& item : ext_rep.items) {
    o.require(item.pass, "extension: " + item.name);
    if (item.margin) {
      o.margins["extension: " + item.name] = to_json(*item.margin);
      o.note("extension " + item.name + ": margin " + fmt(*item.margin));
    }
  }

  auto scheme4 = build_odometer_scheme(spec, 4);
  ExtensionOptions w_opt;
  w_opt.levels = 2;
  w_opt.tail = 12;
  w_opt.refine = 4;
  w_opt.tail_base = 4;
  auto w = build_fixed_point_system(scheme4, point_from_top(spec, 4, 0), w_opt, scheme4, 2);
  auto w_rep = verify_deformed_lrs(w);
  for (const auto& item : w_rep.items) {
    o.require(item.pass, "deformed: " + item.name);
    if (item.margin) {
      o.margins["deformed: " + item.name] = to_json(*item.margin);
      o.note("deformed " + item.name + ": margin " + fmt(*item.margin));
    }
  }

  auto corrupt = build_odometer_scheme(spec, 3);
  for (auto& c : corrupt.mutable_level(2).cells) c.D = c.A;
  auto bad = verify_lrs_pairs(corrupt, 1);
  o.require(!bad.pass && !bad.failures.empty(), "corrupted scheme is rejected");
  if (!bad.failures.empty())
    o.note("corrupted control rejected: children " + std::to_string(bad.failures.front().first) + "," +
           std::to_string(bad.failures.front().second));
  return o;
}

// 8 ------------------------------------------------------------------------
Outcome shrinking_oracle() {
  Outcome o;
  auto a = shrinking_propositions_oracle(1000, 8, 42);
  auto b = shrinking_propositions_oracle(1000, 8, 42, 2);
  o.require(a.counterexamples == 0, "zero counterexamples");
  for (const auto& w : a.witnesses) o.note(w);
  o.require(canonical_dump(to_json(a)) == canonical_dump(to_json(b)), "deterministic under the seed");
  o.note(std::to_string(a.trials) + " systems, " + std::to_string(a.shrinking) + " shrinking, " +
         std::to_string(a.surjective_shrinking) + " surjective shrinking, " + std::to_string(a.counterexamples) +
         " counterexamples");
  return o;
}

// 9 ------------------------------------------------------------------------
Outcome entropy() {
  Outcome o;
  auto spec = OdometerSpec::geometric(2, 2, 3);
  auto mid = midpoint_system(build_odometer_scheme(spec, 3), 3);
  std::vector<std::size_t> steps{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<Scalar> eps{Scalar(1, 1000), Scalar(1, 100), Scalar(1, 10)};
  auto rows = entropy_estimate(mid, eps, steps);
  const double s3 = static_cast<double>(spec.term(3));
  std::string line;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    o.require(r.estimate <= std::log(s3) / double(r.n) + 1e-12, "estimate <= log(s_3)/n");
    if (i > 0 && rows[i - 1].eps == r.eps)
      o.require(r.estimate < rows[i - 1].estimate || (r.estimate == 0 && rows[i - 1].estimate == 0),
                "decreasing in n at eps " + to_string(r.eps));
    if (r.eps == eps.front()) line += std::to_string(r.count) + " ";
  }
  o.note("odometer counts at eps 1/1000, n = 1..8: " + line);
  auto shift = full_shift_system(6);
  auto srows = entropy_estimate(shift, {Scalar(1, 3)}, {6});
  double est = srows.front().estimate, log2v = std::log(2.0);
  o.require(std::abs(est - log2v) <= 0.15 * log2v, "shift estimate within 15% of log 2 at n = 6");
  o.note("shift: s(6, 1/3) = " + std::to_string(srows.front().count) + ", estimate " + fixed(est, 4) +
         " vs log 2 = " + fixed(log2v, 4));
  return o;
}

// 10 -----------------------------------------------------------------------
Outcome fixed_point_periodic() {
  Outcome o;
  auto spec = OdometerSpec::geometric(2, 2, 4);
  auto scheme = build_odometer_scheme(spec, 4);
  ExtensionOptions opt;
  opt.levels = 2;
  opt.tail = 12;
  opt.refine = 4;
  opt.tail_base = 4;
  auto w = build_fixed_point_system(scheme, point_from_top(spec, 4, 0), opt, scheme, 2);
  auto periodic = periodic_points(w);
  o.require(periodic == std::vector<std::size_t>{w.collapsed}, "exactly one periodic point, the collapsed one");
  o.require(fixed_points(w.system) == std::vector<std::size_t>{w.collapsed}, "the collapsed point is fixed");
  auto cyc = cycles(w.system);
  o.note(std::to_string(w.system.size()) + " points, " + std::to_string(cyc.size()) +
         " cycles; cycles of length >= " + std::to_string(w.artifact_period) +
         " are truncation artifacts of the odometer factors");
  return o;
}

// 11 -----------------------------------------------------------------------
Outcome determinism() {
  Outcome o;
  auto spec = OdometerSpec::explicit_list({2, 4, 8});
  std::vector<std::pair<std::string, std::function<std::string()>>> builds = {
      {"odometer scheme", [&] { return canonical_dump(to_json(build_odometer_scheme(spec, 6))); }},
      {"graph scheme",
       [] { return canonical_dump(to_json(build_graph_scheme(build_weakly_mixing_sequence(2), 2))); }},
      {"extension",
       [&] {
         ExtensionOptions opt;
         return canonical_dump(
             to_json(build_attractor_repellor(build_odometer_scheme(spec, 5), point_from_top(spec, 5, 0), opt)));
       }},
      {"fixed-point system",
       [&] {
         ExtensionOptions opt;
         opt.levels = 2;
         opt.tail = 12;
         opt.refine = 4;
         opt.tail_base = 4;
         auto scheme = build_odometer_scheme(spec, 4);
         return canonical_dump(to_json(build_fixed_point_system(scheme, point_from_top(spec, 4, 0), opt, scheme, 2)));
       }},
      {"product system",
       [&] {
         auto m = midpoint_system(build_odometer_scheme(spec, 3), 3);
         return canonical_dump(to_json(product_system(m, m)));
       }},
      {"oracle report", [] { return canonical_dump(to_json(shrinking_propositions_oracle(300, 8, 9))); }},
  };
  for (const auto& [name, build] : builds) {
    std::string a = build(), b = build();
    o.require(a == b, name + " byte-identical");
    o.note(name + ": " + std::to_string(a.size()) + " bytes, identical");
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"odometer scheme to depth 8: audits and sandwich", odometer_audits},
      {"derivative ratio decay below 3k/2^{jk}, strictly decreasing, <= 1e-4 at depth 8", derivative_decay},
      {"diameter ratio identity 2^{-n k_{n+1}}", diameter_identity},
      {"weakly mixing tower: covers, lengths, minimality, weak mixing, preimages", weakly_mixing_tower},
      {"transitive tower: transitivity, non-minimality, odometer subsystem, no periodic points", transitive_tower},
      {"graph interval scheme to depth 3: audits and ratio <= 12*2^{-s_n}", graph_scheme},
      {"lrs certificates with positive margins, corrupted control rejected", lrs_certificates},
      {"shrinking-map oracle: 1000 systems, zero counterexamples", shrinking_oracle},
      {"entropy estimates: odometer decreasing, shift near log 2", entropy},
      {"fixed-point system: a single periodic point", fixed_point_periodic},
      {"deterministic rebuilds", determinism},
  };

  Json report = Json::array();
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.note(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (out.pass ? "PASS" : "FAIL") << "  " << index << ". " << c.title << "  [" << fixed(secs)
              << " s]\n";
    for (const auto& n : out.notes) std::cout << "      " << n << "\n";
    std::cout.flush();
    failed += !out.pass;
    report.push_back({{"criterion", index},
                      {"title", c.title},
                      {"pass", out.pass},
                      {"notes", out.notes},
                      {"margins", out.margins}});
  }
  std::ofstream("acceptance_report.json") << canonical_dump(report);
  std::cout << (11 - failed) << "/11 criteria pass\n";
  return failed == 0 ? 0 : 1;
}
