#include "cantor/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cantor/export.hpp"
#include "cantor/serialize.hpp"

namespace cantor {

namespace {

void configure_logging() {
  static bool done = false;
  if (!done) {
    auto logger = spdlog::stderr_color_mt("cantor-shrink");
    spdlog::set_default_logger(logger);
    done = true;
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("CANTOR_SHRINK_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

struct Options {
  std::vector<std::uint64_t> s;
  std::string rule = "explicit";
  std::uint64_t base = 2, ratio = 2;
  std::size_t depth = 0;
  std::string variant = "weakly-mixing";
  std::size_t levels = 0;
  std::size_t refine = 0;
  long tail = 16;
  unsigned tail_base = 0;
  std::uint64_t anchor = 0;
  std::size_t second_depth = 2;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::size_t trials = 1000;
  std::size_t max_size = 8;
  std::size_t level = 0;
  std::string out;
  std::string scheme, second, graph, ext, fixed;
  std::vector<std::string> sys;
  std::vector<std::string> eps;
  std::vector<std::size_t> steps;
};

class Runner {
 public:
  Runner(Options& o, std::ostream& out) : o_(o), out_(out) {}

  void emit(const std::string& text) const {
    if (o_.out.empty())
      out_ << text;
    else
      write_text_file(o_.out, text);
  }

  int report(const Json& j) const {
    emit(canonical_dump(j));
    bool pass = j.at("pass").get<bool>();
    spdlog::info("{}: {}", j.at("check").get<std::string>(), pass ? "pass" : "fail");
    return pass ? kExitPass : kExitFail;
  }

  EmbeddingScheme load_scheme(const std::string& path) const {
    if (path.empty()) throw SchemaError("--scheme is required");
    return scheme_from_json(read_json_file(path));
  }

  EmbeddingScheme load_odometer(const std::string& path) const {
    EmbeddingScheme s = load_scheme(path);
    if (s.kind() != SchemeKind::Odometer) throw SchemaError(path + " is not an odometer scheme");
    return s;
  }

  ExtensionOptions extension_options(std::size_t levels, long tail, std::size_t refine,
                                     unsigned base) const {
    ExtensionOptions e;
    e.levels = o_.levels ? o_.levels : levels;
    e.tail = tail;
    e.refine = o_.refine ? o_.refine : refine;
    e.tail_base = o_.tail_base ? o_.tail_base : base;
    return e;
  }

  // -- build ---------------------------------------------------------------

  int build_odometer() const {
    if (o_.depth == 0) throw PreconditionError("--depth is required");
    OdometerSpec spec = [&] {
      if (!o_.s.empty()) return OdometerSpec::explicit_list(o_.s);
      if (o_.rule == "geometric") return OdometerSpec::geometric(o_.base, o_.ratio, o_.depth);
      if (o_.rule == "factorial") return OdometerSpec::factorial(o_.depth);
      throw PreconditionError("give --s or --rule geometric|factorial");
    }();
    spdlog::info("building odometer scheme to depth {}", o_.depth);
    emit(canonical_dump(to_json(build_odometer_scheme(spec, o_.depth))));
    return kExitPass;
  }

  int build_graph() const {
    if (o_.levels == 0) throw PreconditionError("--levels is required");
    if (o_.levels > 3)
      spdlog::warn("graph schemes beyond depth 3 carry multi-million-bit endpoints; expect long runs");
    auto seq = build_sequence(parse_variant(o_.variant), o_.levels);
    emit(canonical_dump(to_json(build_graph_scheme(seq, o_.levels))));
    return kExitPass;
  }

  int build_extension() const {
    EmbeddingScheme scheme = load_odometer(o_.scheme);
    ExtensionOptions e = extension_options(3, o_.tail, 5, 2);
    const auto& spec = scheme.odometer_spec();
    if (o_.anchor >= spec.term(e.refine)) throw PreconditionError("--anchor out of range");
    auto ext = build_attractor_repellor(scheme, point_from_top(spec, e.refine, o_.anchor), e);
    emit(canonical_dump(to_json(ext)));
    return kExitPass;
  }

  int build_fixed_point() const {
    EmbeddingScheme first = load_odometer(o_.scheme);
    EmbeddingScheme second = o_.second.empty() ? first : load_odometer(o_.second);
    ExtensionOptions e = extension_options(2, o_.tail, 4, 4);
    const auto& spec = first.odometer_spec();
    if (o_.anchor >= spec.term(e.refine)) throw PreconditionError("--anchor out of range");
    auto w = build_fixed_point_system(first, point_from_top(spec, e.refine, o_.anchor), e, second,
                                      o_.second_depth);
    emit(canonical_dump(to_json(w)));
    return kExitPass;
  }

  int build_midpoint() const {
    EmbeddingScheme scheme = load_odometer(o_.scheme);
    std::size_t depth = o_.depth ? o_.depth : scheme.depth();
    if (depth > scheme.depth()) throw PreconditionError("--depth exceeds the scheme's depth");
    emit(canonical_dump(to_json(midpoint_system(scheme, depth))));
    return kExitPass;
  }

  int build_product() const {
    if (o_.sys.size() != 2) throw PreconditionError("give --sys twice");
    auto a = system_from_json(read_json_file(o_.sys[0]));
    auto b = system_from_json(read_json_file(o_.sys[1]));
    emit(canonical_dump(to_json(product_system(a, b))));
    return kExitPass;
  }

  int build_shift() const {
    emit(canonical_dump(to_json(full_shift_system(o_.depth ? o_.depth : 6))));
    return kExitPass;
  }

  // -- verify --------------------------------------------------------------

  std::size_t verify_limit(const EmbeddingScheme& scheme) const {
    std::size_t d = o_.depth ? o_.depth : scheme.depth();
    if (d > scheme.depth() || d <= scheme.first_level())
      throw PreconditionError("--depth must lie in " + std::to_string(scheme.first_level() + 1) + ".." +
                              std::to_string(scheme.depth()));
    return d;
  }

  int verify_derivative() const {
    EmbeddingScheme scheme = load_scheme(o_.scheme);
    std::size_t limit = verify_limit(scheme);
    bool pass = true;
    Json rows = Json::array(), witnesses = Json::array(), margins = Json::array();
    for (std::size_t j = scheme.first_level(); j < limit; ++j) {
      RatioReport r = derivative_ratio_bound(scheme, j, o_.jobs);
      pass = pass && r.within_bound();
      Json row = to_json(r);
      for (const auto& w : row["witnesses"]) witnesses.push_back("depth " + std::to_string(j) + ": " + w.get<std::string>());
      margins.push_back(row["margins"][0]);
      rows.push_back(std::move(row));
    }
    return report(make_report("derivative ratio", pass, witnesses, margins, {{"depths", rows}}));
  }

  int verify_lrs() const {
    int given = !o_.scheme.empty() + !o_.sys.empty() + !o_.ext.empty() + !o_.fixed.empty();
    if (given != 1) throw PreconditionError("give exactly one of --scheme, --sys, --ext, --fixed-point");
    if (!o_.ext.empty()) return report(to_json(verify_extension_lrs(extension_from_json(read_json_file(o_.ext)), o_.jobs)));
    if (!o_.fixed.empty())
      return report(to_json(verify_deformed_lrs(fixed_point_from_json(read_json_file(o_.fixed)), o_.jobs)));
    if (!o_.sys.empty()) {
      auto sys = system_from_json(read_json_file(o_.sys.front()));
      LrsResult r = check_lrs(sys, o_.jobs);
      Json witnesses = Json::array(), margins = Json::array();
      if (r.witness)
        witnesses.push_back(sys.name(r.witness->x) + " vs " + sys.name(r.witness->y));
      if (r.min_margin) margins.push_back(to_json(*r.min_margin));
      return report(make_report("lrs", r.pass, witnesses, margins, {{"pairs_checked", r.pairs_checked}}));
    }
    EmbeddingScheme scheme = load_scheme(o_.scheme);
    std::size_t limit = verify_limit(scheme);
    bool pass = true;
    Json rows = Json::array(), witnesses = Json::array(), margins = Json::array();
    for (std::size_t d = scheme.first_level(); d < limit; ++d) {
      LrsPairReport r = verify_lrs_pairs(scheme, d, o_.jobs);
      pass = pass && r.pass;
      Json row = to_json(r);
      for (const auto& w : row["witnesses"]) witnesses.push_back("depth " + std::to_string(d) + ": " + w.get<std::string>());
      for (const auto& m : row["margins"]) margins.push_back(m);
      row.erase("witnesses");
      rows.push_back(std::move(row));
    }
    return report(make_report("lrs pairs", pass, witnesses, margins, {{"depths", rows}}));
  }

  int verify_audit() const {
    EmbeddingScheme scheme = load_scheme(o_.scheme);
    Json j = to_json(audit_scheme(scheme));
    if (scheme.kind() == SchemeKind::Odometer) {
      Json identity = Json::array();
      bool ok = true;
      for (std::size_t n = scheme.first_level(); n <= scheme.depth(); ++n) {
        auto bad = odometer_ratio_identity_violations(scheme, n);
        ok = ok && bad.empty();
        identity.push_back({{"n", n}, {"violations", bad}});
      }
      j["diameter_identity"] = identity;
      j["pass"] = j["pass"].get<bool>() && ok;
    }
    return report(j);
  }

  int verify_cover() const {
    TowerVariant variant;
    std::size_t levels;
    if (!o_.graph.empty()) {
      EmbeddingScheme scheme = load_scheme(o_.graph);
      if (scheme.kind() != SchemeKind::Graph) throw SchemaError(o_.graph + " is not a graph scheme");
      variant = std::get<GraphSource>(scheme.source()).variant;
      levels = scheme.depth();
    } else {
      variant = parse_variant(o_.variant);
      levels = o_.levels;
    }
    if (levels == 0) throw PreconditionError("give --graph or --variant with --levels");
    CoverSequence seq = build_sequence(variant, levels);
    CoverAudit audit = audit_covers(seq);
    bool pass = audit.homomorphisms && audit.edge_surjective && audit.bidirectional && audit.base_to_base;
    Json witnesses = Json::array(), rows = Json::array();
    for (std::size_t n = 0; n < seq.top(); ++n) {
      Certificate minimal = check_minimality_certificate(seq, n);
      Certificate transitive = check_transitivity_certificate(seq, n);
      Certificate mixing = check_weak_mixing_certificate(seq, n);
      bool need_min = variant != TowerVariant::Transitive;
      bool need_mix = variant == TowerVariant::WeaklyMixing;
      bool ok = transitive.pass && (!need_min || minimal.pass) && (!need_mix || mixing.pass);
      pass = pass && ok;
      if (!ok) {
        for (const auto* c : {&minimal, &transitive, &mixing})
          if (!c->pass && !c->witness.empty())
            witnesses.push_back("level " + std::to_string(n) + ": " + c->witness);
      }
      rows.push_back({{"n", n},
                      {"minimality", minimal.pass},
                      {"transitivity", transitive.pass},
                      {"weak_mixing", mixing.pass},
                      {"min_closed_path", periodic_point_free_certificate(seq, n + 1).min_closed_path},
                      {"max_preimage", max_preimage_count(seq, n).first}});
    }
    Json extra = {{"variant", variant_name(variant)},
                  {"homomorphisms", audit.homomorphisms},
                  {"edge_surjective", audit.edge_surjective},
                  {"bidirectional", audit.bidirectional},
                  {"base_to_base", audit.base_to_base},
                  {"levels", rows}};
    return report(make_report("cover certificates", pass, witnesses, Json::array(), extra));
  }

  int verify_oracle() const {
    return report(to_json(shrinking_propositions_oracle(o_.trials, o_.max_size, o_.seed, o_.jobs)));
  }

  // -- export --------------------------------------------------------------

  int export_ratio() const {
    EmbeddingScheme scheme = load_scheme(o_.scheme);
    std::size_t limit = verify_limit(scheme);
    std::vector<RatioReport> rows;
    for (std::size_t j = scheme.first_level(); j < limit; ++j)
      rows.push_back(derivative_ratio_bound(scheme, j, o_.jobs));
    emit(ratio_csv(rows));
    return kExitPass;
  }

  int export_svg() const {
    EmbeddingScheme scheme = load_scheme(o_.scheme);
    emit(scheme_svg(scheme, o_.levels ? o_.levels : 3));
    return kExitPass;
  }

  int export_dot() const {
    EmbeddingScheme scheme = load_scheme(o_.graph);
    if (scheme.kind() != SchemeKind::Graph) throw SchemaError(o_.graph + " is not a graph scheme");
    if (o_.level > scheme.depth()) throw PreconditionError("--level exceeds the tower");
    emit(level_dot(scheme.cover(), o_.level));
    return kExitPass;
  }

  int export_entropy() const {
    if (o_.sys.size() != 1) throw PreconditionError("give one --sys");
    auto sys = system_from_json(read_json_file(o_.sys.front()));
    std::vector<Scalar> eps;
    for (const auto& e : o_.eps) eps.push_back(parse_scalar(e));
    if (eps.empty() || o_.steps.empty()) throw PreconditionError("give --eps and --n");
    emit(entropy_csv(entropy_estimate(sys, eps, o_.steps)));
    return kExitPass;
  }

 private:
  Options& o_;
  std::ostream& out_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  Options o;
  Runner runner(o, out);
  CLI::App app{"Exact certificates for locally radially shrinking Cantor systems", "cantor-shrink"};
  app.require_subcommand(1);
  app.add_option("--jobs", o.jobs, "Worker threads for verification sweeps")->check(CLI::PositiveNumber);

  std::function<int()> action;
  auto command = [&](CLI::App* parent, const std::string& name, const std::string& help,
                     int (Runner::*fn)() const) {
    CLI::App* sub = parent->add_subcommand(name, help);
    sub->callback([&action, &runner, fn] { action = [&runner, fn] { return (runner.*fn)(); }; });
    sub->add_option("--out", o.out, "Output file (default: standard output)");
    sub->add_option("--jobs", o.jobs, "Worker threads for verification sweeps")->check(CLI::PositiveNumber);
    return sub;
  };

  CLI::App* build = app.add_subcommand("build", "Build a scheme, system or artifact");
  build->require_subcommand(1);
  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite and write a report");
  verify->require_subcommand(1);
  CLI::App* exp = app.add_subcommand("export", "Export tables and pictures");
  exp->require_subcommand(1);

  auto* b_odo = command(build, "odometer", "Odometer interval scheme", &Runner::build_odometer);
  b_odo->add_option("--s", o.s, "Sequence s_1,s_2,... (later terms repeat the last ratio)")->delimiter(',');
  b_odo->add_option("--rule", o.rule, "explicit, geometric or factorial");
  b_odo->add_option("--base", o.base, "s_1 for the geometric rule");
  b_odo->add_option("--ratio", o.ratio, "Ratio for the geometric rule");
  b_odo->add_option("--depth", o.depth, "Number of levels")->required();

  auto* b_graph = command(build, "graph", "Graph-cover interval scheme", &Runner::build_graph);
  b_graph->add_option("--variant", o.variant, "weakly-mixing, transitive or restricted");
  b_graph->add_option("--levels", o.levels, "Deepest level")->required();

  auto* b_ext = command(build, "extension", "Attractor-repellor extension", &Runner::build_extension);
  b_ext->add_option("--scheme", o.scheme, "Odometer scheme file")->required();
  b_ext->add_option("--levels", o.levels, "Number of return levels N");
  b_ext->add_option("--tail", o.tail, "Last forward index L");
  b_ext->add_option("--refine", o.refine, "Cylinder depth m");
  b_ext->add_option("--anchor", o.anchor, "Top residue of the anchor at depth m");
  b_ext->add_option("--tail-base", o.tail_base, "Base of the forward tail heights");

  auto* b_fix = command(build, "fixed-point", "Fixed-point system with deformed metric",
                        &Runner::build_fixed_point);
  b_fix->add_option("--scheme", o.scheme, "Odometer scheme for X1")->required();
  b_fix->add_option("--second", o.second, "Odometer scheme for X2 (default: same)");
  b_fix->add_option("--second-depth", o.second_depth, "Cylinder depth for X2");
  b_fix->add_option("--levels", o.levels, "Number of return levels N");
  b_fix->add_option("--tail", o.tail, "Last forward index L")->default_val(12);
  b_fix->add_option("--refine", o.refine, "Cylinder depth m for X1");
  b_fix->add_option("--anchor", o.anchor, "Top residue of the anchor");
  b_fix->add_option("--tail-base", o.tail_base, "Base of the forward tail heights");

  auto* b_mid = command(build, "midpoint", "Cylinder-midpoint system", &Runner::build_midpoint);
  b_mid->add_option("--scheme", o.scheme, "Odometer scheme file")->required();
  b_mid->add_option("--depth", o.depth, "Cylinder depth");

  auto* b_prod = command(build, "product", "Product of two systems", &Runner::build_product);
  b_prod->add_option("--sys", o.sys, "System file (twice)")->required();

  auto* b_shift = command(build, "shift", "Two-symbol shift on word midpoints", &Runner::build_shift);
  b_shift->add_option("--depth", o.depth, "Word length");

  auto* v_der = command(verify, "derivative", "Derivative ratio table", &Runner::verify_derivative);
  v_der->add_option("--scheme", o.scheme, "Scheme file")->required();
  v_der->add_option("--depth", o.depth, "Check parents above this depth");

  auto* v_lrs = command(verify, "lrs", "LRS certificates", &Runner::verify_lrs);
  v_lrs->add_option("--scheme", o.scheme, "Scheme file");
  v_lrs->add_option("--depth", o.depth, "Check parents above this depth");
  v_lrs->add_option("--sys", o.sys, "System file");
  v_lrs->add_option("--ext", o.ext, "Extension artifact");
  v_lrs->add_option("--fixed-point", o.fixed, "Fixed-point artifact");

  auto* v_audit = command(verify, "audit", "Scheme structure audit", &Runner::verify_audit);
  v_audit->add_option("--scheme", o.scheme, "Scheme file")->required();

  auto* v_cover = command(verify, "cover", "Cover tower certificates", &Runner::verify_cover);
  v_cover->add_option("--graph", o.graph, "Graph scheme file");
  v_cover->add_option("--variant", o.variant, "Tower variant (without --graph)");
  v_cover->add_option("--levels", o.levels, "Tower height (without --graph)");

  auto* v_oracle = command(verify, "oracle", "Randomised shrinking-map oracle", &Runner::verify_oracle);
  v_oracle->add_option("--trials", o.trials, "Number of random systems");
  v_oracle->add_option("--max-size", o.max_size, "Largest system size");
  v_oracle->add_option("--seed", o.seed, "Random seed");

  auto* e_ratio = command(exp, "ratio", "Ratio table as CSV", &Runner::export_ratio);
  e_ratio->add_option("--scheme", o.scheme, "Scheme file")->required();
  e_ratio->add_option("--depth", o.depth, "Check parents above this depth");

  auto* e_svg = command(exp, "svg", "Interval strips as SVG", &Runner::export_svg);
  e_svg->add_option("--scheme", o.scheme, "Scheme file")->required();
  e_svg->add_option("--levels", o.levels, "Number of levels drawn");

  auto* e_dot = command(exp, "dot", "Graph level as DOT", &Runner::export_dot);
  e_dot->add_option("--graph", o.graph, "Graph scheme file")->required();
  e_dot->add_option("--level", o.level, "Level index");

  auto* e_ent = command(exp, "entropy", "Separated-set entropy table as CSV", &Runner::export_entropy);
  e_ent->add_option("--sys", o.sys, "System file")->required();
  e_ent->add_option("--eps", o.eps, "Separation thresholds (rationals)")->delimiter(',');
  e_ent->add_option("--n", o.steps, "Orbit lengths")->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    return action();
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitUsage;
}

}  // namespace cantor
