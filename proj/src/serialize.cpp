#include "cantor/serialize.hpp"

#include <fstream>
#include <sstream>

namespace cantor {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw SchemaError(std::string("expected an object holding \"") + key + "\"");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field \"") + key + "\"");
  return *it;
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("field \"") + key + "\" has the wrong type: " + e.what());
  }
}

mpz_class integer_from(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) throw SchemaError(std::string("field \"") + key + "\" must be a decimal string");
  mpz_class z;
  if (z.set_str(v.get<std::string>(), 10) != 0)
    throw SchemaError(std::string("field \"") + key + "\" is not a decimal integer");
  return z;
}

// Removes every factor p from z and returns how many were removed.
long strip(mpz_class& z, unsigned long p) {
  if (sgn(z) == 0) return 0;
  mpz_class f = p;
  return static_cast<long>(mpz_remove(z.get_mpz_t(), z.get_mpz_t(), f.get_mpz_t()));
}

Scalar scaled(Scalar x, long pow2_exp, long pow3_exp) {
  x = pow2(pow2_exp, x);
  mpz_class p3;
  mpz_ui_pow_ui(p3.get_mpz_t(), 3, static_cast<unsigned long>(pow3_exp < 0 ? -pow3_exp : pow3_exp));
  if (pow3_exp >= 0)
    x *= p3;
  else
    x /= p3;
  x.canonicalize();
  return x;
}

Json options_json(const ExtensionOptions& o) {
  return {{"levels", o.levels}, {"tail", o.tail}, {"refine", o.refine}, {"tail_base", o.tail_base},
          {"normalize", o.normalize}};
}

ExtensionOptions options_from_json(const Json& j) {
  ExtensionOptions o;
  o.levels = get<std::size_t>(j, "levels");
  o.tail = get<long>(j, "tail");
  o.refine = get<std::size_t>(j, "refine");
  o.tail_base = get<unsigned>(j, "tail_base");
  o.normalize = get<bool>(j, "normalize");
  return o;
}

Json scalars(const std::vector<Scalar>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(to_json(x));
  return out;
}

Json heights_json(const std::map<long, Scalar>& h) {
  Json out = Json::array();
  for (const auto& [j, y] : h) out.push_back({{"j", j}, {"height", to_json(y)}});
  return out;
}

Json pair_json(const PairRecord& r) {
  return {{"parent", r.parent},
          {"first", r.first},
          {"second", r.second},
          {"first_image", r.first_image},
          {"second_image", r.second_image},
          {"source_gap", to_json(r.source_gap)},
          {"image_spread", to_json(r.image_spread)}};
}

std::string pair_text(const PairRecord& r) {
  return "parent " + std::to_string(r.parent) + ": children " + std::to_string(r.first) + "," +
         std::to_string(r.second) + " -> " + std::to_string(r.first_image) + "," +
         std::to_string(r.second_image);
}

}  // namespace

Json to_json(const Scalar& x_in) {
  Scalar x = x_in;
  x.canonicalize();
  mpz_class num = x.get_num();
  mpz_class den = x.get_den();
  if (sgn(num) == 0) return {{"mantissa", "0"}, {"pow2", 0}, {"pow3", 0}};
  mpz_class rest = den;
  long d2 = strip(rest, 2);
  long d3 = strip(rest, 3);
  if (rest != 1) return {{"num", num.get_str(10)}, {"den", den.get_str(10)}};
  long n2 = strip(num, 2);
  long n3 = strip(num, 3);
  return {{"mantissa", num.get_str(10)}, {"pow2", n2 - d2}, {"pow3", n3 - d3}};
}

Scalar scalar_from_json(const Json& j) {
  if (j.is_object() && j.contains("mantissa")) {
    Scalar m(integer_from(j, "mantissa"));
    return scaled(m, get<long>(j, "pow2"), get<long>(j, "pow3"));
  }
  mpz_class num = integer_from(j, "num");
  mpz_class den = integer_from(j, "den");
  if (sgn(den) == 0) throw SchemaError("zero denominator");
  Scalar x(num, den);
  x.canonicalize();
  return x;
}

Json to_json(const Interval& I) { return {{"lo", to_json(I.lo)}, {"hi", to_json(I.hi)}}; }

Interval interval_from_json(const Json& j) {
  Scalar lo = scalar_from_json(field(j, "lo"));
  Scalar hi = scalar_from_json(field(j, "hi"));
  if (hi < lo) throw SchemaError("interval with hi < lo");
  return Interval{lo, hi};
}

Json to_json(const OdometerSpec& spec) {
  switch (spec.rule()) {
    case OdometerSpec::Rule::Explicit:
      return {{"rule", "explicit"}, {"listed", spec.listed()}};
    case OdometerSpec::Rule::Geometric:
      return {{"rule", "geometric"}, {"base", spec.base()}, {"ratio", spec.ratio()},
              {"depth", spec.max_depth()}};
    case OdometerSpec::Rule::Factorial:
      return {{"rule", "factorial"}, {"depth", spec.max_depth()}};
  }
  throw PreconditionError("unknown odometer rule");
}

OdometerSpec odometer_spec_from_json(const Json& j) {
  auto rule = get<std::string>(j, "rule");
  try {
    if (rule == "explicit") return OdometerSpec::explicit_list(get<std::vector<std::uint64_t>>(j, "listed"));
    if (rule == "geometric")
      return OdometerSpec::geometric(get<std::uint64_t>(j, "base"), get<std::uint64_t>(j, "ratio"),
                                     get<std::size_t>(j, "depth"));
    if (rule == "factorial") return OdometerSpec::factorial(get<std::size_t>(j, "depth"));
  } catch (const PreconditionError& e) {
    throw SchemaError(std::string("invalid odometer sequence: ") + e.what());
  }
  throw SchemaError("unknown odometer rule \"" + rule + "\"");
}

Json source_to_json(const SchemeSource& source, std::size_t depth) {
  if (const auto* spec = std::get_if<OdometerSpec>(&source)) {
    Json j = {{"type", "odometer"}, {"sequence", to_json(*spec)}};
    Json s = Json::array();
    for (std::size_t n = 1; n <= depth; ++n) s.push_back(spec->term(n));
    j["s"] = s;
    return j;
  }
  const auto& g = std::get<GraphSource>(source);
  Json s = Json::array();
  for (const auto& lengths : cycle_length_recursion(g.variant, depth)) {
    std::size_t count = 1;
    for (auto l : lengths) count += l - 1;
    s.push_back(count);
  }
  return {{"type", "graph"}, {"variant", variant_name(g.variant)}, {"levels", g.levels}, {"s", s}};
}

SchemeSource source_from_json(const Json& j) {
  auto type = get<std::string>(j, "type");
  if (type == "odometer") return odometer_spec_from_json(field(j, "sequence"));
  if (type == "graph") {
    GraphSource g;
    try {
      g.variant = parse_variant(get<std::string>(j, "variant"));
    } catch (const PreconditionError& e) {
      throw SchemaError(e.what());
    }
    g.levels = get<std::size_t>(j, "levels");
    return g;
  }
  throw SchemaError("unknown scheme source type \"" + type + "\"");
}

Json to_json(const EmbeddingScheme& scheme) {
  Json levels = Json::array();
  for (std::size_t n = scheme.first_level(); n <= scheme.depth(); ++n) {
    const SchemeLevel& lvl = scheme.level(n);
    Json cells = Json::array();
    for (const auto& c : lvl.cells) {
      Json cell = {{"label", c.label}, {"A", to_json(c.A)}};
      if (c.D) cell["D"] = to_json(*c.D);
      if (c.parent) cell["parent"] = *c.parent;
      cells.push_back(std::move(cell));
    }
    levels.push_back({{"n", n},
                      {"a", to_json(lvl.a)},
                      {"b", to_json(lvl.b)},
                      {"exceptional", lvl.exceptional},
                      {"cells", std::move(cells)}});
  }
  return {{"kind", scheme.kind() == SchemeKind::Odometer ? "odometer" : "graph"},
          {"source", source_to_json(scheme.source(), scheme.depth())},
          {"levels", std::move(levels)}};
}

EmbeddingScheme scheme_from_json(const Json& j) {
  auto kind_name = get<std::string>(j, "kind");
  SchemeKind kind;
  if (kind_name == "odometer")
    kind = SchemeKind::Odometer;
  else if (kind_name == "graph")
    kind = SchemeKind::Graph;
  else
    throw SchemaError("unknown scheme kind \"" + kind_name + "\"");
  SchemeSource source = source_from_json(field(j, "source"));
  if ((kind == SchemeKind::Odometer) != std::holds_alternative<OdometerSpec>(source))
    throw SchemaError("scheme kind does not match its source");
  const Json& levels_json = field(j, "levels");
  if (!levels_json.is_array()) throw SchemaError("\"levels\" must be an array");
  std::vector<SchemeLevel> levels;
  for (const auto& lj : levels_json) {
    SchemeLevel lvl;
    lvl.n = get<std::size_t>(lj, "n");
    lvl.a = scalar_from_json(field(lj, "a"));
    lvl.b = scalar_from_json(field(lj, "b"));
    lvl.exceptional = get<std::vector<long>>(lj, "exceptional");
    const Json& cells = field(lj, "cells");
    if (!cells.is_array()) throw SchemaError("\"cells\" must be an array");
    for (const auto& cj : cells) {
      SchemeCell c;
      c.label = get<long>(cj, "label");
      c.A = interval_from_json(field(cj, "A"));
      if (cj.contains("D")) c.D = interval_from_json(cj["D"]);
      if (cj.contains("parent")) c.parent = get<long>(cj, "parent");
      lvl.cells.push_back(std::move(c));
    }
    levels.push_back(std::move(lvl));
  }
  try {
    return assemble_scheme(kind, std::move(source), std::move(levels));
  } catch (const PreconditionError& e) {
    throw SchemaError(std::string("inconsistent scheme: ") + e.what());
  }
}

Json to_json(const FinitePointSystem& sys) {
  Json j;
  j["map"] = sys.map();
  if (sys.embedded()) {
    j["metric"] = "embedded";
    Json pts = Json::array();
    for (const auto& c : sys.coordinates()) pts.push_back(scalars(c));
    j["points"] = std::move(pts);
  } else {
    j["metric"] = "explicit";
    Json pts = Json::array();
    for (std::size_t i = 0; i < sys.size(); ++i) pts.push_back(i);
    j["points"] = std::move(pts);
    Json rows = Json::array();
    for (const auto& row : sys.matrix()) rows.push_back(scalars(row));
    j["distances"] = std::move(rows);
  }
  if (sys.eps()) j["eps"] = scalars(*sys.eps());
  if (!sys.names().empty()) j["names"] = sys.names();
  if (sys.product_shape()) j["product_shape"] = {sys.product_shape()->first, sys.product_shape()->second};
  return j;
}

FinitePointSystem system_from_json(const Json& j) {
  auto map = get<std::vector<std::size_t>>(j, "map");
  auto metric = get<std::string>(j, "metric");
  auto read_rows = [](const Json& rows, const char* what) {
    if (!rows.is_array()) throw SchemaError(std::string(what) + " must be an array of arrays");
    std::vector<std::vector<Scalar>> out;
    for (const auto& r : rows) {
      if (!r.is_array()) throw SchemaError(std::string(what) + " must be an array of arrays");
      std::vector<Scalar> row;
      for (const auto& x : r) row.push_back(scalar_from_json(x));
      out.push_back(std::move(row));
    }
    return out;
  };
  try {
    FinitePointSystem sys;
    if (metric == "embedded") {
      sys = FinitePointSystem::from_coordinates(read_rows(field(j, "points"), "points"), std::move(map));
    } else if (metric == "explicit") {
      sys = FinitePointSystem::from_matrix(read_rows(field(j, "distances"), "distances"), std::move(map));
    } else {
      throw SchemaError("unknown metric kind \"" + metric + "\"");
    }
    if (j.contains("eps")) {
      std::vector<Scalar> eps;
      for (const auto& x : j["eps"]) eps.push_back(scalar_from_json(x));
      sys.set_eps(std::move(eps));
    }
    if (j.contains("names")) sys.set_names(get<std::vector<std::string>>(j, "names"));
    if (j.contains("product_shape")) {
      auto shape = get<std::vector<std::size_t>>(j, "product_shape");
      if (shape.size() != 2) throw SchemaError("product_shape needs two entries");
      sys.set_product_shape(shape[0], shape[1]);
    }
    return sys;
  } catch (const PreconditionError& e) {
    throw SchemaError(std::string("invalid system: ") + e.what());
  }
}

Json to_json(const ExtensionSystem& ext) {
  return {{"kind", "extension"},
          {"scheme", source_to_json(ext.base.source(), ext.options.refine)},
          {"anchor", ext.anchor.top()},
          {"options", options_json(ext.options)},
          {"anchor_depth", ext.anchor_depth},
          {"k", ext.k},
          {"slack", scalars(ext.slack)},
          {"a", scalars(ext.a)},
          {"heights", heights_json(ext.height)},
          {"system", to_json(ext.system)}};
}

ExtensionSystem extension_from_json(const Json& j) {
  if (get<std::string>(j, "kind") != "extension") throw SchemaError("not an extension artifact");
  SchemeSource source = source_from_json(field(j, "scheme"));
  if (!std::holds_alternative<OdometerSpec>(source))
    throw SchemaError("extensions are built over odometer schemes");
  ExtensionOptions options = options_from_json(field(j, "options"));
  const auto& spec = std::get<OdometerSpec>(source);
  try {
    EmbeddingScheme scheme = build_scheme(source, options.refine);
    auto top = get<std::uint64_t>(j, "anchor");
    if (top >= spec.term(options.refine)) throw SchemaError("anchor out of range");
    ExtensionSystem ext =
        build_attractor_repellor(scheme, point_from_top(spec, options.refine, top), options);
    if (to_json(ext) != j) throw SchemaError("extension artifact does not match its descriptor");
    return ext;
  } catch (const PreconditionError& e) {
    throw SchemaError(std::string("invalid extension descriptor: ") + e.what());
  }
}

Json to_json(const DeformedTripleSystem& w) {
  Json periodic = periodic_points(w);
  return {{"kind", "fixed-point"},
          {"first", source_to_json(w.ext.base.source(), w.ext.options.refine)},
          {"anchor", w.ext.anchor.top()},
          {"options", options_json(w.ext.options)},
          {"second", source_to_json(w.second.source(), w.second_depth)},
          {"second_depth", w.second_depth},
          {"a", scalars(w.ext.a)},
          {"heights", heights_json(w.ext.height)},
          {"artifact_period", w.artifact_period},
          {"collapsed", w.collapsed},
          {"periodic", periodic},
          {"system", to_json(w.system)}};
}

DeformedTripleSystem fixed_point_from_json(const Json& j) {
  if (get<std::string>(j, "kind") != "fixed-point") throw SchemaError("not a fixed-point artifact");
  SchemeSource first = source_from_json(field(j, "first"));
  SchemeSource second = source_from_json(field(j, "second"));
  if (!std::holds_alternative<OdometerSpec>(first) || !std::holds_alternative<OdometerSpec>(second))
    throw SchemaError("the fixed-point system is built over odometer schemes");
  ExtensionOptions options = options_from_json(field(j, "options"));
  auto second_depth = get<std::size_t>(j, "second_depth");
  try {
    const auto& spec = std::get<OdometerSpec>(first);
    auto top = get<std::uint64_t>(j, "anchor");
    if (top >= spec.term(options.refine)) throw SchemaError("anchor out of range");
    DeformedTripleSystem w = build_fixed_point_system(
        build_scheme(first, options.refine), point_from_top(spec, options.refine, top), options,
        build_scheme(second, second_depth), second_depth);
    if (to_json(w) != j) throw SchemaError("fixed-point artifact does not match its descriptor");
    return w;
  } catch (const PreconditionError& e) {
    throw SchemaError(std::string("invalid fixed-point descriptor: ") + e.what());
  }
}

Json make_report(const std::string& check, bool pass, Json witnesses, Json margins, Json extra) {
  Json j = std::move(extra);
  j["check"] = check;
  j["pass"] = pass;
  j["witnesses"] = std::move(witnesses);
  j["margins"] = std::move(margins);
  return j;
}

Json to_json(const CheckReport& rep) {
  Json witnesses = Json::array();
  Json margins = Json::array();
  Json items = Json::array();
  for (const auto& item : rep.items) {
    for (const auto& w : item.witnesses) witnesses.push_back(item.name + ": " + w);
    Json m = {{"item", item.name}, {"pass", item.pass}};
    m["margin"] = item.margin ? to_json(*item.margin) : Json();
    margins.push_back(std::move(m));
    items.push_back(item.name);
  }
  return make_report(rep.check, rep.pass(), std::move(witnesses), std::move(margins),
                     {{"items", std::move(items)}});
}

Json to_json(const SchemeAudit& audit) {
  Json witnesses = Json::array();
  Json items = Json::array();
  for (const auto& i : audit.items) {
    if (!i.pass) witnesses.push_back(i.name + ": " + i.detail);
    items.push_back({{"item", i.name}, {"pass", i.pass}});
  }
  return make_report("scheme audit", audit.pass(), std::move(witnesses), Json::array(),
                     {{"items", std::move(items)}});
}

Json to_json(const RatioReport& rep) {
  Json witnesses = Json::array();
  if (!rep.within_bound() && rep.argmax) witnesses.push_back(pair_text(*rep.argmax));
  Json margins = Json::array({to_json(rep.closed_form_bound - rep.max_ratio)});
  Json exceptional = Json::array();
  for (const auto& [label, r] : rep.exceptional) exceptional.push_back({{"label", label}, {"ratio", to_json(r)}});
  Json branch = Json::array();
  for (const auto& [label, r] : rep.branch) branch.push_back({{"label", label}, {"ratio", to_json(r)}});
  Json extra = {{"depth", rep.depth},
                {"max_ratio", to_json(rep.max_ratio)},
                {"bound", to_json(rep.closed_form_bound)},
                {"max_ratio_off_branch", to_json(rep.max_ratio_off_branch)},
                {"pass_off_branch", rep.within_bound_off_branch()},
                {"exceptional", std::move(exceptional)},
                {"branch", std::move(branch)}};
  extra["argmax"] = rep.argmax ? pair_json(*rep.argmax) : Json();
  return make_report("derivative ratio", rep.within_bound(), std::move(witnesses), std::move(margins),
                     std::move(extra));
}

Json to_json(const LrsPairReport& rep) {
  Json witnesses = Json::array();
  for (std::size_t i = 0; i < rep.failures.size() && i < 32; ++i)
    witnesses.push_back(pair_text(rep.failures[i]));
  Json margins = Json::array();
  if (rep.pairs_checked) margins.push_back(to_json(rep.min_margin));
  Json extra = {{"depth", rep.depth},
                {"pairs_checked", rep.pairs_checked},
                {"failure_count", rep.failures.size()},
                {"excluded_parents", rep.excluded_parents},
                {"branch_parents", rep.branch_parents},
                {"pass_off_branch", rep.pass_off_branch}};
  return make_report("lrs pairs", rep.pass, std::move(witnesses), std::move(margins), std::move(extra));
}

Json to_json(const OracleReport& rep) {
  Json depths = Json::object();
  for (const auto& [d, c] : rep.preimage_depths) depths[std::to_string(d)] = c;
  Json extra = {{"trials", rep.trials},
                {"shrinking", rep.shrinking},
                {"surjective_shrinking", rep.surjective_shrinking},
                {"counterexamples", rep.counterexamples},
                {"empty_preimage_depths", std::move(depths)}};
  return make_report("shrinking oracle", rep.counterexamples == 0, rep.witnesses, Json::array(),
                     std::move(extra));
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write " + path);
  out << text;
  if (!out) throw SchemaError("write failed for " + path);
}

}  // namespace cantor
