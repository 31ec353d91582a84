#include <doctest.h>

#include "cantor/serialize.hpp"

using namespace cantor;

namespace {

Scalar q(const char* text) { return parse_scalar(text); }

Scalar round_trip(const Scalar& x) { return scalar_from_json(to_json(x)); }

}  // namespace

TEST_CASE("scalar encodings") {
  Json dyadic = to_json(pow2(-5, q("5/3")));
  CHECK(dyadic == Json{{"mantissa", "5"}, {"pow2", -5}, {"pow3", -1}});
  Json plain = to_json(q("-7/10"));
  CHECK(plain == Json{{"num", "-7"}, {"den", "10"}});
  CHECK(to_json(Scalar(0)) == Json{{"mantissa", "0"}, {"pow2", 0}, {"pow3", 0}});
  CHECK(to_json(Scalar(12)) == Json{{"mantissa", "1"}, {"pow2", 2}, {"pow3", 1}});
  for (const char* t : {"0", "1", "-1", "12", "-7/10", "5/96", "123456789/1024", "-2/243"})
    CHECK(round_trip(q(t)) == q(t));
  Scalar huge = pow2(-2 * 1194 * 1194, q("1/6"));
  Json j = to_json(huge);
  CHECK(j.dump().size() < 80);
  CHECK(round_trip(huge) == huge);
  CHECK(scalar_from_json(Json{{"num", "6"}, {"den", "4"}}) == q("3/2"));

  CHECK_THROWS_AS(scalar_from_json(Json{{"num", "1"}, {"den", "0"}}), SchemaError);
  CHECK_THROWS_AS(scalar_from_json(Json{{"num", 1}, {"den", "2"}}), SchemaError);
  CHECK_THROWS_AS(scalar_from_json(Json{{"num", "x"}, {"den", "2"}}), SchemaError);
  CHECK_THROWS_AS(scalar_from_json(Json::array()), SchemaError);
}

TEST_CASE("intervals and specs") {
  Interval I{q("1/6"), q("1/3")};
  CHECK(interval_from_json(to_json(I)) == I);
  CHECK_THROWS_AS(interval_from_json(Json{{"lo", to_json(Scalar(1))}, {"hi", to_json(Scalar(0))}}),
                  SchemaError);
  for (auto spec : {OdometerSpec::explicit_list({2, 4, 8}), OdometerSpec::geometric(3, 2, 5),
                    OdometerSpec::factorial(4)})
    CHECK(odometer_spec_from_json(to_json(spec)) == spec);
  CHECK_THROWS_AS(odometer_spec_from_json(Json{{"rule", "explicit"}, {"listed", {2, 5}}}), SchemaError);
  CHECK_THROWS_AS(odometer_spec_from_json(Json{{"rule", "fibonacci"}}), SchemaError);
}

TEST_CASE("scheme round trip") {
  auto odo = build_odometer_scheme(OdometerSpec::explicit_list({2, 4, 8}), 3);
  Json j = to_json(odo);
  CHECK(j["source"]["s"] == Json{2, 4, 8});
  CHECK(to_json(scheme_from_json(j)) == j);

  auto graph = build_graph_scheme(build_weakly_mixing_sequence(2), 2);
  Json g = to_json(graph);
  CHECK(g["source"]["s"] == Json{4, 18, 74});
  auto back = scheme_from_json(g);
  CHECK(to_json(back) == g);
  CHECK(back.cover().levels[2].vertex_count() == 74);

  Json broken = j;
  broken["levels"][1]["cells"][0].erase("A");
  CHECK_THROWS_AS(scheme_from_json(broken), SchemaError);
  Json wrong_kind = j;
  wrong_kind["kind"] = "graph";
  CHECK_THROWS_AS(scheme_from_json(wrong_kind), SchemaError);
}

TEST_CASE("system round trip") {
  auto scheme = build_odometer_scheme(OdometerSpec::explicit_list({2, 4, 8}), 3);
  auto mid = midpoint_system(scheme, 2);
  Json j = to_json(mid);
  CHECK(j["metric"] == "embedded");
  CHECK(system_from_json(j) == mid);
  auto prod = product_system(mid, mid);
  CHECK(system_from_json(to_json(prod)) == prod);

  using M = std::vector<std::vector<Scalar>>;
  auto expl = FinitePointSystem::from_matrix(M{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}, {1, 2, 0});
  Json e = to_json(expl);
  CHECK(e["metric"] == "explicit");
  CHECK(system_from_json(e) == expl);
  e["distances"][0][1] = to_json(Scalar(5));
  CHECK_THROWS_AS(system_from_json(e), SchemaError);
}

TEST_CASE("artifact round trips and tamper detection") {
  auto spec = OdometerSpec::explicit_list({2, 4, 8});
  auto scheme = build_odometer_scheme(spec, 4);
  ExtensionOptions opt;
  opt.levels = 2;
  opt.tail = 8;
  opt.refine = 4;
  auto ext = build_attractor_repellor(scheme, point_from_top(spec, 4, 0), opt);
  Json j = to_json(ext);
  CHECK(j["kind"] == "extension");
  CHECK(to_json(extension_from_json(j)) == j);
  Json tampered = j;
  tampered["heights"][0]["height"] = to_json(Scalar(0));
  CHECK_THROWS_AS(extension_from_json(tampered), SchemaError);

  opt.tail = 6;
  opt.tail_base = 4;
  auto w = build_fixed_point_system(scheme, point_from_top(spec, 4, 0), opt, scheme, 2);
  Json f = to_json(w);
  CHECK(f["periodic"] == Json{w.collapsed});
  CHECK(to_json(fixed_point_from_json(f)) == f);
  Json bad = f;
  bad["second_depth"] = 3;
  CHECK_THROWS_AS(fixed_point_from_json(bad), SchemaError);
}

TEST_CASE("reports and dumps") {
  auto rep = make_report("demo", false, Json::array({"x vs y"}), Json::array());
  CHECK(rep["check"] == "demo");
  CHECK(rep["pass"] == false);
  std::string text = canonical_dump(rep);
  CHECK(text.back() == '\n');
  CHECK(text.find("\"check\"") < text.find("\"pass\""));

  auto scheme = build_odometer_scheme(OdometerSpec::explicit_list({2, 4, 8}), 4);
  Json r = to_json(derivative_ratio_bound(scheme, 2));
  CHECK(r["pass"] == true);
  CHECK(scalar_from_json(r["max_ratio"]) == derivative_ratio_bound(scheme, 2).max_ratio);
  CHECK_THROWS_AS(read_json_file("/nonexistent/file.json"), SchemaError);
}

TEST_CASE("rebuilding gives byte-identical documents") {
  auto spec = OdometerSpec::explicit_list({2, 4, 8});
  auto a = canonical_dump(to_json(build_odometer_scheme(spec, 5)));
  auto b = canonical_dump(to_json(build_odometer_scheme(spec, 5)));
  CHECK(a == b);
  auto o1 = canonical_dump(to_json(shrinking_propositions_oracle(200, 8, 7)));
  auto o2 = canonical_dump(to_json(shrinking_propositions_oracle(200, 8, 7, 2)));
  CHECK(o1 == o2);
}
