#include <catch2/catch_amalgamated.hpp>

#include "maas/utility.hpp"

using namespace maas;

namespace {

// Order-side profile from the dissertation's running example: distance, size,
// rating, price with weights 0.2/0.1/0.3/0.4.
UtilityProfile example_order_profile() {
  UtilityProfile p;
  p.terms.push_back({0.2, quadratic_curve(0.595, -1.516, 0.925, 50, 500), Attribute::Distance});
  p.terms.push_back({0.1,
                     categorical_curve({{"large", 1.0}, {"medium", 0.6}, {"small", 0.3}}),
                     Attribute::SupplierSize});
  p.terms.push_back({0.3, quadratic_curve(-0.219, 1.225, -0.005, 1, 5), Attribute::SupplierRating});
  p.terms.push_back({0.4, quadratic_curve(0.922, -1.962, 1.033, 640, 880), Attribute::Price});
  return p;
}

UtilityProfile example_supplier_profile() {
  UtilityProfile p;
  p.terms.push_back({0.2,
                     categorical_curve({{"aluminum", 1.0}, {"titanium", 0.7}, {"steel", 0.3}}),
                     Attribute::Material});
  p.terms.push_back({0.3, quadratic_curve(-0.240, 1.329, -0.048, 1, 8), Attribute::Urgency});
  p.terms.push_back({0.5, quadratic_curve(-0.444, 1.401, 0.032, 150, 1600), Attribute::Revenue});
  return p;
}

Contract contract_with(int order, int supplier, double price) {
  Contract c;
  c.terms.order_id = order;
  c.terms.supplier_id = supplier;
  c.terms.price = price;
  return c;
}

}  // namespace

TEST_CASE("normalize maps the input range onto [0,1]") {
  CHECK(normalize(50, 50, 500) == Catch::Approx(0.0));
  CHECK(normalize(500, 50, 500) == Catch::Approx(1.0));
  CHECK(normalize(400, 50, 500) == Catch::Approx(0.7778).margin(1e-4));
  CHECK(normalize(1000, 50, 500) == Catch::Approx(1.0));  // clamped
  CHECK_THROWS_AS(normalize(1.0, 2.0, 2.0), InvalidRangeError);
}

TEST_CASE("eval_curve normalizes, evaluates and clamps") {
  const UtilityCurve price = quadratic_curve(0.922, -1.962, 1.033, 640, 880);
  CHECK(eval_curve(price, 750) == Catch::Approx(0.3275).margin(1e-3));
  const UtilityCurve size =
      categorical_curve({{"large", 1.0}, {"medium", 0.6}, {"small", 0.3}});
  CHECK(eval_curve(size, std::string("large")) == Catch::Approx(1.0));
  CHECK_THROWS_AS(eval_curve(size, std::string("gigantic")), UnknownLabelError);
  const UtilityCurve rating = quadratic_curve(-0.219, 1.225, -0.005, 1, 5);
  CHECK(eval_curve(rating, 1) == Catch::Approx(0.0));  // clamp at -0.005
}

TEST_CASE("monotone table curves interpolate linearly") {
  const UtilityCurve t = table_curve({{0.0, 0.0}, {0.5, 0.8}, {1.0, 1.0}}, 0, 10);
  CHECK(eval_curve(t, 0.0) == Catch::Approx(0.0));
  CHECK(eval_curve(t, 2.5) == Catch::Approx(0.4));
  CHECK(eval_curve(t, 7.5) == Catch::Approx(0.9));
  CHECK(eval_curve(t, 10.0) == Catch::Approx(1.0));
}

TEST_CASE("the dissertation's worked contract quantification reproduces") {
  AttributeContext order_ctx;
  order_ctx.set(Attribute::Distance, 400.0)
      .set(Attribute::SupplierSize, "large")
      .set(Attribute::SupplierRating, 3.0)
      .set(Attribute::Price, 750.0);
  CHECK(contract_utility(example_order_profile(), order_ctx) ==
        Catch::Approx(0.418).margin(1e-3));

  AttributeContext supplier_ctx;
  supplier_ctx.set(Attribute::Material, "aluminum")
      .set(Attribute::Urgency, 4.0)
      .set(Attribute::Revenue, 750.0);
  CHECK(contract_utility(example_supplier_profile(), supplier_ctx) ==
        Catch::Approx(0.611).margin(1e-3));
}

TEST_CASE("degenerate single-curve profile yields its curve value") {
  UtilityProfile p;
  p.terms.push_back({1.0, categorical_curve({{"yes", 1.0}}), Attribute::Material});
  AttributeContext ctx;
  ctx.set(Attribute::Material, "yes");
  CHECK(contract_utility(p, ctx) == Catch::Approx(1.0));
  AttributeContext empty;
  CHECK_THROWS_AS(contract_utility(p, empty), MissingAttributeError);
}

TEST_CASE("profile weights validate") {
  UtilityProfile p = example_order_profile();
  CHECK_NOTHROW(validate(p));
  p.terms[0].weight = 0.5;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p.terms[0].weight = -0.2;
  CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("order utility is non-increasing in price for the example price curve") {
  const UtilityCurve price = quadratic_curve(0.922, -1.962, 1.033, 640, 880);
  double prev = 2.0;
  for (int i = 0; i <= 100; ++i) {
    const double x = 640.0 + 240.0 * i / 100.0;
    const double u = eval_curve(price, x);
    CHECK(u <= prev + 1e-12);
    prev = u;
  }
}

TEST_CASE("contract utilities stay in [0,1] and pair totals in [0,2]") {
  const UtilityProfile po = example_order_profile();
  const UtilityProfile ps = example_supplier_profile();
  for (int i = 0; i <= 20; ++i) {
    AttributeContext oc;
    oc.set(Attribute::Distance, 50.0 + 450.0 * i / 20.0)
        .set(Attribute::SupplierSize, i % 2 ? "small" : "large")
        .set(Attribute::SupplierRating, 1.0 + 4.0 * i / 20.0)
        .set(Attribute::Price, 640.0 + 240.0 * i / 20.0);
    AttributeContext sc;
    sc.set(Attribute::Material, i % 3 ? "steel" : "aluminum")
        .set(Attribute::Urgency, 1.0 + 7.0 * i / 20.0)
        .set(Attribute::Revenue, 150.0 + 1450.0 * i / 20.0);
    const double uo = contract_utility(po, oc);
    const double us = contract_utility(ps, sc);
    CHECK(uo >= 0.0);
    CHECK(uo <= 1.0);
    CHECK(us >= 0.0);
    CHECK(us <= 1.0);
    CHECK(uo + us <= 2.0);
  }
}

TEST_CASE("rank_contracts sorts descending with deterministic ties") {
  auto ranked = rank_contracts<Contract>({{contract_with(1, 1, 100), 0.3},
                                          {contract_with(2, 1, 100), 0.7}});
  CHECK(ranked[0].first.order_id() == 2);
  CHECK(ranked[1].first.order_id() == 1);

  auto tied = rank_contracts<Contract>({{contract_with(2, 1, 100), 0.5},
                                        {contract_with(1, 1, 100), 0.5}});
  CHECK(tied[0].first.order_id() == 1);

  auto empty = rank_contracts<Contract>({});
  CHECK(empty.empty());

  // idempotent
  auto again = rank_contracts(ranked);
  CHECK(again[0].first.order_id() == ranked[0].first.order_id());
  CHECK(again[1].first.order_id() == ranked[1].first.order_id());
}

TEST_CASE("haversine distance matches known city pairs roughly") {
  const GeoPoint raleigh{35.78, -78.64};
  const GeoPoint atlanta{33.75, -84.39};
  const double d = haversine_miles(raleigh, atlanta);
  CHECK(d > 300.0);
  CHECK(d < 420.0);
  CHECK(haversine_miles(raleigh, raleigh) == Catch::Approx(0.0).margin(1e-9));
}
