#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "hybridgrid/cost.hpp"

using namespace hybridgrid;
using namespace hybridgrid::testing;

namespace {

Network bare_net() {
  Network net;
  net.buses = {make_bus(1, 10.0), make_bus(2)};
  net.branches = {make_branch(1, 1, 2)};
  net.generators = {make_gen(1, 1, 50.0, 10.0)};
  return net;
}

Conversion line_conversion(Id branch_id, double km, double installed) {
  Conversion conv;
  conv.branch_id = branch_id;
  conv.kind = BranchKind::line;
  conv.length_km = km;
  conv.rating_before = installed;
  conv.target_rating = installed;
  conv.converter_id = "M5";
  conv.module_count = 1;
  conv.installed_mva = installed;
  return conv;
}

}  // namespace

TEST_CASE("unit-cost anchors are exact in integer thousands of euro") {
  const CostAssumptions assumptions;
  Network net = bare_net();

  SUBCASE("100 km of conversion costs 20 MEUR") {
    TransitionPlan plan;
    plan.conversions = {line_conversion(1, 100.0, 0.0)};
    plan.conversions[0].installed_mva = 0.0;  // isolate the km item
    const CostReport report = plan_cost(plan, net, assumptions);
    CHECK(report.items[0].category == "ac_to_dc_conversion");
    CHECK(report.items[0].total_keur == 20000);
  }
  SUBCASE("a 1000 MVA VSC substation costs 102 MEUR") {
    CostAssumptions one_terminal = assumptions;
    one_terminal.vsc_terminals_per_line = 1;
    TransitionPlan plan;
    plan.conversions = {line_conversion(1, 0.0, 1000.0)};
    const CostReport report = plan_cost(plan, net, one_terminal);
    CHECK(report.items[1].category == "vsc_substations");
    CHECK(report.items[1].total_keur == 102000);
  }
  SUBCASE("empty plan, no new lines: zero") {
    const CostReport report = plan_cost(TransitionPlan{}, net, assumptions);
    CHECK(report.grand_total_keur == 0);
  }
}

TEST_CASE("plan_cost covers conversions, stations and new lines") {
  const CostAssumptions assumptions;
  Network net = bare_net();
  net.branches.push_back(make_branch(2, 1, 2, 0.01, 10.0, 100.0, 80.0,
                                     BranchKind::line, BranchStatus::new_build,
                                     true));
  net.hvdc_links = {make_link(7, 1, 2, 100.0, 1.9, 0.0, 120.0),
                    make_link(8, 1, 2, 100.0, 1.9, 0.0, 60.0,
                              LinkOrigin::new_line, true)};
  net.hvdc_links[0].origin = LinkOrigin::new_line;  // overhead

  TransitionPlan plan;
  plan.conversions = {line_conversion(1, 50.0, 200.0)};
  Conversion b2b;
  b2b.branch_id = 3;
  b2b.kind = BranchKind::transformer;
  b2b.length_km = 0.0;
  b2b.installed_mva = 300.0;
  b2b.converter_id = "M3";
  b2b.module_count = 1;
  plan.conversions.push_back(b2b);

  const CostReport report = plan_cost(plan, net, assumptions);
  auto item = [&report](const std::string& cat) {
    for (const auto& it : report.items)
      if (it.category == cat) return it;
    throw std::runtime_error("missing category " + cat);
  };
  CHECK(item("ac_to_dc_conversion").total_keur == 50 * 200);
  CHECK(item("vsc_substations").total_keur == 2 * 200 * 102);    // 2 terminals
  CHECK(item("b2b_stations").total_keur == 300 * 102);           // counted once
  CHECK(item("new_dc_overhead").total_keur == 120 * 1500);
  CHECK(item("new_dc_cable").total_keur == 60 * 4000);
  CHECK(item("new_ac_lines").total_keur == 80 * 1500);
  long long sum = 0;
  for (const auto& it : report.items) sum += it.total_keur;
  CHECK(report.grand_total_keur == sum);
}

TEST_CASE("plan_cost is additive over disjoint plans") {
  const CostAssumptions assumptions;
  const Network net = bare_net();
  TransitionPlan a, b, both;
  a.conversions = {line_conversion(1, 37.0, 250.0)};
  b.conversions = {line_conversion(2, 11.0, 450.0)};
  both.conversions = {a.conversions[0], b.conversions[0]};
  const long long ca = plan_cost(a, net, assumptions).grand_total_keur;
  const long long cb = plan_cost(b, net, assumptions).grand_total_keur;
  const long long cboth = plan_cost(both, net, assumptions).grand_total_keur;
  const long long cnet = plan_cost(TransitionPlan{}, net, assumptions).grand_total_keur;
  CHECK(cboth == ca + cb - cnet);  // the net's own lines count once
}

TEST_CASE("savings_vs_reference on the cable-vs-overhead fixture") {
  const CostAssumptions assumptions;
  Network base = bare_net();
  base.hvdc_links = {make_link(1, 1, 2, 500.0, 1.9, 0.0, 2600.0,
                               LinkOrigin::new_line, false)};
  Network reference = bare_net();
  reference.hvdc_links = {make_link(1, 1, 2, 500.0, 1.9, 0.0, 2600.0,
                                    LinkOrigin::new_line, true)};

  const CostReport savings = savings_vs_reference(base, reference, assumptions);
  // cabling premium: 2600 km * (4.0 - 1.5) MEUR/km = 6.5 bn EUR
  CHECK(savings.grand_total_keur == 6500000);

  SUBCASE("identical networks: zero") {
    const CostReport zero = savings_vs_reference(base, base, assumptions);
    CHECK(zero.grand_total_keur == 0);
  }
  SUBCASE("antisymmetry") {
    const CostReport flipped = savings_vs_reference(reference, base, assumptions);
    CHECK(flipped.grand_total_keur == -savings.grand_total_keur);
  }
}

TEST_CASE("a 100 km extra AC line credits 150 MEUR") {
  const CostAssumptions assumptions;
  const Network base = bare_net();
  Network reference = bare_net();
  reference.branches.push_back(make_branch(2, 1, 2, 0.01, 10.0, 100.0, 100.0,
                                           BranchKind::line,
                                           BranchStatus::new_build, true));
  const CostReport savings = savings_vs_reference(base, reference, assumptions);
  CHECK(savings.grand_total_keur == 150000);
}

TEST_CASE("fit_loss_model ordinary least squares") {
  SUBCASE("exact line is recovered") {
    std::vector<std::pair<double, double>> pts;
    for (double l : {0.0, 50.0, 100.0, 200.0}) pts.push_back({l, 0.01 * l + 1.0});
    const LossFit fit = fit_loss_model(pts);
    CHECK(fit.k == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(fit.d == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("two points define the line") {
    const LossFit fit = fit_loss_model({{0.0, 1.9}, {100.0, 2.9}});
    CHECK(fit.k == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(fit.d == doctest::Approx(1.9).epsilon(1e-12));
  }
  SUBCASE("omitting a planted outlier recovers the line") {
    std::vector<std::pair<double, double>> pts;
    for (double l : {0.0, 75.0, 150.0, 225.0}) pts.push_back({l, 0.004 * l + 1.7});
    pts.insert(pts.begin() + 2, {50.0, 9.9});  // the typo
    const LossFit fit = fit_loss_model(pts, {2});
    CHECK(fit.k == doctest::Approx(0.004).epsilon(1e-9));
    CHECK(fit.d == doctest::Approx(1.7).epsilon(1e-9));
  }
  SUBCASE("closed-form check on noisy data") {
    std::mt19937 rng(17);
    std::vector<std::pair<double, double>> pts;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 12;
    for (int i = 0; i < n; ++i) {
      const double x = 10.0 * i;
      const double y = 0.006 * x + 1.4 +
                       std::uniform_real_distribution<double>(-0.1, 0.1)(rng);
      pts.push_back({x, y});
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double k = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double d = (sy - k * sx) / n;
    const LossFit fit = fit_loss_model(pts);
    CHECK(fit.k == doctest::Approx(k).epsilon(1e-9));
    CHECK(fit.d == doctest::Approx(d).epsilon(1e-9));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_loss_model({{0.0, 1.0}}), ValidationError);
    CHECK_THROWS_AS(fit_loss_model({{5.0, 1.0}, {5.0, 2.0}}), ValidationError);
    CHECK_THROWS_AS(fit_loss_model({{0.0, 1.0}, {1.0, 1.1}, {2.0, 1.2}}, {0, 1}),
                    ValidationError);
  }
}
