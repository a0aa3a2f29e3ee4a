#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "treespike/analysis.hpp"
#include "treespike/oracle.hpp"

using namespace treespike;

namespace {

TreeSpec tree(int d, std::uint32_t up = 1, std::uint32_t down = 1) {
  TreeSpec s;
  s.d = d;
  s.w_up = up;
  s.w_down = down;
  s.allow_zero_weights = up == 0 && down == 0;
  return s;
}

SimParams params(TreeSpec spec, double gamma, double horizon, std::uint64_t seed = 3) {
  SimParams p;
  p.spec = spec;
  p.gamma = gamma;
  p.horizon = horizon;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("nu_rho") {
  CHECK(nu_rho(PotentialConfig::single_root(), 0.3) == 1.0);
  CHECK(nu_rho(PotentialConfig::single_root(), 7.0) == 1.0);

  PotentialConfig x;
  x.set(parent(root()), 2);
  x.set(child(root(), 1, 3), 3);
  CHECK(nu_rho(x, 0.5) == doctest::Approx(5.5));

  x.set(child(child(root(), 2, 3), 1, 3), 4);
  CHECK(nu_rho(x, 1.0) == static_cast<double>(x.total_potential()));
  CHECK_THROWS_AS(nu_rho(x, 0.0), std::invalid_argument);
}

TEST_CASE("phi_gamma and rho*") {
  CHECK(phi_gamma(1.0, 2.0, tree(3)) == doctest::Approx(1.0));
  CHECK(phi_gamma(rho_star(tree(5)), 0.0, tree(5)) == doctest::Approx(std::exp(3.0)));

  CHECK(rho_star(tree(5)) == doctest::Approx(0.5));
  CHECK(rho_star(tree(2)) == doctest::Approx(1.0));
  CHECK(rho_star(tree(3, 4, 2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rho_star(tree(3, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(rho_star(tree(3, 0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(phi_gamma(0.0, 1.0, tree(3)), std::invalid_argument);
  CHECK_THROWS_AS(phi_gamma(1.0, -1.0, tree(3)), std::invalid_argument);

  for (const TreeSpec& s : {tree(5), tree(3, 4, 2), tree(6), tree(4, 1, 3)}) {
    const double best = phi_gamma(rho_star(s), 0.7, s);
    double grid_min = INFINITY, arg = 0.0;
    for (int i = 1; i <= 4000; ++i) {
      const double rho = 0.001 * i;
      const double v = phi_gamma(rho, 0.7, s);
      CHECK(v >= best * (1.0 - 1e-12));
      if (v < grid_min) {
        grid_min = v;
        arg = rho;
      }
    }
    CHECK(arg == doctest::Approx(rho_star(s)).epsilon(2e-3));
  }
}

TEST_CASE("theory bounds") {
  auto g = theory_bracket(Proxy::global, tree(6));
  CHECK(g.theory_lower == 4.0);
  CHECK(g.theory_upper == 5.0);
  auto l = theory_bracket(Proxy::local, tree(6));
  CHECK(l.theory_lower == 0.0);
  CHECK(l.theory_upper == doctest::Approx(2.0 * std::sqrt(5.0) - 1.0));
  CHECK(l.theory_upper == doctest::Approx(3.472).epsilon(1e-3));

  // The local window [0, 2 sqrt(d - 1) - 1] and the global window [d - 2, d - 1]
  // are disjoint exactly from d = 6 on.
  for (int d = 2; d <= 30; ++d) {
    const bool disjoint = local_upper_bound(tree(d)) < global_lower_bound(tree(d));
    CHECK(disjoint == (d >= 6));
  }
}

TEST_CASE("survival estimates") {
  SUBCASE("zero weights: single neuron race") {
    auto e = estimate_survival(params(tree(3, 0, 0), 1.0, 5.0), Proxy::global, 400);
    CHECK(e.n_runs == 400);
    CHECK(e.p_hat <= e.ci_half_width + std::exp(-10.0));
    CHECK(e.proxy == Proxy::global);
  }
  SUBCASE("leakless tree survives every run") {
    auto e = estimate_survival(params(tree(3), 0.0, 3.0), Proxy::global, 100);
    CHECK(e.p_hat == 1.0);
    CHECK(e.flagged_runs == 0);
  }
  SUBCASE("the line dies out above lambda - 1") {
    auto e = estimate_survival(params(tree(2), 2.0, 50.0), Proxy::global, 400);
    CHECK(e.p_hat < 0.01);
  }
  SUBCASE("n_runs guard and certification with the local proxy") {
    CHECK_THROWS_AS(estimate_survival(params(tree(3), 1.0, 1.0), Proxy::global, 99), std::invalid_argument);
    auto p = params(tree(3), 1.0, 1.0);
    p.certify_eps = 1e-9;
    CHECK_THROWS_AS(estimate_survival(p, Proxy::local, 100), std::invalid_argument);
  }
  SUBCASE("deterministic given the seed") {
    auto p = params(tree(3), 1.2, 4.0, 17);
    auto a = estimate_survival(p, Proxy::local, 150);
    auto b = estimate_survival(p, Proxy::local, 150);
    CHECK(a.successes == b.successes);
  }
  SUBCASE("certified runs count as survivors and report their error") {
    auto p = params(tree(4), 1.0, 8.0);
    p.certify_eps = 1e-9;
    auto e = estimate_survival(p, Proxy::global, 200);
    CHECK(e.certified_runs > 0);
    CHECK(e.certify_error <= 1e-9);
    CHECK(e.p_hat >= oracle::survival_lower_bound(4, 1.0) - e.ci_half_width);
  }
}

TEST_CASE("mean potential curve") {
  SUBCASE("starts at one with unit envelopes") {
    auto c = mean_potential_curve(params(tree(4), 1.0, 1.0), {0.0, 1.0}, 2000);
    CHECK(c[0].mean == 1.0);
    CHECK(c[0].ci == 0.0);
    CHECK(c[0].lower_envelope == 1.0);
    CHECK(c[0].upper_envelope == 1.0);
    CHECK(c[1].lower_envelope == doctest::Approx(std::exp(1.0)));
    CHECK(c[1].upper_envelope == doctest::Approx(std::exp(2.0)));
    CHECK(c[1].mean + c[1].ci >= c[1].lower_envelope);
    CHECK(c[1].mean - c[1].ci <= c[1].upper_envelope);
  }
  SUBCASE("zero weights decay like exp(-2t)") {
    auto c = mean_potential_curve(params(tree(3, 0, 0), 1.0, 1.5), {0.5, 1.0, 1.5}, 4000);
    for (const auto& pt : c) CHECK(std::abs(pt.mean - std::exp(-2.0 * pt.t)) <= pt.ci);
  }
  SUBCASE("certification is rejected") {
    auto p = params(tree(4), 1.0, 1.0);
    p.certify_eps = 1e-6;
    CHECK_THROWS_AS(mean_potential_curve(p, {1.0}, 10), std::invalid_argument);
  }
}

TEST_CASE("supermartingale probe") {
  std::vector<double> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back(0.5 * i);
  SUBCASE("above the local bound") {
    auto pr = supermartingale_probe(params(tree(5), 3.5, 4.0), grid, 3000);
    CHECK(pr.assertion_applies);
    CHECK(pr.points[0].mean == 1.0);
    CHECK(pr.points[0].standard_error == 0.0);
    CHECK(pr.non_increasing());
  }
  SUBCASE("exploratory below the bound") {
    auto pr = supermartingale_probe(params(tree(5), 0.0, 1.0), {0.0, 0.5, 1.0}, 200);
    CHECK_FALSE(pr.assertion_applies);
    CHECK(pr.points.size() == 3);
    CHECK(pr.points[0].mean == 1.0);
  }
}

TEST_CASE("scan brackets and monotonicity reports") {
  auto est = [](double p, double ci) {
    SurvivalEstimate e;
    e.p_hat = p;
    e.ci_half_width = ci;
    return e;
  };
  auto r = bracket_from(Proxy::global, tree(6), {3.0, 3.5, 4.0, 4.5},
                        {est(0.3, 0.02), est(0.1, 0.02), est(0.01, 0.02), est(0.0, 0.0)});
  CHECK(r.bracket.found);
  CHECK(r.bracket.gamma_lo == 3.5);
  CHECK(r.bracket.gamma_hi == 4.0);
  CHECK(r.bracket.theory_lower == 4.0);
  CHECK(r.non_monotone.empty());

  auto bumpy = bracket_from(Proxy::global, tree(6), {1.0, 2.0}, {est(0.1, 0.01), est(0.3, 0.01)});
  CHECK(bumpy.non_monotone == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(gamma_scan(Proxy::global, params(tree(6), 1.0, 1.0), {}, 100), std::invalid_argument);
  CHECK_THROWS_AS(gamma_scan(Proxy::global, params(tree(6), 1.0, 1.0), {2.0, 1.0}, 100), std::invalid_argument);

  auto scan = gamma_scan(Proxy::global, params(tree(2), 0.0, 20.0), {0.0, 3.0}, 100);
  CHECK(scan.estimates[0].p_hat == 1.0);
  CHECK(scan.bracket.found);
  CHECK(scan.bracket.gamma_lo == 0.0);
  CHECK(scan.bracket.gamma_hi == 3.0);
}

TEST_CASE("chained estimates are monotone run by run") {
  auto p = params(tree(3), 0.0, 6.0, 5);
  p.certify_eps = 1e-9;
  auto c = chained_survival({0.5, 1.0, 1.5, 2.0}, p, Proxy::global, 200);
  CHECK(c.pathwise_violations == 0);
  CHECK(c.non_monotone_runs == 0);
  for (std::size_t j = 0; j + 1 < c.estimates.size(); ++j) CHECK(c.estimates[j].successes >= c.estimates[j + 1].successes);
  CHECK(c.estimates.front().successes > c.estimates.back().successes);
}

TEST_CASE("growth on survival") {
  SUBCASE("leakless growth") {
    auto g = growth_on_survival_probe(params(tree(3), 0.0, 3.0), {1.0, 2.0, 3.0}, 100);
    CHECK_FALSE(g.degenerate);
    CHECK(g.increasing);
    CHECK(g.points[0].survivors == 100);
  }
  SUBCASE("supercritical d = 4, gamma = 1") {
    auto g = growth_on_survival_probe(params(tree(4), 1.0, 3.0), {1.0, 2.0, 3.0}, 300);
    CHECK_FALSE(g.degenerate);
    CHECK(g.increasing);
  }
  SUBCASE("subcritical conditioning degenerates") {
    auto g = growth_on_survival_probe(params(tree(3, 0, 0), 1.0, 20.0), {5.0, 20.0}, 100);
    CHECK(g.degenerate);
    CHECK_FALSE(g.increasing);
  }
}

TEST_CASE("local proxy bracket from level pruning") {
  const auto s = tree(6);
  CHECK(first_moment_root_bound(s, 3.8, 12.5, 25.0) == doctest::Approx(0.0497).epsilon(5e-3));
  CHECK(first_moment_root_bound(s, 3.8, 50.0, 100.0) < 1e-6);

  auto p = params(s, 3.8, 8.0, 9);
  auto b = local_survival_bracket(p, {4.0, 8.0}, 5, 300);
  REQUIRE(b.points.size() == 2);
  for (const auto& pt : b.points) {
    CHECK(pt.p_lower <= pt.p_upper);
    CHECK(pt.budget_mean >= 0.0);
  }
  const auto full = estimate_survival(p, Proxy::local, 300);
  const auto& last = b.points.back();
  CHECK(full.p_hat >= last.p_lower - last.ci_lower - full.ci_half_width);
  CHECK(full.p_hat <= last.p_upper + last.ci_upper + full.ci_half_width);
}
