#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bnopt/design.hpp"
#include "bnopt/objectives.hpp"
#include "bnopt/sensitivity.hpp"
#include "test_support.hpp"

using namespace bnopt;
using namespace bnopt::test;

namespace {

TrainedGP fit_to_function(const SearchSpace& space, int n, std::uint64_t seed,
                          const std::function<double(const Configuration&)>& f,
                          int restarts = 3) {
  Encoder enc(space);
  Dataset data;
  for (const auto& cfg : sample_initial_design(space, static_cast<std::size_t>(n), seed)) {
    data.points.push_back(enc.encode(cfg));
    data.y.conservativeResize(data.y.size() + 1);
    data.y[data.y.size() - 1] = f(cfg);
  }
  FitOptions opts;
  opts.restarts = restarts;
  opts.learn_noise = false;
  opts.search.max_evals = 200;
  return fit(enc, data, opts, seed);
}

}  // namespace

TEST_CASE("variable references resolve plain and qualified names") {
  SearchSpace space = bn2d_space();
  CHECK(resolve_variable(space, "x1").kind == VariableRef::Kind::shared_quant);
  CHECK(resolve_variable(space, "z").kind == VariableRef::Kind::branch);
  CHECK_THROWS_AS(resolve_variable(space, "v"), std::invalid_argument);  // ambiguous
  VariableRef v1 = resolve_variable(space, "v@z=1");
  CHECK(v1.kind == VariableRef::Kind::nested);
  CHECK(space.nested()[static_cast<std::size_t>(v1.index)].parent_level == "1");
  CHECK_THROWS_AS(resolve_variable(space, "nope"), std::invalid_argument);

  SearchSpace cnn = cnn_space();
  CHECK(resolve_variable(cnn, "depth").kind == VariableRef::Kind::nested);  // unique name
}

TEST_CASE("a constant surface gives flat curves at the constant") {
  SearchSpace space = bn2d_space();
  TrainedGP gp = fit_to_function(space, 12, 3, [](const Configuration&) { return 2.5; });
  auto curve = main_effect(gp, "x1", default_grid(space, resolve_variable(space, "x1"), 9), 200, 1);
  REQUIRE(curve.values.size() == 9);
  for (double v : curve.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-6));
  for (double se : curve.std_err) CHECK(se <= 1e-6);
}

TEST_CASE("main effect of a nested variable is rejected with guidance") {
  SearchSpace space = bn2d_space();
  TrainedGP gp = fit_to_function(space, 10, 4, [](const Configuration& c) {
    return c.quant_values.at("x1");
  });
  CHECK_THROWS_WITH_AS(main_effect(gp, "v@z=1", {GridValue{std::string("1")}}, 50, 1),
                       doctest::Contains("interaction_effect"), std::invalid_argument);
}

TEST_CASE("curve averages obey the law of total expectation") {
  Objective obj = make_builtin_objective("bn2d", 0.0);
  TrainedGP gp = fit_to_function(bn2d_space(), 30, 5,
                                 [&](const Configuration& c) { return obj.truth(c); });
  const SearchSpace& space = gp.encoder().space();

  const int n_mc = 400;
  // midpoint grid over x1 so the grid average estimates the uniform marginal
  const int G = 41;
  std::vector<GridValue> grid;
  for (int i = 0; i < G; ++i)
    grid.emplace_back(-10.0 + 20.0 * (i + 0.5) / static_cast<double>(G));
  EffectCurve curve = main_effect(gp, "x1", grid, n_mc, 11);

  double curve_avg = 0.0, curve_se2 = 0.0;
  for (int i = 0; i < G; ++i) {
    curve_avg += curve.values[static_cast<std::size_t>(i)];
    curve_se2 += curve.std_err[static_cast<std::size_t>(i)] *
                 curve.std_err[static_cast<std::size_t>(i)];
  }
  curve_avg /= G;
  curve_se2 /= static_cast<double>(G) * G;

  // grand mean under the same averaging measure (uniform branch levels,
  // nested values conditional on the drawn level)
  Rng rng = make_rng(12);
  double grand = 0.0, grand_sq = 0.0;
  const int n_grand = 4000;
  for (int t = 0; t < n_grand; ++t) {
    Configuration cfg;
    cfg.quant_values["x1"] = -10.0 + 20.0 * uniform01(rng);
    cfg.quant_values["x2"] = -5.0 + 10.0 * uniform01(rng);
    int z = uniform01(rng) < 0.5 ? 1 : 2;
    cfg.branch_values["z"] = std::to_string(z);
    int g = z == 1 ? 3 : 2;
    int v = 1 + std::min(static_cast<int>(uniform01(rng) * g), g - 1);
    cfg.nested_values["v"] = std::to_string(v);
    double m = gp.posterior(cfg).mean;
    grand += m;
    grand_sq += m * m;
  }
  grand /= n_grand;
  double grand_se2 = std::max(0.0, grand_sq / n_grand - grand * grand) / n_grand;

  double tol = 3.0 * std::sqrt(curve_se2 + grand_se2) + 0.02;  // + grid discretization
  CHECK(std::fabs(curve_avg - grand) <= tol);
}

TEST_CASE("bn2d: branch main effect shows the +z shift") {
  Objective obj = make_builtin_objective("bn2d", 0.0);
  TrainedGP gp = fit_to_function(bn2d_space(), 60, 6,
                                 [&](const Configuration& c) { return obj.truth(c); }, 4);
  const SearchSpace& space = gp.encoder().space();
  EffectCurve curve =
      main_effect(gp, "z", default_grid(space, resolve_variable(space, "z"), 2), 1500, 13);
  REQUIRE(curve.values.size() == 2);
  double diff = curve.values[1] - curve.values[0];

  // independent brute-force Monte Carlo on the true function
  Rng rng = make_rng(14);
  double truth_diff;
  {
    double sums[2] = {0, 0};
    const int T = 20000;
    for (int t = 0; t < T; ++t) {
      double x1 = -10 + 20 * uniform01(rng);
      double x2 = -5 + 10 * uniform01(rng);
      int v1 = 1 + static_cast<int>(uniform01(rng) * 3);
      int v2 = 1 + static_cast<int>(uniform01(rng) * 2);
      sums[0] += eval_bn2d(x1, x2, 1, std::min(v1, 3), 0.0, 0);
      sums[1] += eval_bn2d(x1, x2, 2, std::min(v2, 2), 0.0, 0);
    }
    truth_diff = (sums[1] - sums[0]) / T;
  }
  CHECK(truth_diff == doctest::Approx(1.0).epsilon(0.1));  // the additive +z term dominates
  CHECK(diff == doctest::Approx(truth_diff).epsilon(0.2));
}

TEST_CASE("additive surfaces give parallel interaction curves") {
  SearchSpace space = quant_only_space(2);
  auto additive = [](const Configuration& c) {
    return std::exp(-2.0 * c.quant_values.at("x1")) + 1.0 / (1.0 + c.quant_values.at("x2"));
  };
  TrainedGP gp = fit_to_function(space, 30, 7, additive, 4);

  auto grid = default_grid(space, resolve_variable(space, "x1"), 11);
  auto levels = default_levels(space, resolve_variable(space, "x2"), 4);
  auto curves = interaction_effect(gp, "x1", "x2", grid, levels, 800, 15);
  REQUIRE(curves.size() == 4);

  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      double shift = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i)
        shift += curves[a].values[i] - curves[b].values[i];
      shift /= static_cast<double>(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double dev = std::fabs(curves[a].values[i] - curves[b].values[i] - shift);
        double se = std::sqrt(curves[a].std_err[i] * curves[a].std_err[i] +
                              curves[b].std_err[i] * curves[b].std_err[i]);
        CHECK(dev <= 3.0 * se + 0.02);  // MC error plus a little surrogate bias
      }
    }
  }
}

TEST_CASE("bn2d: v and x1 interact under z=1 (curves cross)") {
  Objective obj = make_builtin_objective("bn2d", 0.0);

  auto crossings = [](const std::vector<EffectCurve>& curves) {
    // sign changes of curve(v=1) - curve(v=3) over the x1 grid
    const auto& a = curves.front().values;
    const auto& b = curves.back().values;
    int changes = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
      double d0 = a[i - 1] - b[i - 1];
      double d1 = a[i] - b[i];
      if (d0 * d1 < 0) ++changes;
    }
    return changes;
  };

  // brute-force oracle on the true function first
  {
    std::vector<EffectCurve> truth(2);
    Rng rng = make_rng(16);
    for (int g = 0; g <= 20; ++g) {
      double x1 = -10 + g;
      double sums[2] = {0, 0};
      const int T = 2000;
      for (int t = 0; t < T; ++t) {
        double x2 = -5 + 10 * uniform01(rng);
        sums[0] += eval_bn2d(x1, x2, 1, 1, 0.0, 0);
        sums[1] += eval_bn2d(x1, x2, 1, 3, 0.0, 0);
      }
      truth[0].values.push_back(sums[0] / T);
      truth[1].values.push_back(sums[1] / T);
    }
    CHECK(crossings(truth) >= 1);
  }

  TrainedGP gp = fit_to_function(bn2d_space(), 80, 8,
                                 [&](const Configuration& c) { return obj.truth(c); }, 4);
  const SearchSpace& space = gp.encoder().space();
  auto grid = default_grid(space, resolve_variable(space, "x1"), 21);
  auto curves = interaction_effect(gp, "x1", "v@z=1", grid,
                                   {GridValue{std::string("1")}, GridValue{std::string("3")}},
                                   600, 17);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].conditioning_level == "1");
  CHECK(crossings(curves) >= 1);
}

TEST_CASE("single conditioning level reduces to a conditional main effect") {
  SearchSpace space = bn2d_space();
  TrainedGP gp = fit_to_function(space, 15, 9, [](const Configuration& c) {
    return c.quant_values.at("x1") * 0.1;
  });
  auto grid = default_grid(space, resolve_variable(space, "x1"), 5);
  auto curves =
      interaction_effect(gp, "x1", "z", grid, {GridValue{std::string("2")}}, 300, 19);
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].conditioning_level == "2");
  CHECK(curves[0].values.size() == 5);
}

TEST_CASE("incompatible nesting is rejected") {
  SearchSpace space = bn2d_space();
  TrainedGP gp = fit_to_function(space, 10, 10, [](const Configuration& c) {
    return c.quant_values.at("x2");
  });
  auto grid1 = default_grid(space, resolve_variable(space, "v@z=1"), 3);
  CHECK_THROWS_AS(
      interaction_effect(gp, "v@z=1", "v@z=2", grid1, {GridValue{std::string("1")}}, 50, 1),
      std::invalid_argument);
  // a nested variable against its own parent cannot vary the parent
  CHECK_THROWS_AS(interaction_effect(gp, "v@z=1", "z", grid1, {GridValue{std::string("2")}}, 50, 1),
                  std::invalid_argument);
}

TEST_CASE("curves are deterministic and standard errors shrink like 1/sqrt(n)") {
  SearchSpace space = bn2d_space();
  Objective obj = make_builtin_objective("bn2d", 0.0);
  TrainedGP gp = fit_to_function(space, 20, 11,
                                 [&](const Configuration& c) { return obj.truth(c); });
  auto grid = default_grid(space, resolve_variable(space, "x1"), 7);

  EffectCurve a = main_effect(gp, "x1", grid, 300, 23);
  EffectCurve b = main_effect(gp, "x1", grid, 300, 23);
  CHECK(a.values == b.values);
  CHECK(a.std_err == b.std_err);

  // quadrupling n_mc halves the median standard error (within 20%)
  std::vector<double> ratio;
  for (std::uint64_t s = 0; s < 5; ++s) {
    EffectCurve small = main_effect(gp, "x1", grid, 500, 100 + s);
    EffectCurve big = main_effect(gp, "x1", grid, 2000, 200 + s);
    auto med = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v[v.size() / 2];
    };
    ratio.push_back(med(small.std_err) / med(big.std_err));
  }
  std::sort(ratio.begin(), ratio.end());
  CHECK(ratio[2] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("effects CSV has the documented columns") {
  SearchSpace space = bn2d_space();
  TrainedGP gp = fit_to_function(space, 10, 12, [](const Configuration& c) {
    return c.quant_values.at("x1") * 0.01;
  });
  auto grid = default_grid(space, resolve_variable(space, "x1"), 3);
  auto curve = main_effect(gp, "x1", grid, 50, 29);
  std::ostringstream os;
  write_effects_csv(os, {curve});
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "variable,grid_value,conditioning_level,mean,std_err,n_mc");
  int rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}
