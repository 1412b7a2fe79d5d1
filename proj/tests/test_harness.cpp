#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xover/xover.hpp"

using namespace xover;

namespace {

ExperimentConfig small_config() {
  std::istringstream in(R"(
# tiny grid: one exhaustive size and one descent-reference size
experiment_id = fig2
n_dims_list = 8, 12
max_order = 2
instances_per_point = 2
random_m = 2000
pool = 50
offspring_pool = 50
repeats = 5
gd_restarts = 20
master_seed = 17
output_dir = unused
offspring_samples = 200
exhaustive_cap = 10
)");
  return parse_config(in);
}

std::string csv_of(const ExperimentTable& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Config, ParsesEveryKey) {
  std::istringstream in(R"(experiment_id = fig3
n_dims_list = 30
max_order = 3   # trailing comment
instances_per_point = 4
random_m = 10
pool = 11
offspring_pool = 12
repeats = 13
n_parents = 5
gd_restarts = 14
master_seed = 99
output_dir = results/x
offspring_samples = 15
exhaustive_cap = 16
match_budget = true
refresh_parents = no
)");
  const auto c = parse_config(in);
  EXPECT_EQ(c.experiment_id, "fig3");
  EXPECT_EQ(c.n_dims_list, std::vector<int>{30});
  EXPECT_EQ(c.max_order, 3);
  EXPECT_EQ(c.instances_per_point, 4);
  EXPECT_EQ(c.budgets.random_m, 10u);
  EXPECT_EQ(c.budgets.pool, 11u);
  EXPECT_EQ(c.budgets.offspring_pool, 12u);
  EXPECT_EQ(c.budgets.repeats, 13u);
  EXPECT_EQ(c.budgets.n_parents, 5);
  EXPECT_EQ(c.budgets.gd_restarts, 14u);
  EXPECT_EQ(c.master_seed, 99u);
  EXPECT_EQ(c.output_dir, "results/x");
  EXPECT_EQ(c.offspring_samples, 15u);
  EXPECT_EQ(c.exhaustive_cap, 16);
  EXPECT_TRUE(c.match_budget);
  EXPECT_FALSE(c.refresh_parents);
}

TEST(Config, Defaults) {
  std::istringstream in("");
  const auto c = parse_config(in);
  EXPECT_EQ(c.n_dims_list, (std::vector<int>{10, 14, 18, 22, 26, 30}));
  EXPECT_EQ(c.instances_per_point, 10);
  EXPECT_EQ(c.budgets.random_m, 1000000u);
  EXPECT_EQ(c.budgets.pool, 1000u);
  EXPECT_EQ(c.budgets.offspring_pool, 1000u);
  EXPECT_EQ(c.budgets.repeats, 333u);
  EXPECT_EQ(c.budgets.gd_restarts, 1000u);
  EXPECT_EQ(c.budgets.n_parents, 4);
}

TEST(Config, RejectsBadInput) {
  const std::vector<std::string> bad{
      "bogus = 1",        "max_order = two",   "n_dims_list = 10, 31", "n_dims_list = 3\nmax_order = 4",
      "pool = 0",         "repeats = -1",      "instances_per_point = 0", "match_budget = maybe",
      "no equals sign",   "n_dims_list =",     "offspring_samples = 1",   "output_dir =",
  };
  for (const auto& text : bad) {
    std::istringstream in(text);
    EXPECT_THROW(parse_config(in), config_error) << text;
  }
  EXPECT_THROW(load_config("/nonexistent/path.conf"), config_error);
}

TEST(Seeds, InstanceSeedsFollowTheSplitRule) {
  std::set<std::uint64_t> seen;
  for (int k = 0; k < 1000; ++k) {
    EXPECT_EQ(instance_seed(7, k), split_seed(7, k));
    seen.insert(instance_seed(7, k));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(instance_seed(7, 0), instance_seed(8, 0));
}

TEST(ParallelFor, VisitsEachIndexOnce) {
  for (int threads : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(257);
    const auto failures = parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    EXPECT_TRUE(failures.empty());
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, ReportsFailuresInIndexOrder) {
  const auto failures = parallel_for(20, 4, [](std::size_t i) {
    if (i % 7 == 3) throw std::runtime_error("boom");
  });
  ASSERT_EQ(failures.size(), 3u);
  EXPECT_EQ(failures[0].first, 3u);
  EXPECT_EQ(failures[1].first, 10u);
  EXPECT_EQ(failures[2].first, 17u);
}

TEST(Fig2, RowsShapeAndOrder) {
  const auto c = small_config();
  const auto t = run_fig2(c);
  ASSERT_EQ(t.size(), 2u * 2u * 4u);
  const std::vector<std::string> labels_small{label::kExhaustive, label::kRandom, label::kCrossover, label::kOffspring};
  const std::vector<std::string> labels_large{label::kDescentReference, label::kRandom, label::kCrossover,
                                              label::kOffspring};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& r = t[i];
    const int n = i < 8 ? 8 : 12;
    EXPECT_EQ(r.n_dims, n);
    EXPECT_EQ(r.max_order, 2);
    EXPECT_EQ(r.instance_seed, instance_seed(17, static_cast<int>((i / 4) % 2)));
    EXPECT_EQ(r.algorithm, (n <= 10 ? labels_small : labels_large)[i % 4]);
  }
}

TEST(Fig2, EmpiricalFieldsAndAccounting) {
  const auto c = small_config();
  for (const auto& r : run_fig2(c)) {
    const auto cf = sample_cost_function(r.n_dims, r.max_order, r.instance_seed);
    const std::string a = r.algorithm;
    if (a == label::kExhaustive) {
      EXPECT_EQ(*r.best_value, exhaustive_min(cf).value);
      EXPECT_EQ(*r.evaluations, std::uint64_t{1} << r.n_dims);
    } else if (a == label::kDescentReference) {
      ASSERT_TRUE(r.best_value.has_value());
      EXPECT_LE(*r.best_value, 0.0);
    } else if (a == label::kRandom) {
      EXPECT_EQ(*r.evaluations, 2000u);
      EXPECT_FALSE(r.offspring_mean.has_value());
      EXPECT_FALSE(r.realized_d.has_value());
    } else if (a == label::kCrossover) {
      EXPECT_EQ(*r.evaluations, 5u * (2 * 50 + 50));
      EXPECT_TRUE(r.offspring_variance.has_value());
      EXPECT_TRUE(r.realized_d.has_value());
    } else {
      ASSERT_EQ(a, label::kOffspring);
      EXPECT_FALSE(r.best_value.has_value());
      EXPECT_EQ(*r.evaluations, 2u * 50 + 200);
      EXPECT_TRUE(r.offspring_mean.has_value());
      EXPECT_TRUE(r.offspring_variance.has_value());
    }
  }
}

TEST(Fig2, TheoryFieldsRecomputeFromShapeAndBudgets) {
  const auto c = small_config();
  for (const auto& r : run_fig2(c)) {
    const auto params = theory_params(r.n_dims, uniform_order_variance(r.n_dims, r.max_order));
    const std::string a = r.algorithm;
    ASSERT_TRUE(r.theory_mean.has_value()) << a;
    if (a == label::kExhaustive || a == label::kDescentReference) {
      EXPECT_EQ(*r.theory_mean, global_min_estimate(r.n_dims));
      EXPECT_FALSE(r.theory_variance.has_value());
    } else if (a == label::kRandom) {
      const auto g = min_distribution({0.0, 1.0}, 2000, MinForm::exact);
      EXPECT_EQ(*r.theory_mean, g.mean);
      EXPECT_EQ(*r.theory_variance, g.variance);
    } else if (a == label::kCrossover) {
      const auto g = offspring_min_distribution(params, 50);
      EXPECT_EQ(*r.theory_mean, g.mean);
      EXPECT_EQ(*r.theory_variance, g.variance);
    } else {
      const auto g = offspring_distribution(params, 50);
      EXPECT_EQ(*r.theory_mean, g.mean);
      EXPECT_EQ(*r.theory_variance, g.variance);
    }
  }
}

TEST(Fig2, TheoryIsNullWhenAsymptoticsFail) {
  auto c = small_config();
  c.budgets.random_m = 5;
  c.budgets.offspring_pool = 5;
  for (const auto& r : run_fig2(c)) {
    if (r.algorithm == label::kRandom || r.algorithm == label::kCrossover) {
      EXPECT_FALSE(r.theory_mean.has_value());
      EXPECT_FALSE(r.theory_variance.has_value());
    }
  }
}

TEST(Fig2, DeterministicAcrossRunsAndThreadCounts) {
  const auto c = small_config();
  const auto a = csv_of(run_fig2(c, 1));
  EXPECT_EQ(a, csv_of(run_fig2(c, 1)));
  EXPECT_EQ(a, csv_of(run_fig2(c, 4)));
}

TEST(Fig3, RowsAndGuard) {
  auto c = small_config();
  c.experiment_id = "fig3";
  const auto t = run_fig3(c);
  ASSERT_EQ(t.size(), 2u * 2u * 3u);
  for (std::size_t i = 0; i < t.size(); i += 3) {
    EXPECT_EQ(t[i + 1].algorithm, label::kCrossover);
    EXPECT_EQ(t[i + 2].algorithm, label::kMeanField);
    EXPECT_EQ(*t[i + 2].evaluations, 5u * (4 * 50 + 50));
    EXPECT_EQ(*t[i + 2].theory_mean, mixture_bound(50));
    EXPECT_TRUE(t[i + 1].offspring_variance.has_value());
    EXPECT_TRUE(t[i + 2].offspring_variance.has_value());
  }
  c.budgets.n_parents = 2;
  EXPECT_THROW(run_fig3(c), config_error);
}

TEST(Fig3, MatchBudgetShrinksMixturePools) {
  auto c = small_config();
  c.match_budget = true;
  for (const auto& r : run_fig3(c)) {
    if (r.algorithm == label::kMeanField) {
      EXPECT_EQ(*r.evaluations, 5u * (4 * 25 + 50));
    }
  }
}

TEST(Experiment, FailedCellsKeepCompletedRows) {
  const auto c = small_config();
  try {
    detail::run_cells(c, 2, [](const ExperimentConfig&, int n, int instance) {
      if (n == 12 && instance == 1) throw std::runtime_error("injected");
      return std::vector<ExperimentRow>{detail::base_row(n, 2, static_cast<std::uint64_t>(instance), "x")};
    });
    FAIL() << "expected experiment_error";
  } catch (const experiment_error& e) {
    EXPECT_EQ(e.partial.size(), 3u);
    EXPECT_NE(std::string(e.what()).find("injected"), std::string::npos);
  }
}

TEST(Csv, RoundTripIsExact) {
  const auto t = run_fig2(small_config());
  std::istringstream in(csv_of(t));
  const auto back = read_csv(in);
  EXPECT_EQ(back, t);
  EXPECT_EQ(csv_of(back), csv_of(t));
}

TEST(Csv, MissingValuesAreNull) {
  ExperimentRow r;
  r.n_dims = 3;
  r.max_order = 1;
  r.instance_seed = 42;
  r.algorithm = "offspring";
  r.offspring_mean = -0.0;
  const auto text = csv_of({r});
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  EXPECT_NE(text.find("3,1,42,offspring,null,null,-0,null,null,null,null"), std::string::npos);
  std::istringstream in(text);
  const auto back = read_csv(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(std::signbit(*back[0].offspring_mean));
  EXPECT_FALSE(back[0].best_value.has_value());
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream no_header("1,2,3\n");
  EXPECT_THROW(read_csv(no_header), std::runtime_error);
  std::istringstream short_row(std::string(kCsvHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_csv(short_row), std::runtime_error);
  std::istringstream bad_real(std::string(kCsvHeader) + "\n1,2,3,x,abc,null,null,null,null,null,null\n");
  EXPECT_THROW(read_csv(bad_real), std::runtime_error);
}

TEST(Svg, EmptyTableIsRejected) {
  EXPECT_THROW(emit_plot({}, PlotKind::fig2), std::invalid_argument);
}

TEST(Svg, SingleRowGivesOnePoint) {
  ExperimentRow r;
  r.n_dims = 10;
  r.max_order = 2;
  r.algorithm = label::kRandom;
  r.best_value = -3.0;
  const auto svg = emit_plot({r}, PlotKind::fig2);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
  EXPECT_EQ(count(svg, "class=\"point\""), 1u);
  EXPECT_EQ(count(svg, "<svg "), 1u);
}

TEST(Svg, Fig2HasOneTheoryLinePerSeries) {
  const auto t = run_fig2(small_config());
  const auto svg = emit_plot(t, PlotKind::fig2);
  EXPECT_EQ(count(svg, "class=\"theory\""), 4u);
  // 4 series, 2 values of N each
  EXPECT_EQ(count(svg, "class=\"point\""), 8u);
  EXPECT_EQ(count(svg, "class=\"bar\""), 8u);
  for (const char* color : {"#000000", "#808080", "#d62728", "#1f77b4"}) EXPECT_NE(svg.find(color), std::string::npos);
  EXPECT_EQ(svg, emit_plot(t, PlotKind::fig2));
}

TEST(Svg, Fig3HasTwoPanels) {
  auto c = small_config();
  c.experiment_id = "fig3";
  const auto svg = emit_plot(run_fig3(c), PlotKind::fig3);
  EXPECT_NE(svg.find("(A) best cost"), std::string::npos);
  EXPECT_NE(svg.find("(B) offspring variance"), std::string::npos);
  EXPECT_NE(svg.find("#2ca02c"), std::string::npos);
  EXPECT_EQ(count(svg, "<rect x="), 2u + 3u + 2u);  // two frames plus legend swatches
}
