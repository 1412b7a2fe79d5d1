#pragma once

// Experiment orchestration behind the two simulation figures.
//
// Seeds: instance k uses seed split_seed(master_seed, k) for its cost function
// at every N; each algorithm run draws from Rng(instance_seed).stream(id) with
// a fixed id per algorithm. Cells (N, instance) run on a worker pool and their
// rows are collected in canonical order: by N, then instance, then algorithm.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "xover/config.hpp"
#include "xover/evt.hpp"
#include "xover/polycost.hpp"
#include "xover/rng.hpp"
#include "xover/search.hpp"

namespace xover {

namespace label {
inline constexpr const char* kExhaustive = "exhaustive_min";
inline constexpr const char* kDescentReference = "gd_reference";  // approximate reference, not certified
inline constexpr const char* kRandom = "random_search";
inline constexpr const char* kCrossover = "selection_crossover";
inline constexpr const char* kOffspring = "offspring";
inline constexpr const char* kMeanField = "mean_field";
}  // namespace label

/// Random streams per algorithm, split from the instance seed.
enum class Stream : std::uint64_t { reference = 1, random = 2, crossover = 3, offspring = 4 };

/// One (N, instance, algorithm) result. Absent quantities are nullopt and are
/// written as `null`, never as zero.
struct ExperimentRow {
  int n_dims = 0;
  int max_order = 0;
  std::uint64_t instance_seed = 0;
  std::string algorithm;
  std::optional<double> best_value;
  std::optional<std::uint64_t> evaluations;
  std::optional<double> offspring_mean;
  std::optional<double> offspring_variance;
  std::optional<double> realized_d;
  std::optional<double> theory_mean;
  std::optional<double> theory_variance;

  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

using ExperimentTable = std::vector<ExperimentRow>;

/// A run stopped early; `partial` holds the rows of every completed cell.
class experiment_error : public std::runtime_error {
 public:
  experiment_error(const std::string& what, ExperimentTable partial)
      : std::runtime_error(what), partial(std::move(partial)) {}
  ExperimentTable partial;
};

inline std::uint64_t instance_seed(std::uint64_t master_seed, int instance) {
  return split_seed(master_seed, static_cast<std::uint64_t>(instance));
}

/// Runs fn(i) for i in [0, count) on `threads` workers. Returns the index of
/// each failed call with its exception.
template <typename Fn>
std::vector<std::pair<std::size_t, std::exception_ptr>> parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::vector<std::pair<std::size_t, std::exception_ptr>> failures;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        failures.emplace_back(i, std::current_exception());
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  std::sort(failures.begin(), failures.end(), [](auto& a, auto& b) { return a.first < b.first; });
  return failures;
}

namespace detail {

template <typename F>
std::optional<GaussianSpec> try_theory(F&& f) {
  try {
    return f();
  } catch (const asymptotics_error&) {
    return std::nullopt;
  }
}

inline void set_theory(ExperimentRow& row, const std::optional<GaussianSpec>& g) {
  if (!g) return;
  row.theory_mean = g->mean;
  row.theory_variance = g->variance;
}

inline TheoryParams params_for(int n, int k) { return theory_params(n, uniform_order_variance(n, k)); }

inline ExperimentRow base_row(int n, int k, std::uint64_t seed, const char* algorithm) {
  ExperimentRow r;
  r.n_dims = n;
  r.max_order = k;
  r.instance_seed = seed;
  r.algorithm = algorithm;
  return r;
}

inline ExperimentRow reference_row(const CostFunction& cf, const ExperimentConfig& c, std::uint64_t seed) {
  const int n = cf.n_dims();
  ExperimentRow row;
  if (n <= c.exhaustive_cap) {
    row = base_row(n, cf.max_order(), seed, label::kExhaustive);
    const auto m = exhaustive_min(cf, c.exhaustive_cap);
    row.best_value = m.value;
    row.evaluations = std::uint64_t{1} << n;
  } else {
    row = base_row(n, cf.max_order(), seed, label::kDescentReference);
    Rng rng = Rng(seed).stream(static_cast<std::uint64_t>(Stream::reference));
    const auto r = multistart_descent(cf, c.budgets.gd_restarts, rng);
    row.best_value = r.best_value;
    row.evaluations = r.evaluations;
  }
  row.theory_mean = global_min_estimate(n);
  return row;
}

inline void fill_search(ExperimentRow& row, const SearchResult& r) {
  row.best_value = r.best_value;
  row.evaluations = r.evaluations;
  if (r.offspring) {
    row.offspring_mean = r.offspring->mean;
    if (std::isfinite(r.offspring->variance)) row.offspring_variance = r.offspring->variance;
    row.realized_d = r.offspring->realized_d;
  }
}

inline CrossoverConfig crossover_config(const ExperimentConfig& c) {
  return {c.budgets.pool, c.budgets.offspring_pool, c.budgets.repeats, c.refresh_parents};
}

inline ExperimentRow crossover_row(const CostFunction& cf, const ExperimentConfig& c, std::uint64_t seed) {
  auto row = base_row(cf.n_dims(), cf.max_order(), seed, label::kCrossover);
  Rng rng = Rng(seed).stream(static_cast<std::uint64_t>(Stream::crossover));
  fill_search(row, selection_crossover(cf, crossover_config(c), rng));
  const auto params = params_for(cf.n_dims(), cf.max_order());
  set_theory(row, try_theory([&] { return offspring_min_distribution(params, c.budgets.offspring_pool); }));
  return row;
}

inline std::vector<ExperimentRow> fig2_cell(const ExperimentConfig& c, int n, int instance) {
  const int k = c.max_order;
  const std::uint64_t seed = instance_seed(c.master_seed, instance);
  const auto cf = sample_cost_function(n, k, seed);
  const auto params = params_for(n, k);
  std::vector<ExperimentRow> rows;

  rows.push_back(reference_row(cf, c, seed));

  {
    auto row = base_row(n, k, seed, label::kRandom);
    Rng rng = Rng(seed).stream(static_cast<std::uint64_t>(Stream::random));
    fill_search(row, random_search(cf, c.budgets.random_m, rng));
    set_theory(row, try_theory([&] { return min_distribution({0.0, 1.0}, c.budgets.random_m, MinForm::exact); }));
    rows.push_back(std::move(row));
  }

  rows.push_back(crossover_row(cf, c, seed));

  {
    auto row = base_row(n, k, seed, label::kOffspring);
    Rng rng = Rng(seed).stream(static_cast<std::uint64_t>(Stream::offspring));
    const std::vector<State> parents{State::from_mask(detail::best_of_uniform(cf, c.budgets.pool, rng).mask, n),
                                     State::from_mask(detail::best_of_uniform(cf, c.budgets.pool, rng).mask, n)};
    const auto scheme = make_crossover_scheme(parents);
    const auto stats = offspring_statistics(cf, scheme, c.offspring_samples, rng);
    row.evaluations = 2 * c.budgets.pool + c.offspring_samples;
    row.offspring_mean = stats.mean;
    row.offspring_variance = stats.variance;
    row.realized_d = scheme.d;
    set_theory(row, try_theory([&] { return offspring_distribution(params, c.budgets.pool); }));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<ExperimentRow> fig3_cell(const ExperimentConfig& c, int n, int instance) {
  const int k = c.max_order;
  const std::uint64_t seed = instance_seed(c.master_seed, instance);
  const auto cf = sample_cost_function(n, k, seed);
  std::vector<ExperimentRow> rows;
  rows.push_back(reference_row(cf, c, seed));
  rows.push_back(crossover_row(cf, c, seed));

  auto row = base_row(n, k, seed, label::kMeanField);
  Rng rng = Rng(seed).stream(static_cast<std::uint64_t>(Stream::crossover));
  MeanFieldConfig mf{c.budgets.n_parents, c.budgets.pool, c.budgets.offspring_pool, c.budgets.repeats,
                     c.refresh_parents, c.match_budget};
  fill_search(row, mean_field_search(cf, mf, rng));
  row.theory_mean = mixture_bound(c.budgets.offspring_pool);
  rows.push_back(std::move(row));
  return rows;
}

template <typename Cell>
ExperimentTable run_cells(const ExperimentConfig& c, int threads, Cell&& cell) {
  validate(c);
  const std::size_t per_n = static_cast<std::size_t>(c.instances_per_point);
  const std::size_t count = c.n_dims_list.size() * per_n;
  std::vector<std::vector<ExperimentRow>> results(count);
  auto failures = parallel_for(count, threads, [&](std::size_t i) {
    results[i] = cell(c, c.n_dims_list[i / per_n], static_cast<int>(i % per_n));
  });
  ExperimentTable table;
  for (auto& rows : results)
    for (auto& r : rows) table.push_back(std::move(r));
  if (!failures.empty()) {
    std::string what = "experiment cell " + std::to_string(failures.front().first) + " failed";
    try {
      std::rethrow_exception(failures.front().second);
    } catch (const std::exception& e) {
      what += ": ";
      what += e.what();
    } catch (...) {
    }
    throw experiment_error(what, std::move(table));
  }
  return table;
}

}  // namespace detail

/// Global-minimum reference, random search, selection and crossover, and
/// standalone offspring statistics for every (N, instance), with theory values.
inline ExperimentTable run_fig2(const ExperimentConfig& config, int threads = 1) {
  return detail::run_cells(config, threads, detail::fig2_cell);
}

/// Selection and crossover against the n-parent mixture on identical instances
/// and random streams, plus the global-minimum reference.
inline ExperimentTable run_fig3(const ExperimentConfig& config, int threads = 1) {
  if (config.budgets.n_parents < 3)
    throw config_error("fig3: n_parents must be >= 3; two parents is selection_crossover");
  return detail::run_cells(config, threads, detail::fig3_cell);
}

// CSV: fixed header, one row per line, reals as %.17g, missing values as `null`.

inline constexpr const char* kCsvHeader =
    "n_dims,max_order,instance_seed,algorithm,best_value,evaluations,offspring_mean,offspring_variance,"
    "realized_d,theory_mean,theory_variance";

namespace detail {

inline std::string csv_real(const std::optional<double>& v) {
  if (!v) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

inline std::optional<double> csv_parse_real(const std::string& s) {
  if (s == "null") return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw std::runtime_error("csv: bad real '" + s + "'");
  return v;
}

template <typename T>
T csv_parse_int(const std::string& s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::runtime_error("csv: bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const ExperimentTable& table) {
  out << kCsvHeader << '\n';
  for (const auto& r : table) {
    out << r.n_dims << ',' << r.max_order << ',' << r.instance_seed << ',' << r.algorithm << ','
        << detail::csv_real(r.best_value) << ','
        << (r.evaluations ? std::to_string(*r.evaluations) : std::string("null")) << ','
        << detail::csv_real(r.offspring_mean) << ',' << detail::csv_real(r.offspring_variance) << ','
        << detail::csv_real(r.realized_d) << ',' << detail::csv_real(r.theory_mean) << ','
        << detail::csv_real(r.theory_variance) << '\n';
  }
}

inline ExperimentTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("csv: missing or unexpected header");
  ExperimentTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 11) throw std::runtime_error("csv: expected 11 fields, got " + std::to_string(f.size()));
    ExperimentRow r;
    r.n_dims = detail::csv_parse_int<int>(f[0]);
    r.max_order = detail::csv_parse_int<int>(f[1]);
    r.instance_seed = detail::csv_parse_int<std::uint64_t>(f[2]);
    r.algorithm = f[3];
    r.best_value = detail::csv_parse_real(f[4]);
    if (f[5] != "null") r.evaluations = detail::csv_parse_int<std::uint64_t>(f[5]);
    r.offspring_mean = detail::csv_parse_real(f[6]);
    r.offspring_variance = detail::csv_parse_real(f[7]);
    r.realized_d = detail::csv_parse_real(f[8]);
    r.theory_mean = detail::csv_parse_real(f[9]);
    r.theory_variance = detail::csv_parse_real(f[10]);
    table.push_back(std::move(r));
  }
  return table;
}

}  // namespace xover
