// Command-line front end.
//
//   xover gen      --n N --k K --seed S [--out FILE]
//   xover eval     --cf FILE            < state on stdin
//   xover search   ALGO (--cf FILE | --n N --k K --seed S) [budget flags]
//   xover theory   --n N --k K [--m M] [--pool M] [--d D] [--r R] [--target F]
//   xover fig2     --config FILE [--seed S] [--out DIR] [--threads T]
//   xover fig3     --config FILE [--seed S] [--out DIR] [--threads T]
//   xover plot     --csv FILE --kind fig2|fig3 --out FILE.svg
//
// Exit codes: 0 success, 1 other failure, 2 configuration or argument error,
// 3 numeric-domain error (e.g. an asymptotic formula outside its range).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xover/xover.hpp"

namespace {

using json = nlohmann::json;
using namespace xover;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;

struct CostSource {
  std::string path;
  int n = 20;
  int k = 2;
  std::uint64_t seed = 1;

  CostFunction load() const {
    if (path.empty()) return sample_cost_function(n, k, seed);
    std::ifstream in(path);
    if (!in) throw config_error("cannot open cost function file '" + path + "'");
    return read_cost_function(in);
  }
};

void add_cost_source(CLI::App* cmd, CostSource& src) {
  cmd->add_option("--cf", src.path, "Cost function file written by `gen`");
  cmd->add_option("--n", src.n, "Number of variables when sampling")->check(CLI::Range(1, kMaxDims));
  cmd->add_option("--k", src.k, "Highest product order when sampling")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", src.seed, "Seed when sampling");
}

json state_json(const State& s) {
  json a = json::array();
  for (auto v : s.spins()) a.push_back(static_cast<int>(v));
  return a;
}

json result_json(const std::string& algo, const CostFunction& cf, const SearchResult& r) {
  json j;
  j["algorithm"] = algo;
  j["n_dims"] = cf.n_dims();
  j["max_order"] = cf.max_order();
  j["best_state"] = state_json(r.best_state);
  j["best_value"] = r.best_value;
  j["evaluations"] = r.evaluations;
  j["flip_evaluations"] = r.flip_evaluations;
  json trace = json::array();
  for (const auto& s : r.stage_trace) trace.push_back({{"label", s.label}, {"best_value", s.best_value}});
  j["stage_trace"] = std::move(trace);
  if (r.offspring)
    j["offspring"] = {{"mean", r.offspring->mean},
                      {"variance", r.offspring->variance},
                      {"realized_d", r.offspring->realized_d}};
  return j;
}

State parse_state(const std::string& text, int n) {
  std::vector<std::int8_t> spins;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok.find_first_not_of("+-") == std::string::npos && tok != "-" && tok != "+") {
      for (char c : tok) spins.push_back(c == '+' ? 1 : -1);
    } else if (tok == "1" || tok == "+1" || tok == "+") {
      spins.push_back(1);
    } else if (tok == "-1" || tok == "-") {
      spins.push_back(-1);
    } else {
      throw config_error("state: unrecognized entry '" + tok + "' (use 1/-1 or +/-)");
    }
  }
  if (static_cast<int>(spins.size()) != n)
    throw config_error("state: expected " + std::to_string(n) + " entries, got " + std::to_string(spins.size()));
  return State(std::move(spins));
}

void emit_theory(const std::string& name, json body) {
  body["predictor"] = name;
  std::cout << body.dump() << '\n';
}

std::string experiment_stem(const ExperimentConfig& c) {
  return (std::filesystem::path(c.output_dir) / (c.experiment_id + "_K" + std::to_string(c.max_order))).string();
}

int run_experiment(const std::string& which, const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::string& out_dir, int threads) {
  ExperimentConfig c = load_config(config_path);
  if (seed) c.master_seed = *seed;
  if (!out_dir.empty()) c.output_dir = out_dir;
  validate(c);
  std::filesystem::create_directories(c.output_dir);
  const std::string stem = experiment_stem(c);
  const PlotKind kind = which == "fig2" ? PlotKind::fig2 : PlotKind::fig3;
  ExperimentTable table;
  try {
    table = kind == PlotKind::fig2 ? run_fig2(c, threads) : run_fig3(c, threads);
  } catch (const experiment_error& e) {
    std::ofstream partial(stem + ".partial.csv", std::ios::binary);
    write_csv(partial, e.partial);
    throw;
  }
  {
    std::ofstream csv(stem + ".csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write '" + stem + ".csv'");
    write_csv(csv, table);
  }
  write_plot(stem + ".svg", table, kind);
  std::cerr << "wrote " << stem << ".csv and " << stem << ".svg (" << table.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selection-and-crossover search on random multilinear cost functions"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a K-th order cost function and serialize it");
  int gen_n = 20, gen_k = 2;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--n", gen_n, "Number of variables")->check(CLI::Range(1, kMaxDims));
  gen->add_option("--k", gen_k, "Highest product order")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Coefficient seed");
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a state read from stdin");
  std::string eval_cf;
  eval->add_option("--cf", eval_cf, "Cost function file")->required();

  // search
  auto* search = app.add_subcommand("search", "Run one searcher and print a JSON result");
  CostSource search_src;
  std::string algo;
  std::uint64_t run_seed = 7, m = 1'000'000, restarts = 1000;
  CrossoverConfig xc;
  MeanFieldConfig mf;
  bool fixed_parents = false;
  search->add_option("algo", algo, "random | descent | multistart | crossover | meanfield | exhaustive")
      ->required()
      ->check(CLI::IsMember({"random", "descent", "multistart", "crossover", "meanfield", "exhaustive"}));
  add_cost_source(search, search_src);
  search->add_option("--run-seed", run_seed, "Seed of the search's random stream");
  search->add_option("--m", m, "Random-search draws");
  search->add_option("--restarts", restarts, "Descent restarts (multistart)");
  search->add_option("--pool", xc.pool, "Parent pool size");
  search->add_option("--offspring-pool", xc.offspring_pool, "Offspring per repeat");
  search->add_option("--repeats", xc.repeats, "Parent/offspring repeats");
  search->add_option("--n-parents", mf.n_parents, "Mixture parents (meanfield)");
  search->add_flag("--match-budget", mf.match_budget, "Shrink mixture parent pools to the two-parent total");
  search->add_flag("--fixed-parents", fixed_parents, "Select parents once and repeat only offspring batches");

  // theory
  auto* theory = app.add_subcommand("theory", "Print closed-form predictors as JSON lines");
  int th_n = 30, th_k = 2;
  std::uint64_t th_m = 1'000'000, th_pool = 1000;
  std::optional<int> th_d;
  std::optional<double> th_r, th_target;
  theory->add_option("--n", th_n, "Number of variables")->check(CLI::PositiveNumber);
  theory->add_option("--k", th_k, "Highest product order")->check(CLI::PositiveNumber);
  theory->add_option("--m", th_m, "Sample count for the min-distribution and mixture predictors");
  theory->add_option("--pool", th_pool, "Parent/offspring pool size for the offspring predictors");
  theory->add_option("--d", th_d, "Differing parent positions (default floor(N/2))");
  theory->add_option("--r", th_r, "Mixture mean R");
  theory->add_option("--target", th_target, "Target cost for required_iterations");

  // fig2 / fig3
  std::string cfg_path, out_dir;
  std::optional<std::uint64_t> cfg_seed;
  int threads = 1;
  std::vector<CLI::App*> figs;
  for (const char* name : {"fig2", "fig3"}) {
    auto* f = app.add_subcommand(name, std::string("Run the ") + name + " experiment");
    f->add_option("--config", cfg_path, "Experiment config file")->required();
    f->add_option("--seed", cfg_seed, "Override master_seed");
    f->add_option("--out", out_dir, "Override output_dir");
    f->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    figs.push_back(f);
  }

  // plot
  auto* plot = app.add_subcommand("plot", "Render an experiment CSV as SVG");
  std::string plot_csv, plot_kind = "fig2", plot_out;
  plot->add_option("--csv", plot_csv, "Input CSV")->required();
  plot->add_option("--kind", plot_kind, "fig2 | fig3")->check(CLI::IsMember({"fig2", "fig3"}));
  plot->add_option("--out", plot_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const auto cf = sample_cost_function(gen_n, gen_k, gen_seed);
      if (gen_out.empty()) {
        write_cost_function(std::cout, cf);
      } else {
        std::ofstream out(gen_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + gen_out + "'");
        write_cost_function(out, cf);
      }
    } else if (*eval) {
      const auto cf = CostSource{eval_cf}.load();
      const std::string text{std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
      std::printf("%.17g\n", evaluate(cf, parse_state(text, cf.n_dims())));
    } else if (*search) {
      const auto cf = search_src.load();
      Rng rng(run_seed);
      xc.refresh_parents = !fixed_parents;
      SearchResult r;
      if (algo == "random") {
        r = random_search(cf, m, rng);
      } else if (algo == "descent") {
        r = gradient_descent(cf, State::from_mask(rng.bits() & detail::low_mask(cf.n_dims()), cf.n_dims()));
      } else if (algo == "multistart") {
        r = multistart_descent(cf, restarts, rng);
      } else if (algo == "crossover") {
        r = selection_crossover(cf, xc, rng);
      } else if (algo == "meanfield") {
        if (mf.n_parents < 3) throw config_error("meanfield needs --n-parents >= 3; use `search crossover` for two");
        mf.pool = xc.pool;
        mf.offspring_pool = xc.offspring_pool;
        mf.repeats = xc.repeats;
        mf.refresh_parents = xc.refresh_parents;
        r = mean_field_search(cf, mf, rng);
      } else {
        const auto best = exhaustive_min(cf);
        r.best_state = best.state;
        r.best_value = best.value;
        r.evaluations = std::uint64_t{1} << cf.n_dims();
        r.stage_trace.push_back({"exhaustive", best.value});
      }
      std::cout << result_json(algo, cf, r).dump(2) << '\n';
    } else if (*theory) {
      if (th_k > th_n) throw config_error("theory: need k <= n");
      const auto variance = uniform_order_variance(th_n, th_k);
      const auto params = theory_params(th_n, variance);
      emit_theory("global_min_estimate", {{"n_dims", th_n}, {"value", global_min_estimate(th_n)}});
      emit_theory("theory_params", {{"n_dims", th_n},
                                    {"max_order", th_k},
                                    {"eta", params.eta},
                                    {"gain", params.gain},
                                    {"lambda", params.lambda},
                                    {"d", params.d},
                                    {"predicted_total_cost", params.predicted_total_cost()}});
      for (auto form : {MinForm::exact, MinForm::approximate}) {
        const auto g = min_distribution({0.0, 1.0}, th_m, form);
        emit_theory("min_distribution", {{"form", form == MinForm::exact ? "exact" : "approximate"},
                                         {"m", th_m},
                                         {"mean", g.mean},
                                         {"variance", g.variance}});
      }
      const auto off = offspring_distribution(params, th_pool);
      emit_theory("offspring_distribution", {{"m", th_pool}, {"mean", off.mean}, {"variance", off.variance}});
      const auto offmin = offspring_min_distribution(params, th_pool);
      emit_theory("offspring_min_distribution", {{"m", th_pool}, {"mean", offmin.mean}, {"variance", offmin.variance}});
      const int d = th_d.value_or(params.d);
      emit_theory("predicted_offspring_variance", {{"d", d}, {"value", predicted_offspring_variance(th_n, d, variance)}});
      if (th_r) {
        const auto mix = mixture_prediction(*th_r, th_m);
        emit_theory("mixture_prediction", {{"r", *th_r},
                                           {"m", th_m},
                                           {"offspring_mean", mix.offspring_mean},
                                           {"offspring_variance", mix.offspring_variance},
                                           {"min_estimate", mix.min_estimate}});
      }
      if (th_target) {
        emit_theory("required_iterations",
                    {{"target", *th_target}, {"value", required_iterations(*th_target, {0.0, 1.0})}});
      }
    } else if (*figs[0] || *figs[1]) {
      return run_experiment(*figs[0] ? "fig2" : "fig3", cfg_path, cfg_seed, out_dir, threads);
    } else if (*plot) {
      std::ifstream in(plot_csv);
      if (!in) throw config_error("cannot open '" + plot_csv + "'");
      write_plot(plot_out, read_csv(in), plot_kind == "fig2" ? PlotKind::fig2 : PlotKind::fig3);
    }
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric-domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
