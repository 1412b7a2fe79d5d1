#pragma once

// Experiment configuration: a flat `key = value` text file. Blank lines and
// lines starting with '#' are ignored; unknown keys are errors.
//
//   experiment_id       = fig2
//   n_dims_list         = 10, 14, 18, 22, 26, 30
//   max_order           = 2
//   instances_per_point = 10
//   random_m            = 1000000
//   pool                = 1000
//   offspring_pool      = 1000
//   repeats             = 333
//   n_parents           = 4
//   gd_restarts         = 1000
//   master_seed         = 1
//   output_dir          = out
//   offspring_samples   = 10000   # draws for the standalone offspring statistics
//   exhaustive_cap      = 20      # N at or below this uses exact enumeration
//   match_budget        = false   # shrink mean-field parent pools to the 2-parent total
//   refresh_parents     = true    # new parent pools on every repeat

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xover/combinatorics.hpp"

namespace xover {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Budgets {
  std::uint64_t random_m = 1'000'000;
  std::uint64_t pool = 1000;
  std::uint64_t offspring_pool = 1000;
  std::uint64_t repeats = 333;
  int n_parents = 4;
  std::uint64_t gd_restarts = 1000;
};

struct ExperimentConfig {
  std::string experiment_id = "fig2";
  std::vector<int> n_dims_list{10, 14, 18, 22, 26, 30};
  int max_order = 2;
  int instances_per_point = 10;
  Budgets budgets;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  std::uint64_t offspring_samples = 10'000;
  int exhaustive_cap = 20;
  bool match_budget = false;
  bool refresh_parents = true;
};

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw config_error("config: bad value for '" + key + "': '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw config_error("config: bad boolean for '" + key + "': '" + value + "'");
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  if (c.n_dims_list.empty()) throw config_error("config: n_dims_list is empty");
  for (int n : c.n_dims_list)
    if (n < 1 || n > kMaxDims) throw config_error("config: n_dims " + std::to_string(n) + " outside [1, kMaxDims]");
  if (c.max_order < 1) throw config_error("config: max_order must be >= 1");
  for (int n : c.n_dims_list)
    if (c.max_order > n) throw config_error("config: max_order exceeds an entry of n_dims_list");
  if (c.instances_per_point < 1) throw config_error("config: instances_per_point must be >= 1");
  const auto& b = c.budgets;
  if (b.random_m < 1 || b.pool < 1 || b.offspring_pool < 1 || b.repeats < 1 || b.gd_restarts < 1 || b.n_parents < 2)
    throw config_error("config: budgets must be >= 1 (n_parents >= 2)");
  if (c.offspring_samples < 2) throw config_error("config: offspring_samples must be >= 2");
  if (c.output_dir.empty()) throw config_error("config: output_dir is empty");
}

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    using detail::parse_number;
    if (key == "experiment_id") {
      c.experiment_id = value;
    } else if (key == "n_dims_list") {
      c.n_dims_list.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) c.n_dims_list.push_back(parse_number<int>(key, detail::trim(item)));
    } else if (key == "max_order") {
      c.max_order = parse_number<int>(key, value);
    } else if (key == "instances_per_point") {
      c.instances_per_point = parse_number<int>(key, value);
    } else if (key == "random_m") {
      c.budgets.random_m = parse_number<std::uint64_t>(key, value);
    } else if (key == "pool") {
      c.budgets.pool = parse_number<std::uint64_t>(key, value);
    } else if (key == "offspring_pool") {
      c.budgets.offspring_pool = parse_number<std::uint64_t>(key, value);
    } else if (key == "repeats") {
      c.budgets.repeats = parse_number<std::uint64_t>(key, value);
    } else if (key == "n_parents") {
      c.budgets.n_parents = parse_number<int>(key, value);
    } else if (key == "gd_restarts") {
      c.budgets.gd_restarts = parse_number<std::uint64_t>(key, value);
    } else if (key == "master_seed") {
      c.master_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else if (key == "offspring_samples") {
      c.offspring_samples = parse_number<std::uint64_t>(key, value);
    } else if (key == "exhaustive_cap") {
      c.exhaustive_cap = parse_number<int>(key, value);
    } else if (key == "match_budget") {
      c.match_budget = detail::parse_bool(key, value);
    } else if (key == "refresh_parents") {
      c.refresh_parents = detail::parse_bool(key, value);
    } else {
      throw config_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace xover
