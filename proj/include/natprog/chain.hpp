#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "natprog/catalog.hpp"
#include "natprog/library_io.hpp"
#include "natprog/rng.hpp"
#include "natprog/sim_users.hpp"

namespace natprog {

struct ChainConfig {
  std::vector<Condition> conditions{Condition::np, Condition::ds};
  std::size_t generations = 20;
  double r = 0.0;
  std::uint64_t batch_seed = 0;
  std::size_t batch = 0;
  std::size_t goals_per_generation = 6;
  std::uint16_t raw_count = 20;
  SimUserPolicy policy;
  ProposerParams params;
  std::shared_ptr<const RecipeCatalog> catalog = share(default_catalog());
  std::shared_ptr<const Embedder> embedder = std::make_shared<HashingEmbedder>();
  // When set, each condition's library is written here after every generation.
  std::filesystem::path snapshot_dir;

  void validate() const {
    if (generations == 0) throw std::invalid_argument("generations must be at least 1");
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in [0, 1]");
    if (goals_per_generation == 0) throw std::invalid_argument("goals_per_generation must be positive");
    if (!catalog) throw std::invalid_argument("missing catalog");
    for (Condition c : conditions)
      if (c == Condition::dp) throw std::invalid_argument("DP has no simulated user");
    policy.validate();
    params.validate();
  }
};

struct GenerationContext {
  std::size_t generation = 0;
  Context context;
};

/// Goals, start state and book for one generation. Depends only on the
/// batch seed, the generation index and r, so every condition sees the same
/// contexts. Goals are distinct leaf items while the catalog has enough.
inline GenerationContext make_generation(const ChainConfig& config, std::size_t generation) {
  const RecipeCatalog& catalog = *config.catalog;
  std::vector<ItemId> leaves = leaf_items(catalog);
  if (leaves.empty()) throw CatalogError("catalog has no leaf items");
  Rng rng(derive_seed(config.batch_seed, {generation, 0x60A1u}));
  Goal goal;
  while (goal.size() < config.goals_per_generation) {
    std::vector<ItemId> pool = leaves;
    for (std::size_t i = 0; i < pool.size() && goal.size() < config.goals_per_generation; ++i) {
      std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
      std::swap(pool[i], pool[j]);
      goal.items.push_back(pool[i]);
    }
  }
  RecipeBook book = generate_book(config.catalog, derive_seed(config.batch_seed, {generation}), config.r);
  return {generation, Context{std::move(goal), starting_state(config.raw_count), std::move(book)}};
}

namespace detail {

inline void write_snapshot(const ChainConfig& config, const Solver& solver, std::size_t generation) {
  if (config.snapshot_dir.empty()) return;
  std::filesystem::create_directories(config.snapshot_dir);
  std::ostringstream name;
  name << "b" << config.batch << "_r" << config.r << "_" << to_string(solver.condition()) << "_g" << std::setw(2)
       << std::setfill('0') << generation << ".lib";
  std::ofstream out(config.snapshot_dir / name.str());
  if (const auto* np = dynamic_cast<const NpSolver*>(&solver))
    out << serialize(np->library());
  else if (const auto* ds = dynamic_cast<const DsSolver*>(&solver))
    out << serialize(ds->library());
}

}  // namespace detail

/// One cultural chain per condition: every condition starts from the
/// primitive library and carries its library through all generations.
/// Records are ordered by condition, then generation.
inline std::vector<SessionRecord> run_chain(const ChainConfig& config) {
  config.validate();
  std::vector<GenerationContext> contexts;
  for (std::size_t g = 0; g < config.generations; ++g) contexts.push_back(make_generation(config, g));

  std::vector<SessionRecord> out;
  for (Condition c : config.conditions) {
    auto solver = make_solver(c, config.embedder, config.params);
    for (const GenerationContext& gc : contexts) {
      SessionRecord rec = simulate_session(*solver, gc.context, config.policy);
      rec.generation = gc.generation;
      out.push_back(std::move(rec));
      detail::write_snapshot(config, *solver, gc.generation);
    }
  }
  return out;
}

struct MetricsRow {
  std::size_t batch = 0;
  Condition condition = Condition::np;
  std::size_t generation = 0;
  double r = 0.0;
  std::size_t items_built = 0;
  std::size_t reward = 0;
  std::size_t submissions = 0;
  std::size_t library_size = 0;
  std::size_t expansions = 0;
  std::size_t candidates = 0;
  bool truncated = false;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline MetricsRow to_row(std::size_t batch, double r, const SessionRecord& rec) {
  return {batch,           rec.condition,  rec.generation,         r,          rec.items_built, rec.reward,
          rec.submissions, rec.library_size_after, rec.expansions, rec.candidates, rec.truncated};
}

/// Seed of batch `b`; independent of r so that every r value sees the same
/// goal sequences.
inline std::uint64_t batch_seed(std::uint64_t base, std::size_t b) { return derive_seed(base, {0xBA7Cu, b}); }

/// Runs `batches` batches for every r value. `base.batch_seed` is the base
/// seed. Rows are ordered by r, batch, condition and generation.
inline std::vector<MetricsRow> run_batches(const std::vector<double>& r_values, std::size_t batches,
                                           const ChainConfig& base) {
  std::vector<MetricsRow> rows;
  for (double r : r_values) {
    for (std::size_t b = 0; b < batches; ++b) {
      ChainConfig config = base;
      config.r = r;
      config.batch = b;
      config.batch_seed = batch_seed(base.batch_seed, b);
      for (const SessionRecord& rec : run_chain(config)) rows.push_back(to_row(b, r, rec));
    }
  }
  return rows;
}

inline constexpr std::string_view kMetricsHeader =
    "batch,condition,generation,r,items_built,reward,submissions,library_size,expansions,candidates,truncated";

inline std::string format_r(double r) {
  std::ostringstream s;
  s << r;
  return s.str();
}

inline void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << "\n";
  for (const MetricsRow& m : rows) {
    out << m.batch << ',' << to_string(m.condition) << ',' << m.generation << ',' << format_r(m.r) << ','
        << m.items_built << ',' << m.reward << ',' << m.submissions << ',' << m.library_size << ',' << m.expansions
        << ',' << m.candidates << ',' << (m.truncated ? 1 : 0) << "\n";
  }
}

inline std::vector<MetricsRow> read_metrics(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || detail::trim(line) != kMetricsHeader)
    throw ParseError(line_no, "unexpected metrics header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(detail::trim(line), ',');
    if (f.size() != 11) throw ParseError(line_no, "expected 11 fields");
    try {
      MetricsRow m;
      auto num = [](std::string_view s) { return static_cast<std::size_t>(std::stoull(std::string(s))); };
      m.batch = num(f[0]);
      auto c = parse_condition(f[1]);
      if (!c) throw ParseError(line_no, "unknown condition");
      m.condition = *c;
      m.generation = num(f[2]);
      m.r = std::stod(std::string(f[3]));
      m.items_built = num(f[4]);
      m.reward = num(f[5]);
      m.submissions = num(f[6]);
      m.library_size = num(f[7]);
      m.expansions = num(f[8]);
      m.candidates = num(f[9]);
      m.truncated = num(f[10]) != 0;
      rows.push_back(m);
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "malformed number");
    }
  }
  return rows;
}

struct Interval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Nonparametric percentile bootstrap of the mean. Each resample draws
/// values.size() indices with uniform_below; the bounds are the sorted
/// resample means at positions floor(a*B) and ceil((1-a)*B)-1 with
/// a = (1 - level) / 2.
inline Interval bootstrap_mean(const std::vector<double>& values, std::size_t resamples, std::uint64_t seed,
                               double level = 0.95) {
  if (values.empty()) throw std::invalid_argument("bootstrap of an empty sample");
  if (resamples == 0) throw std::invalid_argument("resamples must be positive");
  Interval out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[uniform_below(rng, values.size())];
    m = sum / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  const double a = (1.0 - level) / 2.0;
  const double b = static_cast<double>(resamples);
  auto lo = static_cast<std::size_t>(std::floor(a * b));
  auto hi = static_cast<std::size_t>(std::ceil((1.0 - a) * b));
  hi = std::clamp<std::size_t>(hi, 1, resamples) - 1;
  out.low = means[std::min(lo, resamples - 1)];
  out.high = means[hi];
  return out;
}

struct SummaryRow {
  Condition condition = Condition::np;
  double r = 0.0;
  std::size_t generation = 0;
  std::size_t n = 0;
  Interval items;
};

/// Mean items_built per (condition, r, generation) across batches, with a
/// seeded 95% bootstrap interval.
inline std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows, std::uint64_t seed = 0,
                                         std::size_t resamples = 1000) {
  std::map<std::tuple<Condition, double, std::size_t>, std::vector<double>> groups;
  for (const MetricsRow& m : rows)
    groups[{m.condition, m.r, m.generation}].push_back(static_cast<double>(m.items_built));
  std::vector<SummaryRow> out;
  for (const auto& [key, values] : groups) {
    const auto& [c, r, g] = key;
    auto r_tag = static_cast<std::uint64_t>(std::llround(r * 1e6));
    std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(c), r_tag, g});
    out.push_back({c, r, g, values.size(), bootstrap_mean(values, resamples, s)});
  }
  return out;
}

inline constexpr std::string_view kSummaryHeader = "condition,r,generation,n,mean,ci_low,ci_high";

inline void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << "\n";
  out << std::setprecision(6);
  for (const SummaryRow& s : rows)
    out << to_string(s.condition) << ',' << format_r(s.r) << ',' << s.generation << ',' << s.n << ','
        << s.items.mean << ',' << s.items.low << ',' << s.items.high << "\n";
}

/// Ordinary least-squares slope of y on x.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope undefined for constant x");
  return sxy / sxx;
}

}  // namespace natprog
