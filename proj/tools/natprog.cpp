// Command line front end: simulated chains, recipe books, summaries and the
// live session server.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "natprog/http_sampler.hpp"
#include "natprog/http_service.hpp"
#include "natprog/natprog.hpp"

namespace fs = std::filesystem;
using namespace natprog;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::shared_ptr<const RecipeCatalog> load_catalog(const std::string& path) {
  if (path.empty() || path == "default") return share(default_catalog());
  if (path == "tiny") return share(tiny_catalog());
  return share(parse_catalog(read_file(path)));
}

std::vector<Condition> parse_conditions(const std::vector<std::string>& names) {
  std::vector<Condition> out;
  for (const std::string& n : names) {
    auto c = parse_condition(n);
    if (!c) throw CLI::ValidationError("--conditions", "unknown condition " + n);
    out.push_back(*c);
  }
  return out;
}

HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural programming solvers, simulated users and session server"};
  app.require_subcommand(1);

  // sim
  auto* sim = app.add_subcommand("sim", "Run simulated-user chains and write metrics");
  std::vector<double> r_values{0.0, 0.25, 0.5};
  std::size_t batches = 5, generations = 20, goals = 6, budget = 20000, session_budget = 240000;
  std::vector<std::string> condition_names{"np", "ds"};
  std::uint64_t seed = 0;
  std::string catalog_path;
  std::string out_dir = "out";
  bool snapshots = false;
  sim->add_option("--r", r_values, "Rule-B probabilities")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sim->add_option("--batches", batches)->check(CLI::PositiveNumber);
  sim->add_option("--generations", generations)->check(CLI::PositiveNumber);
  sim->add_option("--goals", goals, "Goal items per generation")->check(CLI::PositiveNumber);
  sim->add_option("--conditions", condition_names)->delimiter(',');
  sim->add_option("--seed", seed, "Base seed");
  sim->add_option("--catalog", catalog_path, "Catalog file, 'default' or 'tiny'");
  sim->add_option("--budget", budget, "Expansions per attempt")->check(CLI::PositiveNumber);
  sim->add_option("--session-budget", session_budget, "Expansions per session")->check(CLI::PositiveNumber);
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_flag("--snapshots", snapshots, "Write each library after every generation");

  // book
  auto* book = app.add_subcommand("book", "Print a generated recipe book");
  double book_r = 0.5;
  book->add_option("--seed", seed);
  book->add_option("--r", book_r)->check(CLI::Range(0.0, 1.0));
  book->add_option("--catalog", catalog_path);

  auto* catalog_cmd = app.add_subcommand("catalog", "Print a recipe catalog");
  catalog_cmd->add_option("--catalog", catalog_path);

  // summarize
  auto* summarize_cmd = app.add_subcommand("summarize", "Bootstrap summary of a metrics file");
  std::string in_path, summary_out;
  std::size_t resamples = 1000;
  summarize_cmd->add_option("--in", in_path, "metrics.csv")->required()->check(CLI::ExistingFile);
  summarize_cmd->add_option("--out", summary_out, "Write here instead of stdout");
  summarize_cmd->add_option("--seed", seed);
  summarize_cmd->add_option("--resamples", resamples)->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the live session server");
  std::string host = "127.0.0.1";
  int port = 8080;
  double session_seconds = 600, solver_seconds = 30, rate = 0;
  std::string sampler_url;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--catalog", catalog_path);
  serve->add_option("--session-seconds", session_seconds)->check(CLI::PositiveNumber);
  serve->add_option("--solver-seconds", solver_seconds)->check(CLI::PositiveNumber);
  serve->add_option("--rate", rate, "Expansions per second; measured when 0")->check(CLI::NonNegativeNumber);
  serve->add_option("--sampler-url", sampler_url, "Completion endpoint for NP proposals (http only)");

  auto* calibrate = app.add_subcommand("calibrate", "Measure expansions per second on this machine");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      ChainConfig base;
      base.conditions = parse_conditions(condition_names);
      base.generations = generations;
      base.goals_per_generation = goals;
      base.batch_seed = seed;
      base.catalog = load_catalog(catalog_path);
      base.policy.per_attempt_budget = budget;
      base.policy.session_budget = session_budget;
      base.params.expansion_budget = budget;
      if (snapshots) base.snapshot_dir = fs::path(out_dir) / "snapshots";
      fs::create_directories(out_dir);
      auto rows = run_batches(r_values, batches, base);
      std::ofstream metrics(fs::path(out_dir) / "metrics.csv");
      write_metrics(metrics, rows);
      std::ofstream summary(fs::path(out_dir) / "summary.csv");
      write_summary(summary, summarize(rows, seed));
      std::cout << "wrote " << rows.size() << " rows to " << (fs::path(out_dir) / "metrics.csv").string() << "\n";
      return 0;
    }
    if (*book) {
      std::cout << format_book(generate_book(load_catalog(catalog_path), seed, book_r));
      return 0;
    }
    if (*catalog_cmd) {
      std::cout << format_catalog(*load_catalog(catalog_path));
      return 0;
    }
    if (*summarize_cmd) {
      std::ifstream in(in_path);
      auto rows = summarize(read_metrics(in), seed, resamples);
      if (summary_out.empty()) {
        write_summary(std::cout, rows);
      } else {
        std::ofstream out(summary_out);
        write_summary(out, rows);
      }
      return 0;
    }
    if (*calibrate) {
      std::cout << measure_rate_constant() << "\n";
      return 0;
    }
    if (*serve) {
      ServiceConfig config;
      config.catalog = load_catalog(catalog_path);
      config.session_seconds = session_seconds;
      config.solver_seconds = solver_seconds;
      config.rate_constant = rate > 0 ? rate : measure_rate_constant();
      if (!sampler_url.empty()) config.sampler = std::make_shared<HttpSampler>(HttpSamplerConfig{sampler_url});
      SessionManager sessions(config);
      HttpService service(sessions);
      int bound = service.bind(host, port);
      if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << " (rate " << config.rate_constant
                << " expansions/s, budget " << config.solver_budget() << ")" << std::endl;
      service.listen();
      g_service = nullptr;
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
