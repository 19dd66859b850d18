#pragma once

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "natprog/chain.hpp"
#include "natprog/library_io.hpp"
#include "natprog/sampler.hpp"

namespace natprog {

class ServiceError : public std::runtime_error {
 public:
  enum class Kind { bad_request, not_found, solver_busy, duplicate_name, unknown_name, session_ended };

  ServiceError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline std::string_view to_string(ServiceError::Kind k) {
  switch (k) {
    case ServiceError::Kind::bad_request:
      return "BadRequest";
    case ServiceError::Kind::not_found:
      return "NotFound";
    case ServiceError::Kind::solver_busy:
      return "SolverBusy";
    case ServiceError::Kind::duplicate_name:
      return "DuplicateName";
    case ServiceError::Kind::unknown_name:
      return "UnknownName";
    case ServiceError::Kind::session_ended:
      return "SessionEnded";
  }
  return "?";
}

struct ServiceConfig {
  std::shared_ptr<const RecipeCatalog> catalog = share(default_catalog());
  std::shared_ptr<const Embedder> embedder = std::make_shared<HashingEmbedder>();
  // When set, NP solves race the enumeration against this sampler.
  std::shared_ptr<CompletionSampler> sampler;
  RaceOptions race;
  ProposerParams params;
  double session_seconds = 600;
  double solver_seconds = 30;
  // Expansions per solver second; see measure_rate_constant.
  double rate_constant = 2000;
  std::uint16_t raw_count = 20;
  std::size_t goals_per_generation = 6;
  // Publish a progress event every this many expansions (DS) or candidates (NP).
  std::size_t progress_every = 100;
  // Run a background timer; off means time only moves through tick().
  bool realtime = true;
  std::chrono::milliseconds tick_interval{1000};

  void validate() const {
    if (!catalog) throw std::invalid_argument("missing catalog");
    if (!embedder) throw std::invalid_argument("missing embedder");
    if (!(session_seconds > 0)) throw std::invalid_argument("session_seconds must be positive");
    if (!(solver_seconds > 0)) throw std::invalid_argument("solver_seconds must be positive");
    if (!(rate_constant > 0)) throw std::invalid_argument("rate_constant must be positive");
    if (tick_interval.count() <= 0) throw std::invalid_argument("tick_interval must be positive");
    params.validate();
  }

  /// Expansion budget standing in for the wall-clock solver limit.
  std::size_t solver_budget() const {
    return static_cast<std::size_t>(std::max(1.0, std::round(rate_constant * solver_seconds)));
  }
};

/// Times a fixed NP workload on this machine and returns expansions per
/// second, the rate constant for ServiceConfig.
inline double measure_rate_constant(std::size_t expansions = 20000) {
  auto catalog = share(default_catalog());
  HashingEmbedder embedder;
  Library library;
  SearchProblem problem{Goal{ItemId::clock}, "please craft 'clock' with 'gear' and 'wire'"};
  Context context{problem.goal, starting_state(), rule_a_book(catalog)};
  SolveOptions options;
  options.budget = expansions;
  options.learn = false;
  auto start = std::chrono::steady_clock::now();
  SolveResult r = np_solve(problem, context, library, embedder, ProposerParams{}, options);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return static_cast<double>(std::max<std::size_t>(r.stats.expansions, 1)) / std::max(seconds, 1e-6);
}

struct SessionEvent {
  std::uint64_t seq = 0;
  std::string type;
  nlohmann::json data;
};

/// Append-only event feed of one session. Sequence numbers start at 1;
/// readers ask for everything after the last number they saw.
class EventFeed {
 public:
  std::uint64_t publish(std::string type, nlohmann::json data) {
    std::lock_guard lock(mu_);
    if (closed_) return 0;
    events_.push_back({events_.size() + 1, std::move(type), std::move(data)});
    cv_.notify_all();
    return events_.size();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

  /// Events numbered above `after`, waiting up to `timeout` for one to
  /// arrive. Returns early with nothing once the feed is closed.
  std::vector<SessionEvent> since(std::uint64_t after, std::chrono::milliseconds timeout = {}) const {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || events_.size() > after; });
    if (after >= events_.size()) return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(after), events_.end()};
  }

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<SessionEvent> events_;
  bool closed_ = false;
};

struct SessionRequest {
  Condition condition = Condition::np;
  std::uint64_t seed = 0;
  double r = 0.0;
  std::size_t generation = 0;
  std::optional<double> duration;  // seconds; config default when unset
  std::string library;             // serialized library to start from
};

inline SessionRequest parse_session_request(const nlohmann::json& j) {
  if (!j.is_object()) throw ServiceError(ServiceError::Kind::bad_request, "request must be an object");
  SessionRequest req;
  try {
    auto c = parse_condition(j.value("condition", std::string("np")));
    if (!c) throw ServiceError(ServiceError::Kind::bad_request, "unknown condition");
    req.condition = *c;
    req.seed = j.value("seed", std::uint64_t{0});
    req.r = j.value("r", 0.0);
    req.generation = j.value("generation", std::size_t{0});
    if (j.contains("duration")) req.duration = j.at("duration").get<double>();
    req.library = j.value("library", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError(ServiceError::Kind::bad_request, e.what());
  }
  return req;
}

/// Live interactive sessions for DP, DS and NP over generated contexts.
/// Sessions are independent; operations on one session are serialized.
/// Searches run on a worker thread against copies of the state and library;
/// only a successful result is committed.
class SessionManager {
 public:
  explicit SessionManager(ServiceConfig config = {}) : config_(std::move(config)) {
    config_.validate();
    if (config_.realtime) ticker_ = std::jthread([this](std::stop_token st) { run_ticker(st); });
  }

  ~SessionManager() {
    if (ticker_.joinable()) {
      ticker_.request_stop();
      ticker_cv_.notify_all();
      ticker_.join();
    }
    std::vector<std::shared_ptr<Session>> all;
    {
      std::lock_guard lock(mu_);
      for (auto& [id, s] : sessions_) all.push_back(s);
    }
    for (auto& s : all) {
      stop_solver(*s);
      s->feed.close();
    }
  }

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  const ServiceConfig& config() const { return config_; }

  std::string create(const SessionRequest& req) {
    if (!(req.r >= 0.0 && req.r <= 1.0)) throw ServiceError(ServiceError::Kind::bad_request, "r must lie in [0, 1]");
    double duration = req.duration.value_or(config_.session_seconds);
    if (!(duration > 0)) throw ServiceError(ServiceError::Kind::bad_request, "duration must be positive");

    ChainConfig chain;
    chain.catalog = config_.catalog;
    chain.r = req.r;
    chain.batch_seed = req.seed;
    chain.raw_count = config_.raw_count;
    chain.goals_per_generation = config_.goals_per_generation;
    GenerationContext gc = make_generation(chain, req.generation);

    auto s = std::make_shared<Session>();
    s->condition = req.condition;
    s->generation = req.generation;
    s->context = std::move(gc.context);
    s->state = s->context.start;
    s->remaining = duration;
    if (!req.library.empty()) {
      try {
        if (req.condition == Condition::np)
          s->library = deserialize(req.library);
        else
          s->programs = deserialize_programs(req.library);
      } catch (const ParseError& e) {
        throw ServiceError(ServiceError::Kind::bad_request, std::string("library: ") + e.what());
      }
    }
    {
      std::lock_guard lock(mu_);
      s->id = "s" + std::to_string(++next_id_);
      sessions_.emplace(s->id, s);
    }
    std::lock_guard lock(s->mu);
    s->feed.publish("snapshot", snapshot_json(*s));
    return s->id;
  }

  nlohmann::json snapshot(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    return snapshot_json(*s);
  }

  /// DP: {"define": {"name", "body"}} or {"execute": name}.
  /// DS/NP: {"hint", "goal"?} where goal is an item name or a list of them;
  /// without a goal the reply is a suggestion.
  /// Any condition: {"clear": true} returns slotted items to the inventory.
  nlohmann::json submit(const std::string& id, const nlohmann::json& payload) {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    if (s->ended) throw ServiceError(ServiceError::Kind::session_ended, "session " + id + " has ended");
    if (s->busy) throw ServiceError(ServiceError::Kind::solver_busy, "a solver is already running");
    if (!payload.is_object()) throw ServiceError(ServiceError::Kind::bad_request, "payload must be an object");
    if (s->solver.joinable()) s->solver.join();

    if (payload.value("clear", false)) {
      apply(s->state, Action::clear(), s->context.book);
      s->feed.publish("snapshot", snapshot_json(*s));
      return {{"status", "cleared"}};
    }
    if (s->condition == Condition::dp) return submit_dp(*s, payload);
    return submit_search(s, payload);
  }

  /// Stops the running solver, if any, and waits for it to finish.
  nlohmann::json cancel(const std::string& id) {
    auto s = find(id);
    bool was_busy = stop_solver(*s);
    return {{"status", was_busy ? "cancelled" : "idle"}};
  }

  nlohmann::json library_view(const std::string& id, const std::string& filter) {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    auto out = nlohmann::json::array();
    auto keep = [&](const std::string& name, const std::string& hint) {
      return filter.empty() || name.find(filter) != std::string::npos || hint.find(filter) != std::string::npos;
    };
    if (s->condition == Condition::np) {
      for (Action a : primitive_actions()) {
        std::string name = action_name(a);
        if (keep(name, "")) out.push_back({{"name", name}, {"kind", "primitive"}});
      }
      for (std::size_t i = 0; i < s->library.size(); ++i) {
        const LibraryEntry& e = s->library.at(i);
        std::string name = e.hint().empty() ? "make " + to_string(e.goal()) : e.hint();
        if (!keep(name, e.hint())) continue;
        auto steps = nlohmann::json::array();
        for (const Step& st : e.decomposition.steps) {
          if (const auto* a = std::get_if<Action>(&st))
            steps.push_back(action_name(*a));
          else
            steps.push_back({{"goal", detail::goal_to_json(std::get<SearchProblem>(st).goal)}});
        }
        out.push_back({{"name", name},
                       {"kind", "decomposition"},
                       {"index", i},
                       {"hint", e.hint()},
                       {"goal", detail::goal_to_json(e.goal())},
                       {"steps", std::move(steps)},
                       {"count", e.occurrence_count},
                       {"last_used", e.last_used_tick}});
      }
    } else {
      for (const DpProgram& p : s->programs.programs()) {
        if (!keep(p.name, p.hint)) continue;
        nlohmann::json j{{"name", p.name}, {"kind", p.primitive ? "primitive" : "program"}};
        if (!p.primitive) {
          j["body"] = p.body;
          j["hint"] = p.hint;
          j["goal"] = p.goal ? nlohmann::json(detail::goal_to_json(*p.goal)) : nlohmann::json(nullptr);
        }
        out.push_back(std::move(j));
      }
    }
    return out;
  }

  nlohmann::json recipes(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    const RecipeBook& book = s->context.book;
    auto rules = nlohmann::json::array();
    for (ItemId item : book.catalog().craftables()) {
      RecipeRule r = *book.active_rule(item);
      rules.push_back({{"output", item_name(item)},
                       {"inputs", {item_name(r.first), item_name(r.second)}},
                       {"rule", book.uses_rule_b(item) ? "B" : "A"}});
    }
    return rules;
  }

  /// The session's event feed; stays valid while the manager lives.
  std::shared_ptr<const EventFeed> events(const std::string& id) {
    auto s = find(id);
    return std::shared_ptr<const EventFeed>(s, &s->feed);
  }

  /// Advances every live session's timer. A session reaching zero cancels
  /// its solver, publishes "end" and closes its feed.
  void tick(double seconds) {
    std::vector<std::shared_ptr<Session>> all;
    {
      std::lock_guard lock(mu_);
      for (auto& [id, s] : sessions_) all.push_back(s);
    }
    for (auto& s : all) {
      bool expired = false;
      {
        std::lock_guard lock(s->mu);
        if (s->ended) continue;
        s->remaining = std::max(0.0, s->remaining - seconds);
        s->feed.publish("tick", {{"remaining_seconds", s->remaining}});
        if (s->remaining <= 0.0) {
          s->ended = true;
          expired = true;
        }
      }
      if (!expired) continue;
      stop_solver(*s);
      std::lock_guard lock(s->mu);
      s->feed.publish("end", snapshot_json(*s));
      s->feed.close();
    }
  }

 private:
  struct Session {
    std::string id;
    Condition condition = Condition::np;
    std::size_t generation = 0;
    Context context;
    WorldState state;
    Library library;      // NP
    DpLibrary programs;   // DP and DS
    double remaining = 0;
    bool ended = false;
    std::size_t submissions = 0;
    bool busy = false;
    std::stop_source stop;
    std::thread solver;
    EventFeed feed;
    std::mutex mu;
  };

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(ServiceError::Kind::not_found, "no session " + id);
    return it->second;
  }

  // Returns whether a solver was running.
  bool stop_solver(Session& s) {
    std::thread worker;
    bool was_busy = false;
    {
      std::lock_guard lock(s.mu);
      was_busy = s.busy;
      if (s.busy) s.stop.request_stop();
      worker = std::move(s.solver);
    }
    if (worker.joinable()) worker.join();
    return was_busy;
  }

  nlohmann::json snapshot_json(const Session& s) const {
    nlohmann::json inventory = nlohmann::json::object();
    for (ItemId item : all_items()) inventory[std::string(item_name(item))] = s.state.count(item);
    auto slots = nlohmann::json::array();
    for (ItemId item : s.state.slotted()) slots.push_back(item_name(item));
    auto out = output_slot(s.state, s.context.book);
    auto goals = nlohmann::json::array();
    for (ItemId item : s.context.goal.items)
      goals.push_back({{"item", item_name(item)},
                       {"built", s.state.crafted_count(item) - s.context.start.crafted_count(item)}});
    return {{"id", s.id},
            {"condition", to_string(s.condition)},
            {"generation", s.generation},
            {"remaining_seconds", s.remaining},
            {"ended", s.ended},
            {"busy", s.busy},
            {"submissions", s.submissions},
            {"inventory", std::move(inventory)},
            {"slots", std::move(slots)},
            {"output", out ? nlohmann::json(item_name(*out)) : nlohmann::json(nullptr)},
            {"goals", std::move(goals)},
            {"reward", reward(s.context.start, s.state, s.context.goal)},
            {"library_size", s.condition == Condition::np ? s.library.size() : s.programs.user_program_count()}};
  }

  static std::vector<std::string> names_of(const nlohmann::json& j) {
    if (!j.is_array()) throw ServiceError(ServiceError::Kind::bad_request, "expected an array of names");
    std::vector<std::string> out;
    for (const auto& v : j) {
      if (!v.is_string()) throw ServiceError(ServiceError::Kind::bad_request, "names must be strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  nlohmann::json submit_dp(Session& s, const nlohmann::json& payload) {
    try {
      if (payload.contains("define")) {
        const auto& d = payload.at("define");
        if (!d.is_object() || !d.contains("name") || !d.at("name").is_string())
          throw ServiceError(ServiceError::Kind::bad_request, "define needs a name and a body");
        std::string name = d.at("name").get<std::string>();
        if (name.empty()) throw ServiceError(ServiceError::Kind::bad_request, "empty program name");
        s.programs.define(name, names_of(d.value("body", nlohmann::json::array())));
        s.feed.publish("library", {{"defined", name}});
        return {{"status", "defined"}, {"name", name}};
      }
      if (payload.contains("execute")) {
        if (!payload.at("execute").is_string())
          throw ServiceError(ServiceError::Kind::bad_request, "execute needs a program name");
        std::string name = payload.at("execute").get<std::string>();
        const DpProgram& p = s.programs.get(name);
        ++s.submissions;
        Trajectory t = run(s.state, p.actions, s.context.book);
        s.state = t.back();
        auto errors = nlohmann::json::array();
        for (std::size_t i = 0; i < t.errors.size(); ++i)
          if (t.errors[i] != StepError::none)
            errors.push_back({{"step", i}, {"action", action_name(p.actions[i])}, {"error", to_string(t.errors[i])}});
        nlohmann::json result{{"status", "executed"}, {"name", name}, {"actions", actions_json(p.actions)},
                              {"errors", std::move(errors)}};
        s.feed.publish("result", result);
        s.feed.publish("snapshot", snapshot_json(s));
        return result;
      }
    } catch (const DpError& e) {
      throw ServiceError(e.kind() == DpError::Kind::duplicate_name ? ServiceError::Kind::duplicate_name
                                                                   : ServiceError::Kind::unknown_name,
                         e.what());
    }
    throw ServiceError(ServiceError::Kind::bad_request, "DP payload needs define or execute");
  }

  static nlohmann::json actions_json(const std::vector<Action>& actions) {
    auto out = nlohmann::json::array();
    for (Action a : actions) out.push_back(action_name(a));
    return out;
  }

  // Goal of the library entry whose hint is most similar to `hint`.
  std::optional<Goal> suggest_goal(const Session& s, const std::string& hint) const {
    auto q = config_.embedder->embed(hint);
    std::optional<Goal> best;
    double best_score = -2.0;
    auto consider = [&](const std::string& h, const Goal& g) {
      if (h.empty()) return;
      double score = cosine(q, config_.embedder->embed(h));
      if (score > best_score) {
        best_score = score;
        best = g;
      }
    };
    if (s.condition == Condition::np) {
      for (const LibraryEntry& e : s.library.entries()) consider(e.hint(), e.goal());
    } else {
      for (const DpProgram& p : s.programs.programs())
        if (p.goal) consider(p.hint, *p.goal);
    }
    return best;
  }

  nlohmann::json submit_search(const std::shared_ptr<Session>& sp, const nlohmann::json& payload) {
    Session& s = *sp;
    SearchProblem problem;
    try {
      problem.hint = payload.value("hint", std::string());
      if (payload.contains("goal") && !payload.at("goal").is_null()) {
        const auto& g = payload.at("goal");
        problem.goal = detail::goal_from_json(g.is_string() ? nlohmann::json::array({g}) : g, 1);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ServiceError(ServiceError::Kind::bad_request, e.what());
    } catch (const ParseError& e) {
      throw ServiceError(ServiceError::Kind::bad_request, e.what());
    }
    if (problem.goal.empty()) {
      auto goal = suggest_goal(s, problem.hint);
      return {{"status", "suggestion"},
              {"goal", goal ? nlohmann::json(detail::goal_to_json(*goal)) : nlohmann::json(nullptr)}};
    }

    ++s.submissions;
    s.busy = true;
    s.stop = std::stop_source();
    Context context{problem.goal, s.state, s.context.book};
    s.feed.publish("started", {{"hint", problem.hint},
                               {"goal", detail::goal_to_json(problem.goal)},
                               {"budget", config_.solver_budget()}});
    std::stop_token token = s.stop.get_token();
    if (s.condition == Condition::np) {
      s.solver = std::thread([this, sp, problem, context, library = s.library, token]() mutable {
        SolveResult r = solve_np(*sp, problem, context, library, token);
        finish(*sp, std::move(r), std::move(library), std::nullopt);
      });
    } else {
      s.solver = std::thread([this, sp, problem, context, programs = s.programs, token]() mutable {
        SolveResult r = ds_solve(problem, context, programs, *config_.embedder, config_.params, options(*sp, token));
        finish(*sp, std::move(r), std::nullopt, std::move(programs));
      });
    }
    return {{"status", "accepted"}, {"budget", config_.solver_budget()}};
  }

  SolveOptions options(Session& s, std::stop_token token) const {
    SolveOptions o;
    o.budget = config_.solver_budget();
    o.stop = std::move(token);
    o.progress_every = config_.progress_every;
    auto last = std::make_shared<std::size_t>(0);
    o.on_progress = [&feed = s.feed, last](const ProgressEvent& e) {
      // Only strictly increasing expansion counts are published.
      if (e.expansions <= *last && *last != 0) return;
      *last = e.expansions;
      feed.publish("progress", {{"expansions", e.expansions}, {"candidates", e.candidates}, {"candidate", e.candidate}});
    };
    return o;
  }

  SolveResult solve_np(Session& s, const SearchProblem& problem, const Context& context, Library& library,
                       std::stop_token token) const {
    SolveOptions o = options(s, std::move(token));
    if (!config_.sampler) return np_solve(problem, context, library, *config_.embedder, config_.params, o);
    auto stream = outer_propose_llm(problem, library, *config_.embedder, config_.sampler, *config_.catalog,
                                    config_.params, config_.race);
    return np_execute(problem, context, library, *stream, config_.params, o);
  }

  void finish(Session& s, SolveResult r, std::optional<Library> library, std::optional<DpLibrary> programs) {
    std::lock_guard lock(s.mu);
    s.busy = false;
    nlohmann::json result{{"status", r.success ? "success" : "failure"},
                          {"expansions", r.stats.expansions},
                          {"candidates", r.stats.candidates},
                          {"cache_hits", r.stats.cache_hits}};
    if (r.success) {
      s.state = r.final_state;
      if (library) s.library = std::move(*library);
      if (programs) s.programs = std::move(*programs);
      result["actions"] = actions_json(r.actions);
      if (!r.program.empty()) result["program"] = r.program;
      if (r.stored) result["stored"] = *r.stored;
    } else {
      result["reason"] = to_string(r.reason);
    }
    s.feed.publish("result", std::move(result));
    if (r.success) s.feed.publish("snapshot", snapshot_json(s));
  }

  void run_ticker(std::stop_token st) {
    auto last = std::chrono::steady_clock::now();
    std::mutex m;
    std::unique_lock lock(m);
    while (!st.stop_requested()) {
      ticker_cv_.wait_for(lock, st, config_.tick_interval, [] { return false; });
      if (st.stop_requested()) break;
      auto now = std::chrono::steady_clock::now();
      tick(std::chrono::duration<double>(now - last).count());
      last = now;
    }
  }

  ServiceConfig config_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 0;
  std::condition_variable_any ticker_cv_;
  std::jthread ticker_;
};

}  // namespace natprog
