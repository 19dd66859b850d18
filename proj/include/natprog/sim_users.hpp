#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "natprog/ds.hpp"
#include "natprog/np.hpp"

namespace natprog {

enum class Condition { dp, ds, np };

inline std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::dp:
      return "DP";
    case Condition::ds:
      return "DS";
    case Condition::np:
      return "NP";
  }
  return "?";
}

inline std::optional<Condition> parse_condition(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "dp") return Condition::dp;
  if (lower == "ds") return Condition::ds;
  if (lower == "np") return Condition::np;
  return std::nullopt;
}

struct SimUserPolicy {
  std::size_t per_attempt_budget = 20000;
  std::size_t session_budget = 240000;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (per_attempt_budget == 0) throw std::invalid_argument("per_attempt_budget must be positive");
    if (per_attempt_budget > session_budget) throw std::invalid_argument("per_attempt_budget exceeds session_budget");
  }
};

/// Hint read off the recipe book, inputs in the rule's own order.
inline std::string make_hint(ItemId item, const RecipeRule& rule) {
  if (rule.output != item) throw std::invalid_argument("rule does not produce " + std::string(item_name(item)));
  return "please craft '" + std::string(item_name(item)) + "' with '" + std::string(item_name(rule.first)) +
         "' and '" + std::string(item_name(rule.second)) + "'";
}

struct AttemptRecord {
  ItemId item{};
  bool prerequisite = false;
  bool success = false;
  FailureReason reason = FailureReason::no_candidates;
  std::size_t expansions = 0;
};

struct SessionRecord {
  Condition condition = Condition::np;
  std::size_t generation = 0;
  std::vector<ItemId> goals;
  std::size_t submissions = 0;
  std::size_t items_built = 0;
  std::size_t reward = 0;
  std::size_t library_size_before = 0;
  std::size_t library_size_after = 0;
  std::size_t expansions = 0;
  std::size_t candidates = 0;
  bool truncated = false;
  std::vector<AttemptRecord> attempts;
  WorldState final_state;

  friend bool operator==(const SessionRecord& a, const SessionRecord& b) {
    auto key = [](const SessionRecord& r) {
      return std::tie(r.condition, r.generation, r.goals, r.submissions, r.items_built, r.reward,
                      r.library_size_before, r.library_size_after, r.expansions, r.candidates, r.truncated);
    };
    if (key(a) != key(b) || a.attempts.size() != b.attempts.size() || !(a.final_state == b.final_state)) return false;
    for (std::size_t i = 0; i < a.attempts.size(); ++i) {
      const auto &x = a.attempts[i], &y = b.attempts[i];
      if (x.item != y.item || x.prerequisite != y.prerequisite || x.success != y.success || x.reason != y.reason ||
          x.expansions != y.expansions)
        return false;
    }
    return true;
  }
};

/// A learning solver together with the library it carries.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual Condition condition() const = 0;
  virtual SolveResult solve(const SearchProblem& problem, const Context& context, const SolveOptions& options) = 0;
  virtual std::size_t library_size() const = 0;
};

class NpSolver final : public Solver {
 public:
  NpSolver(std::shared_ptr<const Embedder> embedder, ProposerParams params, Library library = {})
      : embedder_(std::move(embedder)), params_(params), library_(std::move(library)) {}

  Condition condition() const override { return Condition::np; }
  SolveResult solve(const SearchProblem& problem, const Context& context, const SolveOptions& options) override {
    return np_solve(problem, context, library_, *embedder_, params_, options);
  }
  std::size_t library_size() const override { return library_.size(); }

  const Library& library() const { return library_; }
  Library& library() { return library_; }

 private:
  std::shared_ptr<const Embedder> embedder_;
  ProposerParams params_;
  Library library_;
};

class DsSolver final : public Solver {
 public:
  DsSolver(std::shared_ptr<const Embedder> embedder, ProposerParams params, DpLibrary library = {})
      : embedder_(std::move(embedder)), params_(params), library_(std::move(library)) {}

  Condition condition() const override { return Condition::ds; }
  SolveResult solve(const SearchProblem& problem, const Context& context, const SolveOptions& options) override {
    return ds_solve(problem, context, library_, *embedder_, params_, options);
  }
  std::size_t library_size() const override { return library_.user_program_count(); }

  const DpLibrary& library() const { return library_; }
  DpLibrary& library() { return library_; }

 private:
  std::shared_ptr<const Embedder> embedder_;
  ProposerParams params_;
  DpLibrary library_;
};

inline std::unique_ptr<Solver> make_solver(Condition c, std::shared_ptr<const Embedder> embedder,
                                           const ProposerParams& params) {
  switch (c) {
    case Condition::np:
      return std::make_unique<NpSolver>(std::move(embedder), params);
    case Condition::ds:
      return std::make_unique<DsSolver>(std::move(embedder), params);
    case Condition::dp:
      break;
  }
  throw std::invalid_argument("no simulated user for DP");
}

namespace detail {

class SimulatedUser {
 public:
  SimulatedUser(Solver& solver, const Context& context, const SimUserPolicy& policy, SessionRecord& record)
      : solver_(solver), context_(context), policy_(policy), record_(record), state_(context.start) {}

  // Submits `item`; on failure builds the missing inputs of its active rule
  // and retries once.
  bool attempt(ItemId item, bool prerequisite) {
    if (submit(item, prerequisite)) return true;
    if (record_.truncated) return false;
    RecipeRule rule = *context_.book.active_rule(item);
    std::array<ItemId, 2> inputs{rule.first, rule.second};
    for (std::size_t i = 0; i < 2; ++i) {
      ItemId input = inputs[i];
      if (is_raw(input)) continue;
      std::size_t needed = (i == 1 && inputs[0] == input) ? 2 : 1;
      if (state_.count(input) >= needed) continue;
      attempt(input, true);
      if (record_.truncated) return false;
    }
    return submit(item, prerequisite);
  }

  const WorldState& state() const { return state_; }

 private:
  bool submit(ItemId item, bool prerequisite) {
    std::size_t remaining = policy_.session_budget - std::min(spent_, policy_.session_budget);
    if (remaining == 0) {
      record_.truncated = true;
      return false;
    }
    RecipeRule rule = *context_.book.active_rule(item);
    SearchProblem problem{Goal{item}, make_hint(item, rule)};
    Context here{problem.goal, state_, context_.book};
    SolveOptions options;
    options.budget = std::min(policy_.per_attempt_budget, remaining);
    SolveResult result = solver_.solve(problem, here, options);

    ++record_.submissions;
    spent_ += result.stats.expansions;
    record_.expansions += result.stats.expansions;
    record_.candidates += result.stats.candidates;
    record_.attempts.push_back({item, prerequisite, result.success, result.reason, result.stats.expansions});
    if (result.success) {
      // Whatever a solution left in the input slots goes back to the
      // inventory before the next submission.
      state_ = result.final_state;
      apply(state_, Action::clear(), context_.book);
    }
    return result.success;
  }

  Solver& solver_;
  const Context& context_;
  const SimUserPolicy& policy_;
  SessionRecord& record_;
  WorldState state_;
  std::size_t spent_ = 0;
};

}  // namespace detail

/// One simulated user working through the context's goal items in order.
/// The solver's library is updated in place and carries to later calls.
inline SessionRecord simulate_session(Solver& solver, const Context& context, const SimUserPolicy& policy) {
  policy.validate();
  SessionRecord record;
  record.condition = solver.condition();
  record.goals = context.goal.items;
  record.library_size_before = solver.library_size();

  detail::SimulatedUser user(solver, context, policy, record);
  for (ItemId item : context.goal.items) {
    user.attempt(item, false);
    if (record.truncated) break;
  }
  record.final_state = user.state();
  record.reward = reward(context.start, record.final_state, context.goal);
  record.items_built = record.reward;
  record.library_size_after = solver.library_size();
  return record;
}

}  // namespace natprog
