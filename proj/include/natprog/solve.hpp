#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <stop_token>
#include <string>
#include <vector>

#include "natprog/candidate.hpp"
#include "natprog/env.hpp"
#include "natprog/library.hpp"

namespace natprog {

enum class FailureReason { budget, no_candidates, cancelled };

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::budget:
      return "budget";
    case FailureReason::no_candidates:
      return "no-candidates";
    case FailureReason::cancelled:
      return "cancelled";
  }
  return "?";
}

struct SolveStats {
  std::size_t expansions = 0;       // budget units spent
  std::size_t candidates = 0;       // outer candidates tried
  std::size_t cache_hits = 0;       // primitive executions saved by the prefix cache
  std::size_t primitive_steps = 0;  // primitive executions performed
  std::size_t pruned = 0;           // candidates skipped as provably failing
};

struct ProgressEvent {
  std::size_t expansions = 0;
  std::size_t candidates = 0;
  std::string candidate;
};

struct SolveOptions {
  std::size_t budget = 20000;
  std::stop_token stop;
  bool cache = true;
  bool learn = true;
  // One line per expansion: "<plan id> <prefix length> <outcome>".
  std::ostream* trace = nullptr;
  std::function<void(const ProgressEvent&)> on_progress;
  std::size_t progress_every = 1;
};

struct SolveResult {
  bool success = false;
  FailureReason reason = FailureReason::no_candidates;
  std::optional<PlanTree> plan;       // NP
  std::vector<std::string> program;   // DS: names of the composed programs
  std::optional<std::string> stored;  // DS: name the solution was stored under
  std::vector<Action> actions;
  WorldState final_state;
  SolveStats stats;

  static SolveResult failure(FailureReason reason, const SolveStats& stats) {
    SolveResult r;
    r.reason = reason;
    r.stats = stats;
    return r;
  }
};

inline std::string describe(const CandidateItem& item, const std::function<std::string(std::size_t)>& ref_name) {
  if (const auto* r = std::get_if<LibraryRef>(&item)) return ref_name(r->index);
  if (const auto* a = std::get_if<Action>(&item)) return action_name(*a);
  return "sub" + to_string(std::get<SearchProblem>(item).goal);
}

inline std::string describe(const CandidateSequence& seq, const std::function<std::string(std::size_t)>& ref_name) {
  std::string out = "[";
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    if (i) out += ", ";
    out += describe(seq.items[i], ref_name);
  }
  return out + "]";
}

namespace detail {

inline bool should_report(const SolveOptions& o, std::size_t expansions) {
  return o.on_progress && (o.progress_every <= 1 || expansions % o.progress_every == 0);
}

}  // namespace detail

}  // namespace natprog
