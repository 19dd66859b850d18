#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "natprog/dp.hpp"
#include "natprog/embedder.hpp"
#include "natprog/proposers.hpp"
#include "natprog/solve.hpp"

namespace natprog {

namespace detail {

/// Most recently used program whose stored goal equals `goal`.
inline std::optional<std::size_t> latest_program_for(const DpLibrary& library, const Goal& goal) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < library.programs().size(); ++i) {
    const DpProgram& p = library.at(i);
    if (p.goal && *p.goal == goal && (!best || p.tick > library.at(*best).tick)) best = i;
  }
  return best;
}

inline std::optional<std::size_t> resolve(const DpLibrary& library, const CandidateItem& item) {
  if (const auto* r = std::get_if<LibraryRef>(&item)) {
    if (r->index >= library.programs().size()) return std::nullopt;
    return r->index;
  }
  if (const auto* a = std::get_if<Action>(&item)) return library.position_of(action_name(*a));
  return latest_program_for(library, std::get<SearchProblem>(item).goal);
}

}  // namespace detail

/// Direct synthesis: try candidate compositions of deterministic programs in
/// stream order, executing each from the context start; the first whose run
/// satisfies the goal is stored as a new program named after the hint.
///
/// Each evaluated candidate costs one budget unit. Enumerated candidates
/// that end in a state already reached by an earlier enumerated candidate
/// are reported dead, since every extension of theirs repeats an extension
/// of the earlier one.
inline SolveResult ds_execute(const SearchProblem& problem, const Context& context, DpLibrary& library,
                              CandidateStream& stream, const SolveOptions& options = {}) {
  SolveStats stats;
  std::unordered_map<WorldState, std::size_t, WorldStateHash> seen{{context.start, 0}};
  std::vector<std::size_t> parts;
  std::vector<Action> actions;
  auto ref_name = [&](std::size_t i) { return library.at(i).name; };

  for (;;) {
    if (options.stop.stop_requested()) return SolveResult::failure(FailureReason::cancelled, stats);
    if (stats.expansions >= options.budget) return SolveResult::failure(FailureReason::budget, stats);
    auto candidate = stream.next();
    if (!candidate) return SolveResult::failure(FailureReason::no_candidates, stats);
    const bool enumerated = stream.last_was_enumerated();

    parts.clear();
    actions.clear();
    bool valid = !candidate->items.empty();
    for (const CandidateItem& item : candidate->items) {
      auto index = detail::resolve(library, item);
      if (!index) {
        valid = false;
        break;
      }
      parts.push_back(*index);
      const auto& body = library.at(*index).actions;
      actions.insert(actions.end(), body.begin(), body.end());
    }
    if (!valid) {
      ++stats.pruned;
      continue;
    }

    ++stats.expansions;
    ++stats.candidates;
    WorldState state = context.start;
    for (Action a : actions) apply(state, a, context.book);
    stats.primitive_steps += actions.size();
    const bool solved = goal_satisfied(context.start, state, problem.goal);

    if (options.trace)
      *options.trace << stats.candidates << ' ' << actions.size() << ' ' << (solved ? "complete" : "failed") << '\n';
    if (detail::should_report(options, stats.expansions))
      options.on_progress({stats.expansions, stats.candidates, describe(*candidate, ref_name)});

    if (solved) {
      SolveResult result;
      result.success = true;
      result.actions = actions;
      result.final_state = state;
      result.stats = stats;
      for (std::size_t i : parts) result.program.push_back(library.at(i).name);
      if (options.learn) {
        for (std::size_t i : parts)
          if (!library.at(i).primitive) library.touch(library.at(i).name);
        const DpProgram& only = library.at(parts.front());
        if (parts.size() == 1 && !only.primitive && only.hint == problem.hint) {
          result.stored = only.name;
        } else {
          std::string name = library.unique_name(problem.hint);
          library.define(name, result.program, problem.hint, problem.goal);
          result.stored = name;
        }
      }
      return result;
    }

    if (enumerated) {
      auto [it, inserted] = seen.try_emplace(state, candidate->size());
      if (!inserted && it->second <= candidate->size()) stream.mark_dead_prefix(candidate->size());
    }
  }
}

/// DS with the hint-similarity beam over the program library.
inline SolveResult ds_solve(const SearchProblem& problem, const Context& context, DpLibrary& library,
                            const Embedder& embedder, const ProposerParams& params, const SolveOptions& options = {}) {
  auto stream = outer_propose_distance(problem, library, embedder, params);
  return ds_execute(problem, context, library, *stream, options);
}

}  // namespace natprog
