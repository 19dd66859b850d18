#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <string>
#include <utility>
#include <vector>

#include "natprog/embedder.hpp"
#include "natprog/library.hpp"
#include "natprog/proposers.hpp"
#include "natprog/solve.hpp"

namespace natprog {

/// What a partial plan has done so far, oldest first once unrolled.
struct PlanEvent {
  enum class Kind { open, primitive, close };
  Kind kind = Kind::primitive;
  Action action{};
  SearchProblem head;
  WorldState entry;
};

/// A top-level candidate in the middle of being grounded. Remaining work is
/// a stack of primitives, holes (unexpanded sub-problems), frame closes and
/// already grounded holes; the executed prefix is summarized by the cached
/// state and an immutable event log shared with the plan's ancestors.
class PartialPlan {
  struct Node {
    PlanEvent event;
    std::shared_ptr<const Node> prev;
  };

 public:
  static constexpr std::size_t kNoInstance = static_cast<std::size_t>(-1);

  /// One finished grounding of a hole: its events from open to close and
  /// the state it leaves.
  struct Grounding {
    std::vector<PlanEvent> events;
    std::size_t primitives = 0;
    WorldState state;
  };

  struct Op {
    enum class Kind { primitive, hole, entry, close, grounded };
    Kind kind = Kind::primitive;
    Action action{};
    SearchProblem problem;
    std::shared_ptr<const Grounding> grounding;
    const Decomposition* decomposition = nullptr;  // entry
  };

  struct Frame {
    SearchProblem head;
    WorldState entry;
    std::size_t instance = kNoInstance;
    std::shared_ptr<const Node> log_at_open;
    std::size_t executed_at_open = 0;
  };

  PartialPlan(SearchProblem root, const WorldState& start, std::vector<Op> ops)
      : root_(std::move(root)), state_(start) {
    pending_.assign(ops.rbegin(), ops.rend());
  }

  static Op primitive(Action a) { return Op{Op::Kind::primitive, a, {}, {}}; }
  static Op hole(SearchProblem p) { return Op{Op::Kind::hole, {}, std::move(p), {}}; }
  /// A library entry used as is; `d` must outlive the plan.
  static Op entry(const Decomposition& d) { return Op{Op::Kind::entry, {}, d.head, {}, &d}; }

  /// Replaces the leftmost hole (which must be next) by `d`'s steps and
  /// opens a frame for it at the current state. `instance` tags the frame
  /// for the caller's bookkeeping.
  void expand(const Decomposition& d, std::size_t instance = kNoInstance) {
    Op h = std::move(pending_.back());
    pending_.pop_back();
    pending_.push_back(Op{Op::Kind::close, {}, {}, {}, nullptr});
    for (auto it = d.steps.rbegin(); it != d.steps.rend(); ++it) {
      if (const auto* a = std::get_if<Action>(&*it))
        pending_.push_back(primitive(*a));
      else
        pending_.push_back(hole(std::get<SearchProblem>(*it)));
    }
    frames_.push_back({h.problem, state_, instance, log_, executed_});
    log({PlanEvent::Kind::open, {}, h.problem, state_});
  }

  /// Replaces the leftmost hole (which must be next) by a grounding found
  /// for the same hole in the same state.
  void ground(std::shared_ptr<const Grounding> g) {
    pending_.back() = Op{Op::Kind::grounded, {}, {}, std::move(g), nullptr};
  }

  /// Replaces the remaining root items of a plan sitting between two root
  /// items (no open frames).
  void set_root_items(const std::vector<Op>& ops) { pending_.assign(ops.rbegin(), ops.rend()); }

  /// Goals of the root and of every open frame, outermost first.
  CallStack call_stack() const {
    CallStack s;
    s.goals.push_back(root_.goal);
    for (const Frame& f : frames_) s.goals.push_back(f.head.goal);
    return s;
  }

  std::vector<PlanEvent> events() const {
    std::vector<PlanEvent> out;
    for (const Node* n = log_.get(); n; n = n->prev.get()) out.push_back(n->event);
    return {out.rbegin(), out.rend()};
  }

  /// The grounded tree for the executed events. Only meaningful once the
  /// plan is complete.
  PlanTree tree(const WorldState& start) const {
    std::vector<PlanTree> open;
    open.push_back(PlanTree::node(root_, {}, start));
    for (const PlanEvent& e : events()) {
      switch (e.kind) {
        case PlanEvent::Kind::open:
          open.push_back(PlanTree::node(e.head, {}, e.entry));
          break;
        case PlanEvent::Kind::primitive:
          open.back().children.push_back(PlanTree::leaf(e.action));
          break;
        case PlanEvent::Kind::close: {
          PlanTree done = std::move(open.back());
          open.pop_back();
          open.back().children.push_back(std::move(done));
          break;
        }
      }
    }
    return std::move(open.front());
  }

  /// The innermost open frame; requires one.
  const Frame& innermost_frame() const { return frames_.back(); }

  /// The innermost frame's grounding as if it closed now.
  Grounding closing_grounding() const {
    const Frame& f = frames_.back();
    Grounding g;
    for (const Node* n = log_.get(); n != f.log_at_open.get(); n = n->prev.get()) g.events.push_back(n->event);
    std::reverse(g.events.begin(), g.events.end());
    g.events.push_back({PlanEvent::Kind::close, {}, {}, {}});
    g.primitives = executed_ - f.executed_at_open;
    g.state = state_;
    return g;
  }

  const SearchProblem& root() const { return root_; }
  const WorldState& state() const { return state_; }
  std::size_t executed() const { return executed_; }
  std::size_t root_done() const { return root_done_; }
  std::size_t depth() const { return frames_.size(); }
  bool finished() const { return pending_.empty(); }

 private:
  friend struct PartialEvalAccess;

  void log(PlanEvent e) { log_ = std::make_shared<const Node>(Node{std::move(e), log_}); }

  SearchProblem root_;
  WorldState state_;
  std::vector<Op> pending_;
  std::vector<Frame> frames_;
  std::shared_ptr<const Node> log_;
  std::size_t executed_ = 0;
  std::size_t root_done_ = 0;
};

struct PartialEvalOutcome {
  enum class Kind { complete, suspended, errored };
  Kind kind = Kind::complete;
  SearchProblem unexpanded;  // suspended
  WorldState resumed_state;  // suspended
  std::string reason;        // errored
  bool dropped = false;      // errored by a hook rather than a failed goal

  bool complete() const { return kind == Kind::complete; }
  bool suspended() const { return kind == Kind::suspended; }
  bool errored() const { return kind == Kind::errored; }
};

/// Optional callbacks into partial evaluation. Returning false abandons the
/// plan.
struct EvalHooks {
  // After each root item is finished.
  std::function<bool(const PartialPlan&)> root_item_done;
  // When a frame's goal has been checked, before the frame is closed.
  std::function<bool(const PartialPlan&)> frame_closing;
};

struct PartialEvalAccess {
  static PartialEvalOutcome run(PartialPlan& p, const Context& context, bool cache, SolveStats& stats,
                                const EvalHooks* hooks) {
    auto dropped = [](std::string reason) {
      PartialEvalOutcome o{PartialEvalOutcome::Kind::errored, {}, {}, std::move(reason)};
      o.dropped = true;
      return o;
    };
    auto finish_root_item = [&]() -> bool {
      ++p.root_done_;
      return !hooks || !hooks->root_item_done || hooks->root_item_done(p);
    };
    if (cache) {
      stats.cache_hits += p.executed_;
    } else {
      WorldState s = context.start;
      for (const PlanEvent& e : p.events())
        if (e.kind == PlanEvent::Kind::primitive) apply(s, e.action, context.book);
      stats.primitive_steps += p.executed_;
      p.state_ = s;
    }
    while (!p.pending_.empty()) {
      PartialPlan::Op& op = p.pending_.back();
      switch (op.kind) {
        case PartialPlan::Op::Kind::primitive: {
          ++stats.primitive_steps;
          // A failing primitive is a no-op, as in run().
          apply(p.state_, op.action, context.book);
          Action a = op.action;
          p.pending_.pop_back();
          p.log({PlanEvent::Kind::primitive, a, {}, {}});
          ++p.executed_;
          if (p.frames_.empty() && !finish_root_item()) return dropped("state already explored");
          break;
        }
        case PartialPlan::Op::Kind::close: {
          const PartialPlan::Frame& f = p.frames_.back();
          if (!goal_satisfied(f.entry, p.state_, f.head.goal))
            return {PartialEvalOutcome::Kind::errored, {}, {}, "sub-goal " + to_string(f.head.goal) + " not met"};
          if (hooks && hooks->frame_closing && !hooks->frame_closing(p)) return dropped("grounding already explored");
          p.frames_.pop_back();
          p.pending_.pop_back();
          p.log({PlanEvent::Kind::close, {}, {}, {}});
          if (p.frames_.empty() && !finish_root_item()) return dropped("state already explored");
          break;
        }
        case PartialPlan::Op::Kind::grounded: {
          std::shared_ptr<const PartialPlan::Grounding> g = std::move(op.grounding);
          p.pending_.pop_back();
          for (const PlanEvent& e : g->events) p.log(e);
          p.executed_ += g->primitives;
          stats.cache_hits += g->primitives;
          p.state_ = g->state;
          if (p.frames_.empty() && !finish_root_item()) return dropped("state already explored");
          break;
        }
        case PartialPlan::Op::Kind::entry:
          p.expand(*op.decomposition);
          break;
        case PartialPlan::Op::Kind::hole:
          return {PartialEvalOutcome::Kind::suspended, op.problem, p.state_, {}};
      }
    }
    return {};
  }
};

/// Resumes `plan` from its cached prefix (or, with `cache` off, from a full
/// replay of its executed primitives) and runs until the leftmost hole, the
/// end of the plan, or a frame whose goal is not met. Failing primitives are
/// no-ops.
inline PartialEvalOutcome partial_eval(PartialPlan& plan, const Context& context, bool cache, SolveStats& stats,
                                       const EvalHooks* hooks = nullptr) {
  return PartialEvalAccess::run(plan, context, cache, stats, hooks);
}

/// Inlines direct children of the root that solve the root's own goal, so
/// the root decomposition never refers to itself.
inline PlanTree splice_root(PlanTree tree) {
  std::vector<PlanTree> children;
  for (PlanTree& c : tree.children) {
    if (!c.is_primitive() && c.head.goal == tree.head.goal) {
      for (PlanTree& g : c.children) children.push_back(std::move(g));
    } else {
      children.push_back(std::move(c));
    }
  }
  tree.children = std::move(children);
  return tree;
}

inline std::vector<PartialPlan::Op> root_ops(std::span<const CandidateItem> items, const Library& library) {
  std::vector<PartialPlan::Op> ops;
  ops.reserve(items.size());
  for (const CandidateItem& item : items) {
    if (const auto* r = std::get_if<LibraryRef>(&item))
      ops.push_back(PartialPlan::entry(library.at(r->index).decomposition));
    else if (const auto* a = std::get_if<Action>(&item))
      ops.push_back(PartialPlan::primitive(*a));
    else
      ops.push_back(PartialPlan::hole(std::get<SearchProblem>(item)));
  }
  return ops;
}

inline PartialPlan plan_for(const SearchProblem& problem, const CandidateSequence& candidate, const Library& library,
                            const WorldState& start) {
  return PartialPlan(problem, start, root_ops(candidate.items, library));
}

namespace detail {

inline std::string hole_key(const Goal& goal, const WorldState& state, const CallStack& stack) {
  std::string k;
  auto put = [&k](std::uint64_t v) { k.append(reinterpret_cast<const char*>(&v), sizeof v); };
  auto put_goal = [&](const Goal& g) {
    put(g.size());
    for (ItemId i : g.items) put(index_of(i));
  };
  put_goal(goal);
  for (auto c : state.inventory) put(c);
  for (auto c : state.crafted) put(c);
  put(state.slot_count);
  for (ItemId i : state.slotted()) put(index_of(i));
  put(stack.goals.size());
  for (const Goal& g : stack.goals) put_goal(g);
  return k;
}

}  // namespace detail

/// Natural-program execution. Each outer candidate becomes the root's
/// children; its holes are grounded by depth-first search over inner_propose
/// decompositions (best first). The first complete plan meeting the goal is
/// returned and, with `options.learn`, its decompositions are added to the
/// library. One budget unit per partial_eval call.
///
/// The search avoids repeating itself:
///  - A hole's groundings depend only on its goal, the state and the call
///    stack. Once every grounding of a hole has been tried, later holes with
///    the same key are replaced directly by the distinct end states found.
///    Groundings of one hole ending in the same state are merged.
///  - When no plan for an enumerated candidate gets past root item k, every
///    candidate sharing its first k+1 items is reported dead to the stream.
///  - A plan that finishes root item k in state S is abandoned if an earlier
///    plan reached S after fewer root items, or after k root items through a
///    lexicographically smaller prefix of beam positions: the rest of it is
///    then part of an earlier candidate. Plans of one candidate meeting at
///    the same position are merged the same way.
///  - With `options.cache`, the plans that finish a candidate's first k items
///    are kept and later candidates with the same first k items resume from
///    them instead of searching that prefix again.
inline SolveResult np_execute(const SearchProblem& problem, const Context& context, Library& library,
                              CandidateStream& stream, const ProposerParams& params, const SolveOptions& options = {}) {
  SolveStats stats;
  std::size_t plan_id = 0;
  auto ref_name = [&](std::size_t i) {
    const LibraryEntry& e = library.at(i);
    return e.hint().empty() ? to_string(e.goal()) : e.hint();
  };

  using Positions = std::vector<std::size_t>;
  struct Seen {
    Positions prefix;  // beam positions of the root items done
    std::size_t candidate = 0;
  };
  std::unordered_map<WorldState, Seen, WorldStateHash> seen{{context.start, {}}};
  std::map<Positions, std::vector<PartialPlan>> prefix_plans;
  std::map<std::size_t, std::vector<PartialPlan>> reached;
  const Positions* positions = nullptr;
  std::size_t resume_from = 0;

  using GroundingPtr = std::shared_ptr<const PartialPlan::Grounding>;
  struct Instance {
    std::string key;
    std::vector<GroundingPtr> groundings;
    std::unordered_set<WorldState, WorldStateHash> ends;
  };
  std::vector<Instance> instances;
  std::unordered_set<std::string> in_progress;
  std::unordered_map<std::string, std::vector<GroundingPtr>> grounded;

  EvalHooks hooks;
  hooks.root_item_done = [&](const PartialPlan& plan) {
    if (!positions) return true;
    const std::size_t k = plan.root_done();
    Positions prefix(positions->begin(), positions->begin() + static_cast<std::ptrdiff_t>(k));
    auto [it, inserted] = seen.try_emplace(plan.state(), Seen{prefix, stats.candidates});
    if (!inserted) {
      Seen& old = it->second;
      const bool earlier = old.prefix.size() < k || (old.prefix.size() == k && old.prefix < prefix);
      if (earlier || (old.prefix == prefix && old.candidate == stats.candidates)) {
        ++stats.pruned;
        return false;
      }
      old.prefix = std::move(prefix);
      old.candidate = stats.candidates;
    }
    if (options.cache && k > resume_from && k < params.max_len) reached[k].push_back(plan);
    return true;
  };
  hooks.frame_closing = [&](const PartialPlan& plan) {
    const std::size_t id = plan.innermost_frame().instance;
    if (id == PartialPlan::kNoInstance) return true;
    Instance& in = instances[id];
    if (!in.ends.insert(plan.state()).second) {
      ++stats.pruned;
      return false;
    }
    in.groundings.push_back(std::make_shared<const PartialPlan::Grounding>(plan.closing_grounding()));
    return true;
  };

  // A frontier entry is a plan, or a marker that every plan below it in
  // the hole's subtree has been searched.
  struct Work {
    std::optional<PartialPlan> plan;
    std::size_t finished = PartialPlan::kNoInstance;
  };

  for (;;) {
    if (options.stop.stop_requested()) return SolveResult::failure(FailureReason::cancelled, stats);
    if (stats.expansions >= options.budget) return SolveResult::failure(FailureReason::budget, stats);
    auto candidate = stream.next();
    if (!candidate) return SolveResult::failure(FailureReason::no_candidates, stats);
    if (candidate->items.empty()) continue;
    const bool enumerated = stream.last_was_enumerated();
    positions = enumerated ? stream.last_positions() : nullptr;
    ++stats.candidates;
    if (detail::should_report(options, stats.candidates))
      options.on_progress({stats.expansions, stats.candidates, describe(*candidate, ref_name)});

    std::vector<Work> frontier;
    resume_from = 0;
    reached.clear();
    if (positions && options.cache) {
      for (std::size_t k = candidate->size() - 1; k >= 1; --k) {
        auto it = prefix_plans.find(Positions(positions->begin(), positions->begin() + static_cast<std::ptrdiff_t>(k)));
        if (it == prefix_plans.end()) continue;
        auto rest = root_ops(std::span(candidate->items).subspan(k), library);
        for (auto p = it->second.rbegin(); p != it->second.rend(); ++p) {
          frontier.push_back({*p});
          frontier.back().plan->set_root_items(rest);
        }
        resume_from = k;
        ++stats.cache_hits;
        break;
      }
    }
    if (resume_from == 0) frontier.push_back({plan_for(problem, *candidate, library, context.start)});

    std::size_t furthest = resume_from;
    while (!frontier.empty()) {
      if (options.stop.stop_requested()) return SolveResult::failure(FailureReason::cancelled, stats);
      if (stats.expansions >= options.budget) return SolveResult::failure(FailureReason::budget, stats);
      Work work = std::move(frontier.back());
      frontier.pop_back();
      if (!work.plan) {
        Instance& in = instances[work.finished];
        in_progress.erase(in.key);
        grounded.emplace(in.key, std::move(in.groundings));
        continue;
      }
      PartialPlan plan = std::move(*work.plan);
      ++stats.expansions;
      ++plan_id;
      PartialEvalOutcome out = partial_eval(plan, context, options.cache, stats, &hooks);
      // A plan dropped at a root boundary proves nothing about the item it
      // just finished.
      const bool dropped_at_root = out.errored() && out.dropped && plan.depth() == 0;
      furthest = std::max(furthest, plan.root_done() - (dropped_at_root ? 1 : 0));

      if (options.trace) {
        *options.trace << plan_id << ' ' << plan.executed() << ' ';
        if (out.suspended())
          *options.trace << "suspended " << to_string(out.unexpanded.goal);
        else if (out.errored())
          *options.trace << "errored " << out.reason;
        else
          *options.trace << "complete";
        *options.trace << '\n';
      }

      if (out.complete()) {
        if (!goal_satisfied(context.start, plan.state(), problem.goal)) continue;
        SolveResult result;
        result.success = true;
        result.plan = splice_root(plan.tree(context.start));
        result.actions = flatten(*result.plan);
        result.final_state = plan.state();
        result.stats = stats;
        if (options.learn) learn_from_tree(library, *result.plan);
        return result;
      }
      if (out.errored()) continue;

      CallStack stack = plan.call_stack();
      std::string key = detail::hole_key(out.unexpanded.goal, plan.state(), stack);
      if (auto it = grounded.find(key); it != grounded.end()) {
        for (auto g = it->second.rbegin(); g != it->second.rend(); ++g) {
          PartialPlan child = plan;
          child.ground(*g);
          frontier.push_back({std::move(child)});
        }
        continue;
      }
      std::size_t instance = PartialPlan::kNoInstance;
      if (in_progress.insert(key).second) {
        instance = instances.size();
        instances.push_back({std::move(key), {}, {}});
        frontier.push_back({std::nullopt, instance});
      }
      auto ranked = inner_propose(stack, out.unexpanded, library, params);
      for (auto it = ranked.rbegin(); it != ranked.rend(); ++it) {
        PartialPlan child = plan;
        child.expand(it->entry->decomposition, instance);
        frontier.push_back({std::move(child)});
      }
    }
    if (enumerated && furthest < candidate->size()) stream.mark_dead_prefix(furthest + 1);
    if (positions) {
      for (auto& [k, plans] : reached)
        prefix_plans.emplace(Positions(positions->begin(), positions->begin() + static_cast<std::ptrdiff_t>(k)),
                             std::move(plans));
    }
  }
}

/// NP with the hint-similarity beam over the library.
inline SolveResult np_solve(const SearchProblem& problem, const Context& context, Library& library,
                            const Embedder& embedder, const ProposerParams& params, const SolveOptions& options = {}) {
  auto stream = outer_propose_distance(problem, library, embedder, params);
  return np_execute(problem, context, library, *stream, params, options);
}

}  // namespace natprog
