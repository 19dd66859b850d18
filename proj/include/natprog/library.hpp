#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "natprog/env.hpp"
#include "natprog/params.hpp"

namespace natprog {

/// A goal plus a free-text hint on how it might decompose.
struct SearchProblem {
  Goal goal;
  std::string hint;

  friend bool operator==(const SearchProblem&, const SearchProblem&) = default;
  friend auto operator<=>(const SearchProblem&, const SearchProblem&) = default;
};

using Step = std::variant<Action, SearchProblem>;

/// One height-2 expansion: a search problem mapped to primitives and bare
/// sub-problems.
struct Decomposition {
  SearchProblem head;
  std::vector<Step> steps;

  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

/// A grounded search tree. Leaves carry `primitive`; internal nodes carry a
/// head problem and the state they started executing from.
struct PlanTree {
  SearchProblem head;
  WorldState entry_state;
  std::optional<Action> primitive;
  std::vector<PlanTree> children;

  static PlanTree leaf(Action a) {
    PlanTree t;
    t.primitive = a;
    return t;
  }
  static PlanTree node(SearchProblem head, std::vector<PlanTree> children, WorldState entry = {}) {
    PlanTree t;
    t.head = std::move(head);
    t.children = std::move(children);
    t.entry_state = entry;
    return t;
  }

  bool is_primitive() const { return primitive.has_value(); }
};

inline void flatten_into(const PlanTree& tree, std::vector<Action>& out) {
  if (tree.is_primitive()) {
    out.push_back(*tree.primitive);
    return;
  }
  for (const PlanTree& c : tree.children) flatten_into(c, out);
}

/// Primitive leaves in left-to-right order.
inline std::vector<Action> flatten(const PlanTree& tree) {
  std::vector<Action> out;
  flatten_into(tree, out);
  return out;
}

/// The height-2 decomposition at an internal node: its head and, per child,
/// the child's primitive or the child's head problem.
inline Decomposition decomposition_at(const PlanTree& node) {
  Decomposition d{node.head, {}};
  d.steps.reserve(node.children.size());
  for (const PlanTree& c : node.children) {
    if (c.is_primitive())
      d.steps.emplace_back(*c.primitive);
    else
      d.steps.emplace_back(c.head);
  }
  return d;
}

/// Every internal node's decomposition, in pre-order.
inline std::vector<Decomposition> extract_decompositions(const PlanTree& tree) {
  std::vector<Decomposition> out;
  std::vector<const PlanTree*> todo{&tree};
  while (!todo.empty()) {
    const PlanTree* n = todo.back();
    todo.pop_back();
    if (n->is_primitive()) continue;
    out.push_back(decomposition_at(*n));
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) todo.push_back(&*it);
  }
  return out;
}

struct LibraryEntry {
  Decomposition decomposition;
  std::uint32_t occurrence_count = 1;
  std::int64_t insertion_tick = 0;
  std::int64_t last_used_tick = 0;

  const Goal& goal() const { return decomposition.head.goal; }
  const std::string& hint() const { return decomposition.head.hint; }

  friend bool operator==(const LibraryEntry&, const LibraryEntry&) = default;
};

/// Goals currently under expansion, outermost first.
struct CallStack {
  std::vector<Goal> goals;

  bool contains(const Goal& g) const { return std::find(goals.begin(), goals.end(), g) != goals.end(); }
};

/// Occurrence-counted store of decompositions indexed by goal. Identity is
/// (head goal, steps) where sub-problem steps compare by goal only; the
/// most recent hints are kept for display.
class Library {
 public:
  using StepKey = std::variant<Action, Goal>;
  using Identity = std::pair<Goal, std::vector<StepKey>>;

  static Identity identity_of(const Decomposition& d) {
    Identity id{d.head.goal, {}};
    id.second.reserve(d.steps.size());
    for (const Step& s : d.steps) {
      if (const auto* a = std::get_if<Action>(&s))
        id.second.emplace_back(*a);
      else
        id.second.emplace_back(std::get<SearchProblem>(s).goal);
    }
    return id;
  }

  /// Inserts or merges; advances the tick once. Returns the entry index.
  std::size_t add(const Decomposition& d) {
    ++tick_;
    Identity id = identity_of(d);
    if (auto it = by_identity_.find(id); it != by_identity_.end()) {
      LibraryEntry& e = entries_[it->second];
      ++e.occurrence_count;
      e.last_used_tick = tick_;
      e.decomposition = d;
      return it->second;
    }
    std::size_t index = entries_.size();
    entries_.push_back(LibraryEntry{d, 1, tick_, tick_});
    by_identity_.emplace(std::move(id), index);
    by_goal_[d.head.goal].push_back(index);
    return index;
  }

  /// Rebuilds a library from stored entries (deserialization).
  static Library restore(std::vector<LibraryEntry> entries, std::int64_t tick) {
    Library lib;
    lib.tick_ = tick;
    for (auto& e : entries) {
      std::size_t index = lib.entries_.size();
      Identity id = identity_of(e.decomposition);
      if (!lib.by_identity_.emplace(id, index).second)
        throw std::invalid_argument("duplicate library entry identity");
      lib.by_goal_[e.goal()].push_back(index);
      lib.entries_.push_back(std::move(e));
    }
    return lib;
  }

  const std::vector<LibraryEntry>& entries() const { return entries_; }
  const LibraryEntry& at(std::size_t index) const { return entries_.at(index); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::int64_t tick() const { return tick_; }

  std::span<const std::size_t> indices_for(const Goal& goal) const {
    auto it = by_goal_.find(goal);
    if (it == by_goal_.end()) return {};
    return it->second;
  }

  std::optional<std::size_t> find(const Decomposition& d) const {
    auto it = by_identity_.find(identity_of(d));
    if (it == by_identity_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Library& a, const Library& b) { return a.tick_ == b.tick_ && a.entries_ == b.entries_; }

 private:
  std::vector<LibraryEntry> entries_;
  std::map<Identity, std::size_t> by_identity_;
  std::map<Goal, std::vector<std::size_t>> by_goal_;
  std::int64_t tick_ = 0;
};

/// Inserts every decomposition of a successful tree in pre-order.
inline void learn_from_tree(Library& library, const PlanTree& tree) {
  for (const Decomposition& d : extract_decompositions(tree)) library.add(d);
}

/// Entries whose head goal equals `goal`, in insertion order. Hints are not
/// part of the lookup.
inline std::vector<const LibraryEntry*> get_decompositions(const Library& library, const Goal& goal) {
  std::vector<const LibraryEntry*> out;
  for (std::size_t i : library.indices_for(goal)) out.push_back(&library.at(i));
  return out;
}

/// Occurrence count over the largest count among the candidates.
inline double frequency_score(const LibraryEntry& entry, std::span<const LibraryEntry* const> candidates) {
  std::uint32_t top = 0;
  for (const LibraryEntry* c : candidates) top = std::max(top, c->occurrence_count);
  if (top == 0) return 1.0;
  return static_cast<double>(entry.occurrence_count) / static_cast<double>(top);
}

/// Linear map of last_used_tick from the oldest (0) to the newest (1)
/// candidate. A degenerate range maps to 1.
inline double recency_score(const LibraryEntry& entry, std::span<const LibraryEntry* const> candidates) {
  std::int64_t lo = entry.last_used_tick, hi = entry.last_used_tick;
  for (const LibraryEntry* c : candidates) {
    lo = std::min(lo, c->last_used_tick);
    hi = std::max(hi, c->last_used_tick);
  }
  if (hi == lo) return 1.0;
  return static_cast<double>(entry.last_used_tick - lo) / static_cast<double>(hi - lo);
}

inline bool introduces_goal_on_stack(const Decomposition& d, const CallStack& stack, const Goal& own_goal) {
  for (const Step& s : d.steps) {
    if (const auto* p = std::get_if<SearchProblem>(&s)) {
      if (p->goal == own_goal || stack.contains(p->goal)) return true;
    }
  }
  return false;
}

struct RankedDecomposition {
  const LibraryEntry* entry = nullptr;
  double score = 0.0;
};

/// Known decompositions of `problem.goal`, minus those that would re-enter a
/// goal on the call stack (or the problem's own goal), ranked by
/// frequency_weight * frequency + recency_weight * recency. Ties go to the
/// more recently used entry, then to the earlier inserted one.
inline std::vector<RankedDecomposition> inner_propose(const CallStack& stack, const SearchProblem& problem,
                                                      const Library& library, const ProposerParams& params) {
  std::vector<const LibraryEntry*> candidates;
  for (const LibraryEntry* e : get_decompositions(library, problem.goal))
    if (!introduces_goal_on_stack(e->decomposition, stack, problem.goal)) candidates.push_back(e);

  std::vector<RankedDecomposition> ranked;
  ranked.reserve(candidates.size());
  for (const LibraryEntry* e : candidates) {
    double score = params.recency_weight * recency_score(*e, candidates) +
                   params.frequency_weight * frequency_score(*e, candidates);
    ranked.push_back({e, score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedDecomposition& a, const RankedDecomposition& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.entry->last_used_tick != b.entry->last_used_tick) return a.entry->last_used_tick > b.entry->last_used_tick;
    return a.entry->insertion_tick < b.entry->insertion_tick;
  });
  return ranked;
}

}  // namespace natprog
