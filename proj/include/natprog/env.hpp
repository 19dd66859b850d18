#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "natprog/items.hpp"

namespace natprog {

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

/// One environment action: move an item into the input slots, or craft.
/// `clear` returns slotted items to the inventory; it is a UI affordance and
/// not part of the 30-action planning space.
struct Action {
  enum class Kind : std::uint8_t { input, craft, clear };

  Kind kind = Kind::craft;
  ItemId item = ItemId::wood;  // meaningful for input only

  static constexpr Action input(ItemId item) { return Action{Kind::input, item}; }
  static constexpr Action craft() { return Action{Kind::craft, ItemId::wood}; }
  static constexpr Action clear() { return Action{Kind::clear, ItemId::wood}; }

  constexpr bool is_input() const { return kind == Kind::input; }

  friend constexpr bool operator==(const Action& a, const Action& b) {
    return a.kind == b.kind && (a.kind != Kind::input || a.item == b.item);
  }
  friend constexpr std::strong_ordering operator<=>(const Action& a, const Action& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (a.kind != Kind::input) return std::strong_ordering::equal;
    return a.item <=> b.item;
  }
};

inline constexpr std::size_t kPrimitiveActionCount = kItemCount + 1;

/// The planning action space: 29 input actions in item order, then craft.
inline constexpr std::array<Action, kPrimitiveActionCount> primitive_actions() {
  std::array<Action, kPrimitiveActionCount> out{};
  for (std::size_t i = 0; i < kItemCount; ++i) out[i] = Action::input(item_at(i));
  out[kItemCount] = Action::craft();
  return out;
}

inline std::string action_name(Action action) {
  switch (action.kind) {
    case Action::Kind::input:
      return "input_" + std::string(item_name(action.item));
    case Action::Kind::craft:
      return "craft";
    case Action::Kind::clear:
      return "clear";
  }
  return "?";
}

inline std::optional<Action> parse_action(std::string_view name) {
  if (name == "craft") return Action::craft();
  if (name == "clear") return Action::clear();
  constexpr std::string_view prefix = "input_";
  if (name.substr(0, prefix.size()) == prefix) {
    if (auto item = parse_item(name.substr(prefix.size()))) return Action::input(*item);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Recipes
// ---------------------------------------------------------------------------

/// A crafting rule. The input pair is unordered for matching; the declared
/// order is kept for display.
struct RecipeRule {
  ItemId output = ItemId::wood_plank;
  ItemId first = ItemId::wood;
  ItemId second = ItemId::wood;

  bool matches(ItemId a, ItemId b) const { return (a == first && b == second) || (a == second && b == first); }

  friend bool operator==(const RecipeRule&, const RecipeRule&) = default;
};

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two candidate rules per craftable item. Books pick one per item.
class RecipeCatalog {
 public:
  struct Entry {
    RecipeRule rule_a;
    RecipeRule rule_b;
  };

  RecipeCatalog() = default;

  void add(ItemId output, std::pair<ItemId, ItemId> rule_a, std::pair<ItemId, ItemId> rule_b) {
    if (is_raw(output)) throw CatalogError("raw material cannot be crafted: " + std::string(item_name(output)));
    if (entries_[index_of(output)])
      throw CatalogError("duplicate catalog entry: " + std::string(item_name(output)));
    entries_[index_of(output)] =
        Entry{RecipeRule{output, rule_a.first, rule_a.second}, RecipeRule{output, rule_b.first, rule_b.second}};
  }

  const std::optional<Entry>& entry(ItemId item) const { return entries_[index_of(item)]; }
  bool craftable(ItemId item) const { return entries_[index_of(item)].has_value(); }

  /// Craftable items in canonical item order.
  std::vector<ItemId> craftables() const {
    std::vector<ItemId> out;
    for (std::size_t i = 0; i < kItemCount; ++i)
      if (entries_[i]) out.push_back(item_at(i));
    return out;
  }

  std::size_t size() const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](auto& e) { return e.has_value(); }));
  }

  std::vector<RecipeRule> all_rules() const {
    std::vector<RecipeRule> out;
    for (auto& e : entries_) {
      if (!e) continue;
      out.push_back(e->rule_a);
      out.push_back(e->rule_b);
    }
    return out;
  }

  /// A global order in which both inputs of every rule precede its output.
  /// Empty when the union rule graph is cyclic.
  std::vector<ItemId> topological_order() const {
    std::array<int, kItemCount> indegree{};
    std::array<std::vector<std::size_t>, kItemCount> users;
    for (const RecipeRule& r : all_rules()) {
      for (ItemId in : {r.first, r.second}) {
        users[index_of(in)].push_back(index_of(r.output));
        ++indegree[index_of(r.output)];
      }
    }
    std::vector<ItemId> order;
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < kItemCount; ++i)
      if (indegree[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
      std::size_t i = ready.front();
      ready.erase(ready.begin());
      order.push_back(item_at(i));
      for (std::size_t u : users[i])
        if (--indegree[u] == 0) ready.push_back(u);
      std::sort(ready.begin(), ready.end());
    }
    if (order.size() != kItemCount) return {};
    return order;
  }

  /// Throws CatalogError if any structural invariant is broken: inputs must
  /// be raw or catalogued, input pairs must be distinct across all rules,
  /// and the rule graph must be acyclic.
  void validate() const {
    std::vector<std::pair<ItemId, ItemId>> pairs;
    for (const RecipeRule& r : all_rules()) {
      for (ItemId in : {r.first, r.second}) {
        if (!is_raw(in) && !craftable(in))
          throw CatalogError("rule for " + std::string(item_name(r.output)) + " uses uncraftable input " +
                             std::string(item_name(in)));
      }
      pairs.emplace_back(std::min(r.first, r.second), std::max(r.first, r.second));
    }
    std::sort(pairs.begin(), pairs.end());
    if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end())
      throw CatalogError("two rules share the same input pair");
    if (topological_order().empty()) throw CatalogError("catalog rules are cyclic");
  }

  friend bool operator==(const RecipeCatalog& a, const RecipeCatalog& b) {
    for (std::size_t i = 0; i < kItemCount; ++i) {
      const auto& x = a.entries_[i];
      const auto& y = b.entries_[i];
      if (x.has_value() != y.has_value()) return false;
      if (x && (x->rule_a != y->rule_a || x->rule_b != y->rule_b)) return false;
    }
    return true;
  }

 private:
  std::array<std::optional<Entry>, kItemCount> entries_{};
};

/// One rule choice per catalogued item; the generation-specific dynamics.
/// Holds the catalog by shared pointer so books stay cheap value types.
class RecipeBook {
 public:
  RecipeBook() = default;

  RecipeBook(std::shared_ptr<const RecipeCatalog> catalog, std::bitset<kItemCount> uses_rule_b)
      : catalog_(std::move(catalog)), choice_(uses_rule_b) {
    if (!catalog_) throw CatalogError("recipe book needs a catalog");
    lookup_.fill(kNoOutput);
    for (ItemId item : catalog_->craftables()) {
      RecipeRule rule = *active_rule(item);
      lookup_[pair_index(rule.first, rule.second)] = static_cast<std::int8_t>(index_of(item));
      lookup_[pair_index(rule.second, rule.first)] = static_cast<std::int8_t>(index_of(item));
    }
  }

  const RecipeCatalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const RecipeCatalog>& catalog_ptr() const { return catalog_; }
  const std::bitset<kItemCount>& choices() const { return choice_; }

  bool uses_rule_b(ItemId item) const { return choice_.test(index_of(item)); }

  std::optional<RecipeRule> active_rule(ItemId item) const {
    if (!catalog_) return std::nullopt;
    const auto& e = catalog_->entry(item);
    if (!e) return std::nullopt;
    return uses_rule_b(item) ? e->rule_b : e->rule_a;
  }

  /// Output of the active rule consuming {a, b}, if any.
  std::optional<ItemId> craft_output(ItemId a, ItemId b) const {
    if (!catalog_) return std::nullopt;
    std::int8_t out = lookup_[pair_index(a, b)];
    if (out == kNoOutput) return std::nullopt;
    return item_at(static_cast<std::size_t>(out));
  }

  /// Same catalog contents and same choices over catalogued items.
  friend bool operator==(const RecipeBook& a, const RecipeBook& b) {
    if (!a.catalog_ || !b.catalog_) return a.catalog_ == b.catalog_;
    return (a.catalog_ == b.catalog_ || *a.catalog_ == *b.catalog_) && a.choice_ == b.choice_;
  }

  /// Copy with one item's rule choice flipped.
  RecipeBook with_flipped(ItemId item) const {
    auto bits = choice_;
    bits.flip(index_of(item));
    return RecipeBook(catalog_, bits);
  }

 private:
  static constexpr std::int8_t kNoOutput = -1;
  static constexpr std::size_t pair_index(ItemId a, ItemId b) { return index_of(a) * kItemCount + index_of(b); }

  std::shared_ptr<const RecipeCatalog> catalog_;
  std::bitset<kItemCount> choice_;
  std::array<std::int8_t, kItemCount * kItemCount> lookup_{};
};

// ---------------------------------------------------------------------------
// State and dynamics
// ---------------------------------------------------------------------------

/// Inventory multiset, the two input slots, and a per-item count of copies
/// crafted since the state was created. The output slot is derived from the
/// slots and the active book (see `output_slot`).
struct WorldState {
  std::array<std::uint16_t, kItemCount> inventory{};
  std::array<ItemId, 2> slots{};
  std::uint8_t slot_count = 0;
  std::array<std::uint16_t, kItemCount> crafted{};

  std::uint16_t count(ItemId item) const { return inventory[index_of(item)]; }
  std::uint16_t crafted_count(ItemId item) const { return crafted[index_of(item)]; }

  std::span<const ItemId> slotted() const { return {slots.data(), slot_count}; }

  /// Inventory plus slotted items.
  std::size_t total_items() const {
    std::size_t n = slot_count;
    for (auto c : inventory) n += c;
    return n;
  }

  friend bool operator==(const WorldState& a, const WorldState& b) {
    if (a.slot_count != b.slot_count || a.inventory != b.inventory || a.crafted != b.crafted) return false;
    for (std::size_t i = 0; i < a.slot_count; ++i)
      if (a.slots[i] != b.slots[i]) return false;
    return true;
  }
};

struct WorldStateHash {
  std::size_t operator()(const WorldState& s) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    for (auto c : s.inventory) mix(c);
    for (auto c : s.crafted) mix(c);
    mix(s.slot_count);
    for (std::size_t i = 0; i < s.slot_count; ++i) mix(index_of(s.slots[i]) + 101);
    return static_cast<std::size_t>(h);
  }
};

/// A state holding `raw_count` of each raw material and nothing else.
inline WorldState starting_state(std::uint16_t raw_count = 20) {
  WorldState s;
  for (ItemId raw : kRawMaterials) s.inventory[index_of(raw)] = raw_count;
  return s;
}

/// Output slot content: the item the active book would produce from the
/// current two inputs.
inline std::optional<ItemId> output_slot(const WorldState& s, const RecipeBook& book) {
  if (s.slot_count != 2) return std::nullopt;
  return book.craft_output(s.slots[0], s.slots[1]);
}

enum class StepError : std::uint8_t { none, item_unavailable, slots_full, no_recipe_match };

inline std::string_view to_string(StepError e) {
  switch (e) {
    case StepError::none:
      return "none";
    case StepError::item_unavailable:
      return "ItemUnavailable";
    case StepError::slots_full:
      return "SlotsFull";
    case StepError::no_recipe_match:
      return "NoRecipeMatch";
  }
  return "?";
}

/// Applies `action` in place. On error the state is left untouched.
inline StepError apply(WorldState& s, Action action, const RecipeBook& book) {
  switch (action.kind) {
    case Action::Kind::input: {
      auto& n = s.inventory[index_of(action.item)];
      if (n == 0) return StepError::item_unavailable;
      if (s.slot_count >= 2) return StepError::slots_full;
      --n;
      s.slots[s.slot_count++] = action.item;
      return StepError::none;
    }
    case Action::Kind::craft: {
      auto out = output_slot(s, book);
      if (!out) return StepError::no_recipe_match;
      s.slot_count = 0;
      ++s.inventory[index_of(*out)];
      ++s.crafted[index_of(*out)];
      return StepError::none;
    }
    case Action::Kind::clear: {
      for (std::size_t i = 0; i < s.slot_count; ++i) ++s.inventory[index_of(s.slots[i])];
      s.slot_count = 0;
      return StepError::none;
    }
  }
  return StepError::none;
}

struct StepResult {
  WorldState state;
  StepError error = StepError::none;

  bool ok() const { return error == StepError::none; }
};

inline StepResult step(const WorldState& state, Action action, const RecipeBook& book) {
  StepResult r{state, StepError::none};
  r.error = apply(r.state, action, book);
  return r;
}

struct Context {
  Goal goal;
  WorldState start;
  RecipeBook book;
};

/// States visited by a run. `errors[i]` is the outcome of action i; failed
/// actions are recorded as no-ops.
struct Trajectory {
  std::vector<WorldState> states;
  std::vector<StepError> errors;

  const WorldState& front() const { return states.front(); }
  const WorldState& back() const { return states.back(); }
  bool had_error() const {
    return std::any_of(errors.begin(), errors.end(), [](StepError e) { return e != StepError::none; });
  }
};

inline Trajectory run(const WorldState& start, std::span<const Action> actions, const RecipeBook& book) {
  Trajectory t;
  t.states.reserve(actions.size() + 1);
  t.errors.reserve(actions.size());
  t.states.push_back(start);
  for (Action a : actions) {
    WorldState next = t.states.back();
    t.errors.push_back(apply(next, a, book));
    t.states.push_back(std::move(next));
  }
  return t;
}

inline Trajectory run(const Context& context, std::span<const Action> actions) {
  return run(context.start, actions, context.book);
}

/// Final state only; failed actions are skipped. Returns the number of
/// failed actions.
inline std::size_t execute(WorldState& state, std::span<const Action> actions, const RecipeBook& book) {
  std::size_t failures = 0;
  for (Action a : actions)
    if (apply(state, a, book) != StepError::none) ++failures;
  return failures;
}

inline bool goal_satisfied(const WorldState& first, const WorldState& last, const Goal& goal) {
  for (ItemId item : goal.items)
    if (last.crafted_count(item) <= first.crafted_count(item)) return false;
  return true;
}

inline bool goal_satisfied(const Trajectory& trajectory, const Goal& goal) {
  return goal_satisfied(trajectory.front(), trajectory.back(), goal);
}

/// Sum over listed goal items of copies crafted between the two states.
inline std::size_t reward(const WorldState& first, const WorldState& last, const Goal& goal) {
  std::size_t total = 0;
  for (ItemId item : goal.items) total += last.crafted_count(item) - first.crafted_count(item);
  return total;
}

inline std::size_t reward(const Trajectory& trajectory, const Goal& goal) {
  return reward(trajectory.front(), trajectory.back(), goal);
}

}  // namespace natprog
