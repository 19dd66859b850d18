#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "natprog/env.hpp"
#include "natprog/rng.hpp"

namespace natprog {

/// The built-in 25-item catalog. Rule A is the first rule listed.
inline RecipeCatalog default_catalog() {
  using I = ItemId;
  RecipeCatalog c;
  c.add(I::wood_plank, {I::wood, I::wood}, {I::wood, I::stone});
  c.add(I::wood_stick, {I::wood, I::wood_plank}, {I::wood_plank, I::wood_plank});
  c.add(I::string, {I::wool, I::wool}, {I::wool, I::wood_stick});
  c.add(I::paper, {I::grass, I::grass}, {I::wood_plank, I::grass});
  c.add(I::pickaxe, {I::wood_stick, I::stone}, {I::wood_stick, I::wood_stick});
  c.add(I::cloth, {I::string, I::string}, {I::wool, I::string});
  c.add(I::sand, {I::stone, I::stone}, {I::stone, I::pickaxe});
  c.add(I::fire, {I::wood, I::paper}, {I::wood_plank, I::wood_stick});
  c.add(I::stone_mill, {I::stone, I::wood_plank}, {I::pickaxe, I::wood_plank});
  c.add(I::flour, {I::grass, I::stone_mill}, {I::grass, I::pickaxe});
  c.add(I::clay, {I::sand, I::pickaxe}, {I::sand, I::grass});
  c.add(I::brick, {I::clay, I::clay}, {I::sand, I::fire});
  c.add(I::glass, {I::sand, I::sand}, {I::clay, I::fire});
  c.add(I::oven, {I::brick, I::stone}, {I::brick, I::fire});
  c.add(I::bread, {I::flour, I::oven}, {I::flour, I::fire});
  c.add(I::book, {I::paper, I::string}, {I::paper, I::cloth});
  c.add(I::iron, {I::stone, I::fire}, {I::sand, I::stone});
  c.add(I::gear, {I::iron, I::iron}, {I::iron, I::wood_stick});
  c.add(I::wire, {I::iron, I::string}, {I::iron, I::paper});
  c.add(I::clock, {I::gear, I::wire}, {I::gear, I::book});
  c.add(I::light_bulb, {I::glass, I::wire}, {I::glass, I::iron});
  c.add(I::bed, {I::cloth, I::wood_plank}, {I::wool, I::wood_plank});
  c.add(I::pinwheel, {I::paper, I::wood_stick}, {I::cloth, I::wood_stick});
  c.add(I::hut, {I::string, I::grass}, {I::wood_stick, I::grass});
  c.add(I::house, {I::brick, I::glass}, {I::brick, I::wood_plank});
  return c;
}

/// Six craftable items; small enough for exhaustive fixtures.
inline RecipeCatalog tiny_catalog() {
  using I = ItemId;
  RecipeCatalog c;
  c.add(I::wood_plank, {I::wood, I::wood}, {I::wood, I::stone});
  c.add(I::wood_stick, {I::wood, I::wood_plank}, {I::wood_plank, I::wood_plank});
  c.add(I::string, {I::wool, I::wool}, {I::wool, I::wood_stick});
  c.add(I::paper, {I::grass, I::grass}, {I::wood_plank, I::grass});
  c.add(I::hut, {I::string, I::grass}, {I::wood_stick, I::grass});
  c.add(I::pinwheel, {I::paper, I::wood_stick}, {I::wood_stick, I::string});
  return c;
}

inline std::shared_ptr<const RecipeCatalog> share(RecipeCatalog catalog) {
  return std::make_shared<const RecipeCatalog>(std::move(catalog));
}

/// Each catalogued item independently uses rule B with probability `r`.
/// Items are visited in canonical order with one draw each.
inline RecipeBook generate_book(std::shared_ptr<const RecipeCatalog> catalog, std::uint64_t seed, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rule-B probability must lie in [0, 1]");
  Rng rng(derive_seed(seed, {0xB00Cu}));
  std::bitset<kItemCount> bits;
  for (ItemId item : catalog->craftables()) bits.set(index_of(item), uniform01(rng) < r);
  return RecipeBook(std::move(catalog), bits);
}

inline RecipeBook rule_a_book(std::shared_ptr<const RecipeCatalog> catalog) {
  return RecipeBook(std::move(catalog), {});
}

/// Craftable items that are an input to no rule of the catalog.
inline std::vector<ItemId> leaf_items(const RecipeCatalog& catalog) {
  std::array<bool, kItemCount> used{};
  for (const RecipeRule& r : catalog.all_rules()) {
    used[index_of(r.first)] = true;
    used[index_of(r.second)] = true;
  }
  std::vector<ItemId> out;
  for (ItemId item : catalog.craftables())
    if (!used[index_of(item)]) out.push_back(item);
  return out;
}

/// Fewest primitive actions that craft one `item` from raw materials under
/// `book`. Crafting consumes inputs, so nothing is shared between branches.
inline std::size_t min_craft_actions(const RecipeBook& book, ItemId item) {
  std::array<std::size_t, kItemCount> cost{};
  for (ItemId i : book.catalog().topological_order()) {
    if (is_raw(i) || !book.catalog().craftable(i)) continue;
    RecipeRule r = *book.active_rule(i);
    cost[index_of(i)] = cost[index_of(r.first)] + cost[index_of(r.second)] + 3;
  }
  return cost[index_of(item)];
}

/// Raw materials consumed by the cheapest crafting tree of `item`.
inline std::array<std::size_t, kItemCount> raw_requirements(const RecipeBook& book, ItemId item) {
  std::array<std::size_t, kItemCount> need{};
  std::vector<ItemId> todo{item};
  while (!todo.empty()) {
    ItemId i = todo.back();
    todo.pop_back();
    if (is_raw(i)) {
      ++need[index_of(i)];
      continue;
    }
    RecipeRule r = *book.active_rule(i);
    todo.push_back(r.first);
    todo.push_back(r.second);
  }
  return need;
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<ItemId> craftables_by_name(const RecipeCatalog& catalog) {
  auto items = catalog.craftables();
  std::sort(items.begin(), items.end(), [](ItemId a, ItemId b) { return item_name(a) < item_name(b); });
  return items;
}

inline std::string rule_inputs(const RecipeRule& r) {
  return std::string(item_name(r.first)) + " + " + std::string(item_name(r.second));
}

}  // namespace detail

/// `item = inA + inB | inC + inD`, one line per item, sorted by item name.
inline std::string format_catalog(const RecipeCatalog& catalog) {
  std::ostringstream out;
  for (ItemId item : detail::craftables_by_name(catalog)) {
    const auto& e = *catalog.entry(item);
    out << item_name(item) << " = " << detail::rule_inputs(e.rule_a) << " | " << detail::rule_inputs(e.rule_b)
        << "\n";
  }
  return out.str();
}

inline RecipeCatalog parse_catalog(std::string_view text) {
  RecipeCatalog catalog;
  std::size_t line_no = 0;
  for (std::string_view raw_line : detail::split(text, '\n')) {
    ++line_no;
    std::string_view line = detail::trim(raw_line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'item = a + b | c + d'");
    auto output = parse_item(detail::trim(line.substr(0, eq)));
    if (!output) throw ParseError(line_no, "unknown item");
    auto alternatives = detail::split(line.substr(eq + 1), '|');
    if (alternatives.size() != 2) throw ParseError(line_no, "expected exactly two rules");
    std::pair<ItemId, ItemId> rules[2];
    for (std::size_t k = 0; k < 2; ++k) {
      auto parts = detail::split(alternatives[k], '+');
      if (parts.size() != 2) throw ParseError(line_no, "a rule has exactly two inputs");
      auto a = parse_item(detail::trim(parts[0]));
      auto b = parse_item(detail::trim(parts[1]));
      if (!a || !b) throw ParseError(line_no, "unknown input item");
      rules[k] = {*a, *b};
    }
    try {
      catalog.add(*output, rules[0], rules[1]);
    } catch (const CatalogError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    catalog.validate();
  } catch (const CatalogError& e) {
    throw ParseError(line_no, e.what());
  }
  return catalog;
}

/// `item: A` or `item: B`, one line per catalogued item, sorted by name.
inline std::string format_book(const RecipeBook& book) {
  std::ostringstream out;
  for (ItemId item : detail::craftables_by_name(book.catalog()))
    out << item_name(item) << ": " << (book.uses_rule_b(item) ? 'B' : 'A') << "\n";
  return out.str();
}

inline RecipeBook parse_book(std::string_view text, std::shared_ptr<const RecipeCatalog> catalog) {
  std::bitset<kItemCount> bits;
  std::set<ItemId> seen;
  std::size_t line_no = 0;
  for (std::string_view raw_line : detail::split(text, '\n')) {
    ++line_no;
    std::string_view line = detail::trim(raw_line);
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(line_no, "expected 'item: A|B'");
    auto item = parse_item(detail::trim(line.substr(0, colon)));
    if (!item || !catalog->craftable(*item)) throw ParseError(line_no, "item not in catalog");
    auto choice = detail::trim(line.substr(colon + 1));
    if (choice != "A" && choice != "B") throw ParseError(line_no, "choice must be A or B");
    if (!seen.insert(*item).second) throw ParseError(line_no, "duplicate item");
    bits.set(index_of(*item), choice == "B");
  }
  if (seen.size() != catalog->size()) throw ParseError(line_no, "book does not cover every catalogued item");
  return RecipeBook(std::move(catalog), bits);
}

}  // namespace natprog
