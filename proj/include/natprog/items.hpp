#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace natprog {

// The closed CraftLite item universe. Declaration order is the canonical
// order used for listings, prompts and book generation.
enum class ItemId : std::uint8_t {
  wood,
  stone,
  wool,
  grass,
  wood_plank,
  bed,
  wood_stick,
  paper,
  string,
  pickaxe,
  cloth,
  pinwheel,
  hut,
  stone_mill,
  flour,
  book,
  fire,
  oven,
  bread,
  sand,
  clay,
  brick,
  glass,
  house,
  iron,
  gear,
  wire,
  light_bulb,
  clock,
};

inline constexpr std::size_t kItemCount = 29;
inline constexpr std::size_t kRawCount = 4;
inline constexpr std::size_t kCraftableCount = kItemCount - kRawCount;

inline constexpr std::array<std::string_view, kItemCount> kItemNames = {
    "wood",  "stone",    "wool",   "grass",      "wood_plank", "bed",   "wood_stick", "paper",
    "string", "pickaxe", "cloth",  "pinwheel",   "hut",        "stone_mill", "flour", "book",
    "fire",  "oven",     "bread",  "sand",       "clay",       "brick", "glass",      "house",
    "iron",  "gear",     "wire",   "light_bulb", "clock",
};

constexpr std::size_t index_of(ItemId item) { return static_cast<std::size_t>(item); }
constexpr ItemId item_at(std::size_t index) { return static_cast<ItemId>(index); }

constexpr std::string_view item_name(ItemId item) { return kItemNames[index_of(item)]; }

constexpr bool is_raw(ItemId item) {
  return item == ItemId::wood || item == ItemId::stone || item == ItemId::wool || item == ItemId::grass;
}

inline std::optional<ItemId> parse_item(std::string_view name) {
  for (std::size_t i = 0; i < kItemCount; ++i) {
    if (kItemNames[i] == name) return item_at(i);
  }
  return std::nullopt;
}

inline constexpr std::array<ItemId, kItemCount> all_items() {
  std::array<ItemId, kItemCount> out{};
  for (std::size_t i = 0; i < kItemCount; ++i) out[i] = item_at(i);
  return out;
}

inline constexpr std::array<ItemId, kRawCount> kRawMaterials = {ItemId::wood, ItemId::stone, ItemId::wool,
                                                                 ItemId::grass};

/// A goal is a non-empty list of items; each listed item must gain a newly
/// crafted copy. Repeated items are allowed and count independently for reward.
struct Goal {
  std::vector<ItemId> items;

  Goal() = default;
  Goal(std::initializer_list<ItemId> list) : items(list) {}
  explicit Goal(std::vector<ItemId> list) : items(std::move(list)) {}

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }
  bool contains(ItemId item) const {
    for (ItemId i : items)
      if (i == item) return true;
    return false;
  }

  friend bool operator==(const Goal&, const Goal&) = default;
  friend auto operator<=>(const Goal&, const Goal&) = default;
};

inline std::string to_string(const Goal& goal) {
  std::string out = "[";
  for (std::size_t i = 0; i < goal.items.size(); ++i) {
    if (i) out += ",";
    out += item_name(goal.items[i]);
  }
  out += "]";
  return out;
}

}  // namespace natprog
