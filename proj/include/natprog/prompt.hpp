#pragma once

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "natprog/candidate.hpp"
#include "natprog/catalog.hpp"
#include "natprog/embedder.hpp"
#include "natprog/library.hpp"

namespace natprog {

namespace detail {

inline std::string post_condition_text(const Goal& goal) {
  auto arr = nlohmann::ordered_json::array();
  for (ItemId i : goal.items) arr.push_back(std::string(item_name(i)));
  return arr.dump();
}

inline std::string header_line(const SearchProblem& p) {
  nlohmann::ordered_json j;
  j["name"] = p.hint;
  j["post_condition"] = post_condition_text(p.goal);
  return j.dump();
}

inline std::string sub_problem_line(const Goal& goal) {
  nlohmann::ordered_json j;
  j["post_condition"] = post_condition_text(goal);
  return j.dump();
}

inline std::string primitive_line(Action a) {
  switch (a.kind) {
    case Action::Kind::input:
      return "place " + std::string(item_name(a.item));
    case Action::Kind::craft:
      return "collect";
    case Action::Kind::clear:
      return "clear";
  }
  return {};
}

}  // namespace detail

/// Entries ordered by hint similarity to `hint` (most similar first); ties
/// go to the more recently used entry. Falls back to recency alone if the
/// embedder fails.
inline std::vector<std::size_t> entries_by_similarity(const Library& library, std::string_view hint,
                                                      const Embedder& embedder) {
  std::vector<std::size_t> order(library.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sim(library.size(), 0.0);
  try {
    auto q = embedder.embed(hint);
    for (std::size_t i = 0; i < library.size(); ++i) sim[i] = cosine(q, embedder.embed(library.at(i).hint()));
  } catch (const std::exception&) {
    std::fill(sim.begin(), sim.end(), 0.0);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return library.at(a).last_used_tick > library.at(b).last_used_tick;
  });
  return order;
}

inline std::string render_example(const LibraryEntry& e) {
  std::string out = "START\n" + detail::header_line(e.decomposition.head) + "\n";
  for (const Step& s : e.decomposition.steps) {
    out += "    ";
    if (const auto* a = std::get_if<Action>(&s))
      out += detail::primitive_line(*a);
    else
      out += detail::sub_problem_line(std::get<SearchProblem>(s).goal);
    out += "\n";
  }
  out += "END\n";
  return out;
}

/// Few-shot prompt: primitive list, post-condition list, the `k` library
/// entries whose hints are closest to the problem's, and finally an open
/// START block with the problem itself for the model to complete.
inline std::string build_prompt(const SearchProblem& problem, const Library& library, const Embedder& embedder,
                                std::size_t k, const RecipeCatalog& catalog) {
  std::ostringstream out;
  out << "The task is to convert a sentence of how to craft an item into a small program that crafts the item.\n\n";

  auto primitives = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kItemCount; ++i) primitives.push_back("place " + std::string(kItemNames[i]));
  primitives.push_back("collect");
  primitives.push_back("clear");
  out << "Here are all the primitive functions that you can use:\n" << primitives.dump() << "\n\n";
  out << "When you are placing something, you can only use the functions in this list.\n\n";

  auto post_conditions = nlohmann::ordered_json::array();
  for (ItemId item : catalog.craftables()) post_conditions.push_back(detail::post_condition_text(Goal{item}));
  out << "Here are all the post conditions that you can use:\n" << post_conditions.dump() << "\n\n";

  out << "Give five output examples for the new input with post conditions and five without.\n";
  out << "Your examples MUST be for this specific new input.\n\n";

  if (k > 0 && !library.empty()) {
    out << "Here are some examples:\n";
    auto order = entries_by_similarity(library, problem.hint, embedder);
    for (std::size_t i = 0; i < order.size() && i < k; ++i) out << render_example(library.at(order[i]));
    out << "\n";
  }
  out << "New input:\n";
  out << "START\n" << detail::header_line(problem) << "\n";
  return out.str();
}

namespace detail {

inline std::optional<Goal> parse_post_condition(const nlohmann::json& value) {
  nlohmann::json arr = value;
  if (value.is_string()) {
    try {
      arr = nlohmann::json::parse(value.get<std::string>());
    } catch (const nlohmann::json::parse_error&) {
      return std::nullopt;
    }
  }
  if (!arr.is_array() || arr.empty()) return std::nullopt;
  Goal g;
  for (const auto& v : arr) {
    if (!v.is_string()) return std::nullopt;
    auto item = parse_item(v.get<std::string>());
    if (!item) return std::nullopt;
    g.items.push_back(*item);
  }
  return g;
}

inline std::optional<CandidateItem> parse_step_line(std::string_view line) {
  if (line.empty()) return std::nullopt;
  if (line.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      return std::nullopt;
    }
    if (!j.is_object() || j.contains("name") || !j.contains("post_condition")) return std::nullopt;
    auto goal = parse_post_condition(j["post_condition"]);
    if (!goal) return std::nullopt;
    return CandidateItem{SearchProblem{*goal, ""}};
  }
  if (line == "collect" || line == "craft") return CandidateItem{Action::craft()};
  constexpr std::string_view place = "place ";
  if (line.substr(0, place.size()) == place) {
    if (auto item = parse_item(trim(line.substr(place.size())))) return CandidateItem{Action::input(*item)};
    return std::nullopt;
  }
  if (auto a = parse_action(line); a && a->kind == Action::Kind::input) return CandidateItem{*a};
  return std::nullopt;
}

}  // namespace detail

/// Lenient parser for sampled completions. Blocks are delimited by
/// START/END (or '['/']'); text before the first delimiter continues the
/// prompt's open block. Unrecognized lines are skipped and empty blocks are
/// dropped.
inline std::vector<CandidateSequence> parse_completion(std::string_view text) {
  std::vector<CandidateSequence> out;
  CandidateSequence current;
  bool in_block = true;
  auto flush = [&] {
    if (!current.items.empty()) out.push_back(std::move(current));
    current = {};
  };
  for (std::string_view raw : detail::split(text, '\n')) {
    std::string_view line = detail::trim(raw);
    if (line == "START" || line == "[") {
      flush();
      in_block = true;
      continue;
    }
    if (line == "END" || line == "]") {
      flush();
      in_block = false;
      continue;
    }
    if (!in_block) continue;
    if (auto step = detail::parse_step_line(line)) current.items.push_back(std::move(*step));
  }
  flush();
  return out;
}

}  // namespace natprog
