#pragma once

#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "natprog/catalog.hpp"
#include "natprog/dp.hpp"
#include "natprog/library.hpp"

namespace natprog {

// Library file format (UTF-8, line oriented):
//
//   natprog-library 1 entries=<n> tick=<t>
//   {"goal":[...],"hint":"...","count":c,"inserted":i,"last_used":u,"steps":[...]}
//   ...
//
// A step is either a primitive action name or {"goal":[...],"hint":"..."}.
//
// Program library files (DP/DS) use the same layout:
//
//   natprog-programs 1 programs=<n> tick=<t>
//   {"name":"...","hint":"...","goal":[...]|null,"tick":k,"body":["name",...]}
//
// Primitives are implicit; programs appear in definition order.

inline constexpr std::string_view kLibraryMagic = "natprog-library";
inline constexpr int kLibraryVersion = 1;
inline constexpr std::string_view kProgramsMagic = "natprog-programs";

namespace detail {

inline nlohmann::ordered_json goal_to_json(const Goal& g) {
  auto arr = nlohmann::ordered_json::array();
  for (ItemId i : g.items) arr.push_back(std::string(item_name(i)));
  return arr;
}

inline Goal goal_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_array() || j.empty()) throw ParseError(line, "goal must be a non-empty array of item names");
  Goal g;
  for (const auto& v : j) {
    if (!v.is_string()) throw ParseError(line, "goal items must be strings");
    auto item = parse_item(v.get<std::string>());
    if (!item) throw ParseError(line, "unknown item '" + v.get<std::string>() + "'");
    g.items.push_back(*item);
  }
  return g;
}

}  // namespace detail

inline std::string serialize(const Library& library) {
  std::ostringstream out;
  out << kLibraryMagic << ' ' << kLibraryVersion << " entries=" << library.size() << " tick=" << library.tick()
      << '\n';
  for (const LibraryEntry& e : library.entries()) {
    nlohmann::ordered_json j;
    j["goal"] = detail::goal_to_json(e.goal());
    j["hint"] = e.hint();
    j["count"] = e.occurrence_count;
    j["inserted"] = e.insertion_tick;
    j["last_used"] = e.last_used_tick;
    auto steps = nlohmann::ordered_json::array();
    for (const Step& s : e.decomposition.steps) {
      if (const auto* a = std::get_if<Action>(&s)) {
        steps.push_back(action_name(*a));
      } else {
        const auto& p = std::get<SearchProblem>(s);
        nlohmann::ordered_json sub;
        sub["goal"] = detail::goal_to_json(p.goal);
        sub["hint"] = p.hint;
        steps.push_back(std::move(sub));
      }
    }
    j["steps"] = std::move(steps);
    out << j.dump() << '\n';
  }
  return out.str();
}

namespace detail {

struct Header {
  std::size_t count = 0;
  std::int64_t tick = 0;
};

inline Header parse_header(std::string_view line, std::string_view magic, std::string_view count_key) {
  std::istringstream header{std::string(line)};
  std::string got_magic, count_field, tick_field;
  int version = 0;
  if (!(header >> got_magic >> version >> count_field >> tick_field) || got_magic != magic)
    throw ParseError(1, "bad header");
  if (version != kLibraryVersion) throw ParseError(1, "unsupported version " + std::to_string(version));
  const std::string prefix = std::string(count_key) + "=";
  Header h;
  try {
    if (count_field.rfind(prefix, 0) != 0 || tick_field.rfind("tick=", 0) != 0) throw std::exception();
    h.count = std::stoull(count_field.substr(prefix.size()));
    h.tick = std::stoll(tick_field.substr(5));
  } catch (...) {
    throw ParseError(1, "bad header fields");
  }
  return h;
}

inline std::vector<std::string_view> file_lines(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "missing header");
  return lines;
}

}  // namespace detail

inline Library deserialize(std::string_view text) {
  auto lines = detail::file_lines(text);
  auto [expected, tick] = detail::parse_header(lines[0], kLibraryMagic, "entries");

  std::vector<LibraryEntry> entries;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::size_t line = k + 1;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[k]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    try {
      LibraryEntry e;
      e.decomposition.head.goal = detail::goal_from_json(j.at("goal"), line);
      e.decomposition.head.hint = j.at("hint").get<std::string>();
      e.occurrence_count = j.at("count").get<std::uint32_t>();
      e.insertion_tick = j.at("inserted").get<std::int64_t>();
      e.last_used_tick = j.at("last_used").get<std::int64_t>();
      if (e.occurrence_count == 0) throw ParseError(line, "occurrence count must be positive");
      const auto& steps = j.at("steps");
      if (!steps.is_array() || steps.empty()) throw ParseError(line, "steps must be a non-empty array");
      for (const auto& s : steps) {
        if (s.is_string()) {
          auto a = parse_action(s.get<std::string>());
          if (!a) throw ParseError(line, "unknown primitive '" + s.get<std::string>() + "'");
          e.decomposition.steps.emplace_back(*a);
        } else {
          SearchProblem p{detail::goal_from_json(s.at("goal"), line), s.at("hint").get<std::string>()};
          e.decomposition.steps.emplace_back(std::move(p));
        }
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  if (entries.size() != expected)
    throw ParseError(lines.size() + 1, "expected " + std::to_string(expected) + " entries, found " +
                                           std::to_string(entries.size()));
  try {
    return Library::restore(std::move(entries), tick);
  } catch (const std::invalid_argument& e) {
    throw ParseError(lines.size(), e.what());
  }
}

inline std::string serialize(const DpLibrary& library) {
  std::ostringstream out;
  out << kProgramsMagic << ' ' << kLibraryVersion << " programs=" << library.user_program_count()
      << " tick=" << library.tick() << '\n';
  for (const DpProgram& p : library.programs()) {
    if (p.primitive) continue;
    nlohmann::ordered_json j;
    j["name"] = p.name;
    j["hint"] = p.hint;
    j["goal"] = p.goal ? detail::goal_to_json(*p.goal) : nlohmann::ordered_json(nullptr);
    j["tick"] = p.tick;
    j["body"] = p.body;
    out << j.dump() << '\n';
  }
  return out.str();
}

inline DpLibrary deserialize_programs(std::string_view text) {
  auto lines = detail::file_lines(text);
  auto [expected, tick] = detail::parse_header(lines[0], kProgramsMagic, "programs");
  if (lines.size() - 1 != expected)
    throw ParseError(lines.size() + 1, "expected " + std::to_string(expected) + " programs, found " +
                                           std::to_string(lines.size() - 1));
  DpLibrary library;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::size_t line = k + 1;
    try {
      nlohmann::json j = nlohmann::json::parse(lines[k]);
      std::optional<Goal> goal;
      if (!j.at("goal").is_null()) goal = detail::goal_from_json(j.at("goal"), line);
      library.restore(j.at("name").get<std::string>(), j.at("body").get<std::vector<std::string>>(),
                      j.at("hint").get<std::string>(), std::move(goal), j.at("tick").get<std::int64_t>(), tick);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line, e.what());
    } catch (const DpError& e) {
      throw ParseError(line, e.what());
    }
  }
  return library;
}

}  // namespace natprog
