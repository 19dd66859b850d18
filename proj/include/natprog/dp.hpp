#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "natprog/env.hpp"

namespace natprog {

class DpError : public std::runtime_error {
 public:
  enum class Kind { duplicate_name, unknown_name };

  DpError(Kind kind, const std::string& name)
      : std::runtime_error(std::string(kind == Kind::duplicate_name ? "DuplicateName" : "UnknownName") + ": " + name),
        kind_(kind),
        name_(name) {}

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  Kind kind_;
  std::string name_;
};

/// A named macro over primitives and earlier programs. `actions` caches the
/// full flattening, which never changes once defined.
struct DpProgram {
  std::string name;
  std::vector<std::string> body;
  std::vector<Action> actions;
  std::string hint;
  std::optional<Goal> goal;
  std::int64_t tick = 0;
  bool primitive = false;
};

/// Name → program map, seeded with one self-mapping per primitive action.
/// Used directly by DP and, with synthesized programs, by DS.
class DpLibrary {
 public:
  DpLibrary() {
    for (Action a : primitive_actions()) {
      DpProgram p;
      p.name = action_name(a);
      p.body = {p.name};
      p.actions = {a};
      p.primitive = true;
      insert(std::move(p));
    }
  }

  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

  const DpProgram& get(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw DpError(DpError::Kind::unknown_name, name);
    return programs_[it->second];
  }

  const DpProgram& at(std::size_t index) const { return programs_.at(index); }
  std::size_t position_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw DpError(DpError::Kind::unknown_name, name);
    return it->second;
  }

  /// All programs in definition order, primitives first.
  const std::vector<DpProgram>& programs() const { return programs_; }

  /// Number of non-primitive programs.
  std::size_t user_program_count() const { return programs_.size() - kPrimitiveActionCount; }

  std::int64_t tick() const { return tick_; }

  const DpProgram& define(const std::string& name, const std::vector<std::string>& body, std::string hint = {},
                          std::optional<Goal> goal = std::nullopt) {
    if (contains(name)) throw DpError(DpError::Kind::duplicate_name, name);
    DpProgram p;
    p.name = name;
    p.body = body;
    p.hint = std::move(hint);
    p.goal = std::move(goal);
    for (const std::string& part : body) {
      const DpProgram& callee = get(part);
      p.actions.insert(p.actions.end(), callee.actions.begin(), callee.actions.end());
    }
    return programs_[insert(std::move(p))];
  }

  /// Re-creates a stored program with its saved tick (deserialization).
  void restore(const std::string& name, const std::vector<std::string>& body, std::string hint,
               std::optional<Goal> goal, std::int64_t tick, std::int64_t library_tick) {
    define(name, body, std::move(hint), std::move(goal));
    programs_.back().tick = tick;
    tick_ = library_tick;
  }

  /// Marks a program as just used, for recency ranking.
  void touch(const std::string& name) { programs_[position_of(name)].tick = ++tick_; }

  /// `base` if free, else `base #2`, `base #3`, ...
  std::string unique_name(const std::string& base) const {
    std::string stem = base.empty() ? std::string("program") : base;
    if (!contains(stem)) return stem;
    for (int k = 2;; ++k) {
      std::string candidate = stem + " #" + std::to_string(k);
      if (!contains(candidate)) return candidate;
    }
  }

 private:
  std::size_t insert(DpProgram p) {
    p.tick = ++tick_;
    std::size_t index = programs_.size();
    by_name_.emplace(p.name, index);
    programs_.push_back(std::move(p));
    return index;
  }

  std::vector<DpProgram> programs_;
  std::map<std::string, std::size_t> by_name_;
  std::int64_t tick_ = 0;
};

inline void dp_define(DpLibrary& lib, const std::string& name, const std::vector<std::string>& body) {
  lib.define(name, body);
}

struct DpExecution {
  std::vector<Action> actions;
  Trajectory trajectory;
};

/// Looks the program up, flattens it and runs it. No search, no goal check.
inline DpExecution dp_execute(const DpLibrary& lib, const std::string& name, const Context& context) {
  const DpProgram& p = lib.get(name);
  return DpExecution{p.actions, run(context, p.actions)};
}

}  // namespace natprog
