#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <iostream>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "natprog/candidate.hpp"
#include "natprog/dp.hpp"
#include "natprog/embedder.hpp"
#include "natprog/library.hpp"
#include "natprog/params.hpp"
#include "natprog/prompt.hpp"
#include "natprog/sampler.hpp"

namespace natprog {

inline void log_warning(std::string_view message) { std::clog << "warning: " << message << '\n'; }

/// A library unit competing for a beam slot.
struct BeamUnit {
  std::size_t index = 0;
  std::string_view hint;
  std::int64_t tick = 0;
};

/// Ranks units by recency (plus hint similarity when `similarity` is given),
/// keeps the top `width`. Ties go to the newer unit, then the lower index.
inline std::vector<std::size_t> rank_units(const std::vector<BeamUnit>& units, const std::vector<double>* similarity,
                                           std::size_t width) {
  if (units.empty()) return {};
  std::int64_t lo = units.front().tick, hi = units.front().tick;
  for (const BeamUnit& u : units) {
    lo = std::min(lo, u.tick);
    hi = std::max(hi, u.tick);
  }
  std::vector<double> score(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    double recency = hi == lo ? 1.0 : static_cast<double>(units[i].tick - lo) / static_cast<double>(hi - lo);
    score[i] = recency + (similarity ? (*similarity)[i] : 0.0);
  }
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    if (units[a].tick != units[b].tick) return units[a].tick > units[b].tick;
    return units[a].index < units[b].index;
  });
  if (order.size() > width) order.resize(width);
  std::vector<std::size_t> out;
  for (std::size_t i : order) out.push_back(units[i].index);
  return out;
}

inline std::vector<BeamUnit> beam_units(const Library& library) {
  std::vector<BeamUnit> units;
  units.reserve(library.size());
  for (std::size_t i = 0; i < library.size(); ++i) {
    const LibraryEntry& e = library.at(i);
    units.push_back({i, e.hint(), e.last_used_tick});
  }
  return units;
}

inline std::vector<BeamUnit> beam_units(const DpLibrary& library) {
  std::vector<BeamUnit> units;
  for (std::size_t i = 0; i < library.programs().size(); ++i) {
    const DpProgram& p = library.at(i);
    if (p.primitive) continue;
    units.push_back({i, p.hint.empty() ? std::string_view(p.name) : std::string_view(p.hint), p.tick});
  }
  return units;
}

/// Beam = ranked library units followed by every primitive action.
struct Beam {
  std::vector<CandidateItem> items;
  std::size_t library_units = 0;
};

inline Beam make_beam(const std::vector<std::size_t>& ranked) {
  Beam beam;
  for (std::size_t i : ranked) beam.items.emplace_back(LibraryRef{i});
  beam.library_units = ranked.size();
  for (Action a : primitive_actions()) beam.items.emplace_back(a);
  return beam;
}

template <class Lib>
Beam naive_beam(const Lib& library, const ProposerParams& params) {
  return make_beam(rank_units(beam_units(library), nullptr, params.beam_width));
}

/// Similarity between each unit's hint and the problem hint, added to
/// recency. Throws whatever the embedder throws.
template <class Lib>
Beam distance_beam(const SearchProblem& problem, const Lib& library, const Embedder& embedder,
                   const ProposerParams& params) {
  auto units = beam_units(library);
  std::vector<double> sim(units.size());
  auto q = embedder.embed(problem.hint);
  for (std::size_t i = 0; i < units.size(); ++i) sim[i] = cosine(q, embedder.embed(units[i].hint));
  return make_beam(rank_units(units, &sim, params.beam_width));
}

/// Every sequence over the beam of length 1, then 2, ... up to max_len, each
/// length in lexicographic order of beam positions. Blocks of candidates
/// sharing a dead prefix are skipped without being yielded.
class EnumerationStream final : public CandidateStream {
 public:
  EnumerationStream(Beam beam, std::size_t max_len) : beam_(std::move(beam)), max_len_(max_len) {
    if (!beam_.items.empty() && max_len_ > 0) odometer_.assign(1, 0);
  }

  std::optional<CandidateSequence> next() override {
    while (!odometer_.empty()) {
      if (std::size_t k = dead_prefix_length(); k != 0) {
        skip_block(k);
        continue;
      }
      CandidateSequence seq;
      seq.items.reserve(odometer_.size());
      for (std::size_t pos : odometer_) seq.items.push_back(beam_.items[pos]);
      last_ = odometer_;
      advance();
      return seq;
    }
    return std::nullopt;
  }

  void mark_dead_prefix(std::size_t k) override {
    if (k == 0 || k > last_.size() || k >= max_len_) return;
    dead_.emplace(last_.begin(), last_.begin() + static_cast<std::ptrdiff_t>(k));
  }

  const std::vector<std::size_t>* last_positions() const override { return &last_; }

  const Beam& beam() const { return beam_; }
  std::size_t skipped() const { return skipped_; }

  /// b + b^2 + ... + b^max_len.
  static std::size_t total_count(std::size_t b, std::size_t max_len) {
    std::size_t total = 0, power = 1;
    for (std::size_t l = 1; l <= max_len; ++l) {
      power *= b;
      total += power;
    }
    return total;
  }

 private:
  std::size_t dead_prefix_length() const {
    if (dead_.empty()) return 0;
    std::vector<std::size_t> prefix;
    for (std::size_t k = 1; k < odometer_.size(); ++k) {
      prefix.assign(odometer_.begin(), odometer_.begin() + static_cast<std::ptrdiff_t>(k));
      if (dead_.count(prefix)) return k;
    }
    return 0;
  }

  // Moves past every candidate of the current length sharing the first k
  // positions with the current one.
  void skip_block(std::size_t k) {
    const std::size_t b = beam_.items.size();
    std::size_t remaining = 1;
    for (std::size_t j = k; j < odometer_.size(); ++j) {
      remaining = remaining * b - odometer_[j];
      odometer_[j] = b - 1;
    }
    skipped_ += remaining;
    advance();
  }

  void advance() {
    const std::size_t b = beam_.items.size();
    for (std::size_t k = odometer_.size(); k-- > 0;) {
      if (++odometer_[k] < b) return;
      odometer_[k] = 0;
    }
    if (odometer_.size() >= max_len_)
      odometer_.clear();
    else
      odometer_.assign(odometer_.size() + 1, 0);
  }

  Beam beam_;
  std::size_t max_len_;
  std::vector<std::size_t> odometer_;
  std::vector<std::size_t> last_;
  std::set<std::vector<std::size_t>> dead_;
  std::size_t skipped_ = 0;
};

template <class Lib>
std::unique_ptr<EnumerationStream> outer_propose_naive(const SearchProblem&, const Lib& library,
                                                       const ProposerParams& params) {
  return std::make_unique<EnumerationStream>(naive_beam(library, params), params.max_len);
}

/// Distance-ranked enumeration; degrades to the naive ranking if the
/// embedder fails.
template <class Lib>
std::unique_ptr<EnumerationStream> outer_propose_distance(const SearchProblem& problem, const Lib& library,
                                                          const Embedder& embedder, const ProposerParams& params) {
  try {
    return std::make_unique<EnumerationStream>(distance_beam(problem, library, embedder, params), params.max_len);
  } catch (const std::exception& e) {
    log_warning(std::string("embedder failed, using recency-only beam: ") + e.what());
    return outer_propose_naive(problem, library, params);
  }
}

struct RaceOptions {
  std::size_t samples = 1;
  // How long the stream waits for the sampler before yielding its first
  // enumerated candidate, and after enumeration runs dry.
  std::chrono::milliseconds initial_wait{0};
  std::chrono::milliseconds final_wait{0};
};

/// Enumeration raced against one background sampler call. Parsed samples
/// are served ahead of enumeration as soon as they arrive. Destroying the
/// stream abandons the sampler; its result is discarded.
class RaceStream final : public CandidateStream {
 public:
  RaceStream(std::unique_ptr<CandidateStream> enumeration, std::shared_ptr<CompletionSampler> sampler,
             std::string prompt, RaceOptions options)
      : enumeration_(std::move(enumeration)), shared_(std::make_shared<Shared>()), options_(options) {
    std::thread([shared = shared_, sampler = std::move(sampler), prompt = std::move(prompt), n = options.samples] {
      std::vector<CandidateSequence> parsed;
      bool ok = true;
      try {
        for (const std::string& text : sampler->sample(prompt, n)) {
          auto blocks = parse_completion(text);
          parsed.insert(parsed.end(), blocks.begin(), blocks.end());
        }
      } catch (const std::exception& e) {
        ok = false;
        if (!shared->cancelled) log_warning(std::string("sampler failed: ") + e.what());
      }
      std::lock_guard lock(shared->mu);
      if (ok) shared->arrived = std::move(parsed);
      shared->done = true;
      shared->cv.notify_all();
    }).detach();
    if (options_.initial_wait.count() > 0) wait_for_sampler(options_.initial_wait);
  }

  ~RaceStream() override { shared_->cancelled = true; }

  std::optional<CandidateSequence> next() override {
    collect();
    if (!injected_.empty()) return pop_injected();
    if (auto seq = enumeration_->next()) {
      last_enumerated_ = true;
      return seq;
    }
    if (options_.final_wait.count() > 0) {
      wait_for_sampler(options_.final_wait);
      collect();
      if (!injected_.empty()) return pop_injected();
    }
    return std::nullopt;
  }

  bool last_was_enumerated() const override { return last_enumerated_; }

  void mark_dead_prefix(std::size_t k) override {
    if (last_enumerated_) enumeration_->mark_dead_prefix(k);
  }

  const std::vector<std::size_t>* last_positions() const override {
    return last_enumerated_ ? enumeration_->last_positions() : nullptr;
  }

  bool sampler_finished() const {
    std::lock_guard lock(shared_->mu);
    return shared_->done;
  }

 private:
  struct Shared {
    mutable std::mutex mu;
    std::condition_variable cv;
    std::vector<CandidateSequence> arrived;
    bool done = false;
    std::atomic<bool> cancelled{false};
  };

  void wait_for_sampler(std::chrono::milliseconds limit) {
    std::unique_lock lock(shared_->mu);
    shared_->cv.wait_for(lock, limit, [&] { return shared_->done; });
  }

  void collect() {
    if (taken_) return;
    std::lock_guard lock(shared_->mu);
    if (!shared_->done) return;
    for (auto& s : shared_->arrived) injected_.push_back(std::move(s));
    shared_->arrived.clear();
    taken_ = true;
  }

  CandidateSequence pop_injected() {
    CandidateSequence s = std::move(injected_.front());
    injected_.pop_front();
    last_enumerated_ = false;
    return s;
  }

  std::unique_ptr<CandidateStream> enumeration_;
  std::shared_ptr<Shared> shared_;
  RaceOptions options_;
  std::deque<CandidateSequence> injected_;
  bool taken_ = false;
  bool last_enumerated_ = true;
};

/// Distance enumeration raced against an LLM sampler prompted with the
/// few-shot prompt for `problem`.
inline std::unique_ptr<RaceStream> outer_propose_llm(const SearchProblem& problem, const Library& library,
                                                     const Embedder& embedder,
                                                     std::shared_ptr<CompletionSampler> sampler,
                                                     const RecipeCatalog& catalog, const ProposerParams& params,
                                                     RaceOptions options = {}) {
  std::string prompt = build_prompt(problem, library, embedder, params.prompt_examples, catalog);
  return std::make_unique<RaceStream>(outer_propose_distance(problem, library, embedder, params), std::move(sampler),
                                      std::move(prompt), options);
}

}  // namespace natprog
