#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace natprog {

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source of text completions for a prompt. Calls may be slow and may throw
/// SamplerError.
class CompletionSampler {
 public:
  virtual ~CompletionSampler() = default;
  virtual std::vector<std::string> sample(const std::string& prompt, std::size_t n) = 0;
};

/// Scripted sampler for tests and offline runs: returns the fixture
/// completions (up to n) after an optional delay, or fails on demand.
class MockSampler final : public CompletionSampler {
 public:
  explicit MockSampler(std::vector<std::string> completions, std::chrono::milliseconds delay = {},
                       bool fail = false)
      : completions_(std::move(completions)), delay_(delay), fail_(fail) {}

  std::vector<std::string> sample(const std::string& prompt, std::size_t n) override {
    {
      std::lock_guard lock(mu_);
      prompts_.push_back(prompt);
    }
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    if (fail_) throw SamplerError("mock sampler failure");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < completions_.size() && i < n; ++i) out.push_back(completions_[i]);
    return out;
  }

  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  std::vector<std::string> completions_;
  std::chrono::milliseconds delay_;
  bool fail_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

}  // namespace natprog
