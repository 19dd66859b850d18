#pragma once

#include <cstddef>
#include <stdexcept>

namespace natprog {

/// Search knobs shared by the proposers and both synthesis executors.
struct ProposerParams {
  double recency_weight = 0.8;
  double frequency_weight = 0.2;
  std::size_t beam_width = 12;
  std::size_t max_len = 3;
  // Partial-evaluation steps a single solve may spend; stands in for the
  // wall-clock solver timeout.
  std::size_t expansion_budget = 20000;
  std::size_t prompt_examples = 10;

  void validate() const {
    if (recency_weight < 0 || frequency_weight < 0 || recency_weight + frequency_weight > 1.0 + 1e-9 ||
        recency_weight + frequency_weight < 1.0 - 1e-9)
      throw std::invalid_argument("proposer weights must be non-negative and sum to 1");
    if (beam_width < 1) throw std::invalid_argument("beam_width must be at least 1");
    if (max_len < 1) throw std::invalid_argument("max_len must be at least 1");
  }
};

}  // namespace natprog
