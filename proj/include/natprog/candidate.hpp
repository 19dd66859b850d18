#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "natprog/library.hpp"

namespace natprog {

/// Reference into the library a stream was built from: an entry index for
/// the natural-program library, a program index for a DP/DS library.
struct LibraryRef {
  std::size_t index = 0;

  friend bool operator==(const LibraryRef&, const LibraryRef&) = default;
  friend auto operator<=>(const LibraryRef&, const LibraryRef&) = default;
};

using CandidateItem = std::variant<LibraryRef, Action, SearchProblem>;

/// One top-level proposal: a short sequence of library units, primitives or
/// bare sub-problems.
struct CandidateSequence {
  std::vector<CandidateItem> items;

  std::size_t size() const { return items.size(); }
  friend bool operator==(const CandidateSequence&, const CandidateSequence&) = default;
};

/// Lazy single-consumer stream of candidates. Destroying the stream cancels
/// any background producer.
class CandidateStream {
 public:
  virtual ~CandidateStream() = default;
  virtual std::optional<CandidateSequence> next() = 0;
  /// True when `last` came from the exhaustive enumerator (as opposed to an
  /// injected sample); enumerated candidates respect length ordering.
  virtual bool last_was_enumerated() const { return true; }
  /// Reports that no candidate extending the first `k` items of the last
  /// enumerated candidate can succeed. Streams may skip such candidates.
  virtual void mark_dead_prefix(std::size_t k) { (void)k; }
  /// Beam positions of the last enumerated candidate, when the stream has
  /// them. Enumeration order is length first, then these lexicographically.
  virtual const std::vector<std::size_t>* last_positions() const { return nullptr; }
};

}  // namespace natprog
