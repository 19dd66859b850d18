#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace natprog {

/// Maps text to a fixed-dimension unit-norm vector. Implementations must be
/// deterministic per text; they may throw to signal a backend failure.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

inline double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

/// Lowercased word tokens; anything other than letters, digits and '_'
/// separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '_') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Bag-of-words embedding: each content token is hashed into one of `dim`
/// buckets and the count vector is L2-normalized. Function words are
/// dropped and the first content token (what is being asked for) counts
/// `head_weight` times. Text with no content tokens maps to the uniform unit
/// vector.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256, double head_weight = 3.0) : dim_(dim), head_weight_(head_weight) {}

  std::vector<double> embed(std::string_view text) const override {
    std::vector<double> v(dim_, 0.0);
    bool head = true;
    for (const std::string& t : tokenize(text)) {
      if (is_stopword(t)) continue;
      v[bucket(t)] += head ? head_weight_ : 1.0;
      head = false;
    }
    if (head) {
      v.assign(dim_, 1.0 / std::sqrt(static_cast<double>(dim_)));
      return v;
    }
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  }

  std::size_t dim() const { return dim_; }

  static bool is_stopword(std::string_view t) {
    static constexpr std::string_view words[] = {"a",    "an",   "and",    "craft", "for",  "from", "make",
                                                 "of",   "please", "the",  "then",  "to",   "using", "with"};
    for (std::string_view w : words)
      if (t == w) return true;
    return false;
  }

 private:
  std::size_t bucket(std::string_view token) const {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : token) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h % dim_);
  }

  std::size_t dim_;
  double head_weight_;
};

}  // namespace natprog
