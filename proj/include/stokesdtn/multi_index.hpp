#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "stokesdtn/errors.hpp"

namespace stokesdtn {

// Exponent vector of a monomial in up to kMaxVars variables. Keys of the
// sparse jet coefficient maps. Ordered by (total degree, lexicographic) so
// map iteration is graded, which the series recurrences rely on.
class MultiIndex {
 public:
  static constexpr int kMaxVars = 15;

  MultiIndex() : nvars_(0), degree_(0) { exps_.fill(0); }

  explicit MultiIndex(int nvars) : nvars_(static_cast<uint8_t>(nvars)), degree_(0) {
    if (nvars < 0 || nvars > kMaxVars) throw UsageError("MultiIndex: unsupported variable count");
    exps_.fill(0);
  }

  static MultiIndex unit(int nvars, int var, int power = 1) {
    MultiIndex m(nvars);
    m.set(var, power);
    return m;
  }

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  int operator[](int v) const { return exps_[static_cast<size_t>(v)]; }

  void set(int v, int p) {
    if (v < 0 || v >= nvars_ || p < 0 || p > 255) throw UsageError("MultiIndex: bad exponent");
    degree_ = static_cast<uint8_t>(degree_ - exps_[static_cast<size_t>(v)] + p);
    exps_[static_cast<size_t>(v)] = static_cast<uint8_t>(p);
  }

  MultiIndex plus(const MultiIndex& o) const {
    MultiIndex r(nvars_);
    for (int v = 0; v < nvars_; ++v) r.exps_[static_cast<size_t>(v)] = static_cast<uint8_t>(exps_[static_cast<size_t>(v)] + o.exps_[static_cast<size_t>(v)]);
    r.degree_ = static_cast<uint8_t>(degree_ + o.degree_);
    return r;
  }

  // Decrement one exponent; caller guarantees exps_[v] > 0.
  MultiIndex lowered(int v) const {
    MultiIndex r = *this;
    r.exps_[static_cast<size_t>(v)] -= 1;
    r.degree_ -= 1;
    return r;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.nvars_ == b.nvars_ && a.degree_ == b.degree_ && a.exps_ == b.exps_;
  }

  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
    return a.exps_ < b.exps_;
  }

  std::string str() const {
    std::string s = "(";
    for (int v = 0; v < nvars_; ++v) {
      if (v) s += ",";
      s += std::to_string(int(exps_[static_cast<size_t>(v)]));
    }
    return s + ")";
  }

 private:
  std::array<uint8_t, kMaxVars> exps_;
  uint8_t nvars_;
  uint8_t degree_;
};

}  // namespace stokesdtn
