#pragma once

// Error-free transformations and a double-double accumulator. Products use
// Veltkamp splitting (Dekker), so no hardware FMA is assumed.

namespace stablepc::dd {

struct Pair {
  double hi;
  double lo;
};

/// a + b = hi + lo exactly (Knuth).
inline Pair two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline Pair split(double a) {
  constexpr double kSplitter = 134217729.0;  // 2^27 + 1
  const double t = kSplitter * a;
  const double hi = t - (t - a);
  return {hi, a - hi};
}

/// a * b = hi + lo exactly, barring overflow (Dekker).
inline Pair two_prod(double a, double b) {
  const double p = a * b;
  const Pair as = split(a);
  const Pair bs = split(b);
  const double err = ((as.hi * bs.hi - p) + as.hi * bs.lo + as.lo * bs.hi) + as.lo * bs.lo;
  return {p, err};
}

/// Running sum carried as an unevaluated pair hi + lo (about 106 bits).
class Accumulator {
 public:
  Accumulator() = default;
  explicit Accumulator(double x) : hi_(x) {}

  void add(double x) {
    const Pair s = two_sum(hi_, x);
    hi_ = s.hi;
    lo_ += s.lo;
    renormalize();
  }

  void add_product(double a, double b) {
    const Pair p = two_prod(a, b);
    const Pair s = two_sum(hi_, p.hi);
    hi_ = s.hi;
    lo_ += s.lo + p.lo;
    renormalize();
  }

  double hi() const { return hi_; }
  double lo() const { return lo_; }
  double value() const { return hi_ + lo_; }

 private:
  void renormalize() {
    const Pair s = two_sum(hi_, lo_);
    hi_ = s.hi;
    lo_ = s.lo;
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

}  // namespace stablepc::dd
