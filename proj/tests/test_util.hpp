#ifndef VAREXP_TEST_UTIL_HPP
#define VAREXP_TEST_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <functional>

#include "varexp/grid.hpp"

namespace testutil {

//! Deterministic uniform double in [0, 1) from a fixed-width generator, so
//! frozen expected values survive standard-library changes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    std::uint64_t x = state_;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    state_ = x;
    return x;
  }

  double u01() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

 private:
  std::uint64_t state_;
};

inline varexp::ScalarField random_field(const varexp::Grid& g, Rng& rng, double lo, double hi,
                                        bool zero_boundary = false) {
  varexp::ScalarField f(g);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    f[i] = (zero_boundary && g.is_boundary(i)) ? 0.0 : rng.uniform(lo, hi);
  return f;
}

//! Golden-section minimizer of a unimodal function on [lo, hi]. Runs in
//! extended precision: at double precision the bracket stalls once the
//! function is flat to rounding, about sqrt(eps) relative error.
inline long double golden_min(const std::function<long double(long double)>& f,
                              long double lo, long double hi, int iters = 400) {
  const long double gr = 0.5L * (std::sqrt(5.0L) - 1.0L);
  long double a = lo, b = hi;
  long double c = b - gr * (b - a), d = a + gr * (b - a);
  long double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-16L * (std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5L * (a + b);
}

}  // namespace testutil

#endif
