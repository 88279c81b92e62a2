#pragma once

#include <array>

#include "cdp/bigint.hpp"
#include "cdp/word.hpp"

namespace cdp {

/// 2x2 integer matrix [[a, b], [c, d]].
struct Sl2Matrix {
  BigInt a = 1, b = 0, c = 0, d = 1;

  static Sl2Matrix identity() { return {}; }
  BigInt det() const { return a * d - b * c; }

  friend Sl2Matrix operator*(const Sl2Matrix& x, const Sl2Matrix& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  bool operator==(const Sl2Matrix&) const = default;
};

// Generator 0 is S = [[0,-1],[1,0]], generator 1 is R = [[0,-1],[1,1]].
inline constexpr int kSl2S = 0;
inline constexpr int kSl2R = 1;

Sl2Matrix sl2_letter(Letter l);

/// Ordered product of the generator matrices spelled by `w`.
Sl2Matrix sl2_evaluate(const Word& w);

/// sqrt(a^2 + b^2 + c^2 + d^2); may be +inf for astronomically large entries.
double sl2_frobenius(const Sl2Matrix& m);

/// <a, b, c, d> / ||m||, computed in extended precision so that huge
/// entries still normalize to finite values.
std::array<double, 4> sl2_normalized(const Sl2Matrix& m);

/// Dual representation of an SL(2,Z) element: the matrix together with a
/// word over {S, R} that evaluates to it.
struct Sl2Element {
  Sl2Matrix matrix;
  Word word;
};

}  // namespace cdp
