#include "cdp/sl2.hpp"

#include <cmath>

#include "cdp/error.hpp"

namespace cdp {

Sl2Matrix sl2_letter(Letter l) {
  switch (l.generator()) {
    case kSl2S:
      return l.inverted() ? Sl2Matrix{0, 1, -1, 0} : Sl2Matrix{0, -1, 1, 0};
    case kSl2R:
      return l.inverted() ? Sl2Matrix{1, 1, -1, 0} : Sl2Matrix{0, -1, 1, 1};
    default:
      throw Error(ErrorCode::invalid_argument, "SL(2,Z) words use generators S and R only");
  }
}

Sl2Matrix sl2_evaluate(const Word& w) {
  Sl2Matrix m;
  for (Letter l : w) m = m * sl2_letter(l);
  return m;
}

double sl2_frobenius(const Sl2Matrix& m) {
  const BigInt s = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
  return std::sqrt(s.get_d());
}

std::array<double, 4> sl2_normalized(const Sl2Matrix& m) {
  constexpr mp_bitcnt_t precision = 128;
  const mpf_class s(m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d, precision);
  const mpf_class norm = sqrt(s);
  auto ratio = [&](const BigInt& v) {
    const mpf_class q = mpf_class(v, precision) / norm;
    return q.get_d();
  };
  return {ratio(m.a), ratio(m.b), ratio(m.c), ratio(m.d)};
}

}  // namespace cdp
