#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace cdp {

using BigInt = mpz_class;

/// Exponents of a normal form, one entry per slot.
using ExponentVector = std::vector<BigInt>;

inline std::string to_string(const BigInt& v) { return v.get_str(); }

/// Converts to int64, throwing COLLECTION_OVERFLOW when it does not fit.
std::int64_t to_int64(const BigInt& v);

}  // namespace cdp
