#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cdp/bigint.hpp"
#include "cdp/word.hpp"

namespace cdp {

/// One run g^k of a run-length encoded word; k is nonzero.
struct Syllable {
  int generator = 0;
  BigInt power;

  bool operator==(const Syllable&) const = default;
};

/// Run-length spelling of a freely reduced word. Adjacent syllables never
/// share a generator. Normal forms of metabelian groups can be far too long
/// to hold letter by letter, so the pipeline passes these around instead.
using SyllableWord = std::vector<Syllable>;

/// Appends g^k, merging with the last syllable when generators agree.
void append_syllable(SyllableWord& s, int generator, const BigInt& power);

SyllableWord to_syllables(const Word& w);

/// Expands to a Word; throws COLLECTION_OVERFLOW when longer than `max_letters`.
Word to_word(const SyllableWord& s, std::size_t max_letters = 1u << 24);

BigInt letter_length(const SyllableWord& s);
SyllableWord inverse(const SyllableWord& s);

/// Token syntax, e.g. "b^-2 a^5 b". The identity prints as "1".
std::string format(const Alphabet& alphabet, const SyllableWord& s);

/// Token syntax with arbitrary-precision exponents.
SyllableWord parse_syllables(const Alphabet& alphabet, std::string_view text);

}  // namespace cdp
