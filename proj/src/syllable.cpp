#include "cdp/syllable.hpp"

#include <cctype>

#include "cdp/error.hpp"

namespace cdp {

void append_syllable(SyllableWord& s, int generator, const BigInt& power) {
  if (power == 0) return;
  if (!s.empty() && s.back().generator == generator) {
    s.back().power += power;
    if (s.back().power == 0) s.pop_back();
    return;
  }
  s.push_back({generator, power});
}

SyllableWord to_syllables(const Word& w) {
  SyllableWord out;
  for (Letter l : w) append_syllable(out, l.generator(), BigInt(l.sign()));
  return out;
}

Word to_word(const SyllableWord& s, std::size_t max_letters) {
  if (letter_length(s) > BigInt(static_cast<unsigned long>(max_letters)))
    throw Error(ErrorCode::collection_overflow, "word has more than " + std::to_string(max_letters) + " letters");
  Word w;
  for (const auto& syl : s) {
    const Letter l(syl.generator, syl.power < 0);
    const long n = BigInt(abs(syl.power)).get_si();
    for (long k = 0; k < n; ++k) w.push_back(l);
  }
  return w;
}

BigInt letter_length(const SyllableWord& s) {
  BigInt n = 0;
  for (const auto& syl : s) n += abs(syl.power);
  return n;
}

SyllableWord inverse(const SyllableWord& s) {
  SyllableWord out;
  for (auto it = s.rbegin(); it != s.rend(); ++it) append_syllable(out, it->generator, -it->power);
  return out;
}

std::string format(const Alphabet& alphabet, const SyllableWord& s) {
  if (s.empty()) return "1";
  std::string out;
  for (const auto& syl : s) {
    if (!out.empty()) out += ' ';
    out += alphabet.name(syl.generator);
    if (syl.power != 1) out += "^" + syl.power.get_str();
  }
  return out;
}

SyllableWord parse_syllables(const Alphabet& alphabet, std::string_view text) {
  SyllableWord out;
  std::size_t i = 0;
  auto fail = [](std::size_t pos, const std::string& msg) { return ParseError(1, pos + 1, msg); };
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (text[i] == '1' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      ++i;
      continue;
    }
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
    if (i == start) throw fail(start, std::string("unexpected character '") + text[start] + "'");
    const std::string name(text.substr(start, i - start));
    auto gen = alphabet.find(name);
    if (!gen) throw fail(start, "unknown generator '" + name + "'");
    BigInt power = 1;
    if (i < text.size() && text[i] == '^') {
      ++i;
      const std::size_t num_start = i;
      if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
      const std::size_t digits = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i == digits) throw fail(num_start, "expected integer exponent after '^'");
      std::string num(text.substr(num_start, i - num_start));
      if (num[0] == '+') num.erase(0, 1);
      power.set_str(num, 10);
    }
    if (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
      throw fail(i, std::string("unexpected character '") + text[i] + "'");
    append_syllable(out, *gen, power);
  }
  return out;
}

}  // namespace cdp
