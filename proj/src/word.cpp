#include "cdp/word.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "cdp/error.hpp"

namespace cdp {

Word::Word(std::initializer_list<Letter> letters) {
  for (Letter l : letters) push_back(l);
}

Word::Word(std::span<const Letter> letters) {
  letters_.reserve(letters.size());
  for (Letter l : letters) push_back(l);
}

Word Word::generator(int index, int power) {
  Word w;
  const Letter l(index, power < 0);
  for (int i = 0; i < (power < 0 ? -power : power); ++i) w.letters_.push_back(l);
  return w;
}

void Word::push_back(Letter letter) {
  if (!letters_.empty() && letters_.back() == letter.inverse()) {
    letters_.pop_back();
  } else {
    letters_.push_back(letter);
  }
}

void Word::append(const Word& other) {
  for (Letter l : other.letters_) push_back(l);
}

Word Word::inverse() const {
  Word out;
  out.letters_.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.letters_.push_back(it->inverse());
  return out;
}

std::strong_ordering Word::operator<=>(const Word& other) const {
  if (auto c = letters_.size() <=> other.letters_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(letters_.begin(), letters_.end(),
                                                other.letters_.begin(), other.letters_.end());
}

Word free_reduce(std::span<const Letter> raw) { return Word(raw); }

bool shortlex_less(const Word& u, const Word& v) { return u < v; }

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw Error(ErrorCode::invalid_argument, "alphabet needs at least one generator");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty() || !std::isalpha(static_cast<unsigned char>(n.front())))
      throw Error(ErrorCode::invalid_argument, "generator name must start with a letter: '" + n + "'");
    for (char c : n) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        throw Error(ErrorCode::invalid_argument, "bad character in generator name '" + n + "'");
    }
    if (!seen.insert(n).second) throw Error(ErrorCode::invalid_argument, "duplicate generator '" + n + "'");
  }
}

std::optional<int> Alphabet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

std::string Alphabet::letter_name(Letter l) const {
  return l.inverted() ? names_.at(l.generator()) + "^-1" : names_.at(l.generator());
}

std::string Alphabet::format(const Word& w) const {
  std::string out;
  std::size_t i = 0;
  while (i < w.size()) {
    std::size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    if (!out.empty()) out += ' ';
    const auto run = static_cast<long long>(j - i);
    out += names_.at(w[i].generator());
    if (w[i].inverted()) {
      out += "^-" + std::to_string(run);
    } else if (run > 1) {
      out += "^" + std::to_string(run);
    }
    i = j;
  }
  return out;
}

std::string Alphabet::label(const Word& w) const {
  const bool compact = std::all_of(names_.begin(), names_.end(), [](const std::string& n) {
    return n.size() == 1 && std::isalpha(static_cast<unsigned char>(n[0]));
  });
  if (!compact) return format(w);
  std::string out;
  for (Letter l : w) {
    char c = names_[l.generator()][0];
    if (l.inverted()) {
      c = std::isupper(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c))
                                                     : static_cast<char>(std::toupper(c));
    }
    out += c;
  }
  return out;
}

Word Alphabet::parse(std::string_view text, std::size_t line, std::size_t column_offset) const {
  Word w;
  std::size_t i = 0;
  auto fail = [&](std::size_t pos, const std::string& msg) -> ParseError {
    return ParseError(line, column_offset + pos + 1, msg);
  };
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
    const std::string_view name = text.substr(start, i - start);
    auto gen = find(name);
    if (!gen) throw fail(start, "unknown generator '" + std::string(name) + "'");
    long long power = 1;
    if (i < text.size() && text[i] == '^') {
      ++i;
      const std::size_t num_start = i;
      if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      const std::string_view num = text.substr(num_start, i - num_start);
      const char* first = num.data() + (num.starts_with('+') ? 1 : 0);
      auto [ptr, ec] = std::from_chars(first, num.data() + num.size(), power);
      if (ec != std::errc() || ptr != num.data() + num.size() || num.empty())
        throw fail(num_start, "expected integer exponent after '^'");
    }
    if (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
      throw fail(i, std::string("unexpected character '") + text[i] + "'");
    const Letter l(*gen, power < 0);
    for (long long k = 0; k < (power < 0 ? -power : power); ++k) w.push_back(l);
  }
  return w;
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (Letter l : w) {
    h ^= static_cast<std::size_t>(l.code() + 0x9e37);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cdp
