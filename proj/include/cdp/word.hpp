#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdp {

/// A signed generator letter. Generators are 0-based indices into an
/// Alphabet; the sign selects the generator or its formal inverse.
class Letter {
 public:
  constexpr Letter() = default;
  constexpr Letter(int generator, bool inverted)
      : code_(inverted ? -(generator + 1) : generator + 1) {}

  static constexpr Letter from_code(int code) {
    Letter l;
    l.code_ = code;
    return l;
  }

  constexpr int generator() const { return (code_ < 0 ? -code_ : code_) - 1; }
  constexpr bool inverted() const { return code_ < 0; }
  constexpr int sign() const { return code_ < 0 ? -1 : 1; }
  constexpr Letter inverse() const { return from_code(-code_); }
  constexpr int code() const { return code_; }

  /// Position in the ordered symmetric alphabet x1 < x1^-1 < x2 < x2^-1 < ...
  constexpr int rank() const { return 2 * generator() + (inverted() ? 1 : 0); }
  static constexpr Letter from_rank(int rank) { return Letter(rank / 2, (rank % 2) != 0); }

  constexpr bool operator==(const Letter&) const = default;
  constexpr auto operator<=>(const Letter& other) const { return rank() <=> other.rank(); }

 private:
  int code_ = 1;
};

/// Freely reduced word. Every constructor and mutator maintains the
/// invariant that no letter is followed by its inverse.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Letter> letters);
  explicit Word(std::span<const Letter> letters);

  static Word generator(int index, int power = 1);

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  const Letter& operator[](std::size_t i) const { return letters_[i]; }
  std::span<const Letter> letters() const { return letters_; }
  auto begin() const { return letters_.begin(); }
  auto end() const { return letters_.end(); }

  /// Right-multiplies by one letter, cancelling against the last letter.
  void push_back(Letter letter);
  void append(const Word& other);
  Word inverse() const;

  friend Word operator*(const Word& a, const Word& b) {
    Word out = a;
    out.append(b);
    return out;
  }

  bool operator==(const Word&) const = default;
  std::strong_ordering operator<=>(const Word& other) const;

 private:
  std::vector<Letter> letters_;
};

/// Free reduction of an arbitrary letter sequence.
Word free_reduce(std::span<const Letter> raw);

/// True when `u` precedes `v` in shortlex order under the letter ranking
/// (length first, then lexicographic by rank).
bool shortlex_less(const Word& u, const Word& v);

/// Ordered generator names with token-syntax parsing and printing.
/// Token syntax: space separated `name`, `name^-1` or `name^k`.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int generator) const { return names_.at(generator); }
  std::optional<int> find(std::string_view name) const;

  std::string letter_name(Letter l) const;
  std::string format(const Word& w) const;
  /// Compact spelling without separators, inverses as upper/lower swapped
  /// when names are single lowercase characters; otherwise token syntax.
  std::string label(const Word& w) const;

  /// Parses token syntax. `1` and the empty string denote the identity.
  /// Throws ParseError with positions relative to `line`/`column_offset`.
  Word parse(std::string_view text, std::size_t line = 1, std::size_t column_offset = 0) const;

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Generators and defining relators of a finitely presented group.
struct Presentation {
  Alphabet alphabet;
  std::vector<Word> relators;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

}  // namespace cdp
