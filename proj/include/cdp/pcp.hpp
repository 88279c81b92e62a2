#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdp/bigint.hpp"
#include "cdp/word.hpp"

namespace cdp {

/// Polycyclic presentation on generators g_0 < g_1 < ... < g_{n-1}.
///
/// Relative order 0 means infinite. Relation right-hand sides are stored as
/// exponent vectors (normal-form words) supported on generators of larger
/// index than the generator they are attached to:
///   power:              g_i^{m_i}        = powers[i]
///   conjugate:          g_i^-1 g_j g_i   = conjugates[j][i]          (i < j)
///   inverse conjugate:  g_i g_j g_i^-1   = inverse_conjugates[j][i]  (i < j, g_i infinite)
struct PcPresentation {
  Alphabet alphabet;
  std::vector<BigInt> relative_orders;
  std::vector<std::optional<ExponentVector>> powers;
  std::vector<std::vector<std::optional<ExponentVector>>> conjugates;
  std::vector<std::vector<std::optional<ExponentVector>>> inverse_conjugates;

  explicit PcPresentation(Alphabet a = Alphabet({"g1"}));

  std::size_t size() const { return alphabet.size(); }
  bool infinite(std::size_t i) const { return relative_orders[i] == 0; }
  std::size_t hirsch_length() const;

  /// Spells an exponent vector as a normal-form word.
  Word spell(const ExponentVector& e) const;

  /// All defining relations as relator words (lhs * rhs^-1).
  std::vector<Word> relators() const;

  /// Checks that every relation needed by collection is present and that
  /// every right-hand side has normal-form shape. Throws INVALID_PRESENTATION.
  void validate() const;
};

/// Parses the sectioned text format (`generators`, `orders`, `relations`).
/// Throws ParseError with line/column, or Error(INVALID_PRESENTATION).
PcPresentation parse_pcp(std::string_view text);
PcPresentation load_pcp(const std::filesystem::path& path);

/// Collection from the left with a rewrite-step budget.
class Collector {
 public:
  explicit Collector(const PcPresentation& p, std::uint64_t max_steps = 10'000'000)
      : p_(p), max_steps_(max_steps) {}

  ExponentVector collect(const Word& w) const;
  /// Right-multiplies the normal form `state` by `letter`.
  void multiply(ExponentVector& state, Letter letter) const;
  /// Right-multiplies by g_k^power.
  void multiply_power(ExponentVector& state, std::size_t k, const BigInt& power) const;
  /// Rewrite steps spent since construction or the last collect().
  std::uint64_t steps() const { return steps_; }

 private:
  void mul_letter(ExponentVector& e, std::size_t k, int sign) const;
  void mul_power(ExponentVector& e, std::size_t j, const BigInt& power) const;
  void mul_vector(ExponentVector& e, const ExponentVector& rhs, const BigInt& times) const;
  void normalize_slot(ExponentVector& e, std::size_t k) const;
  bool tail_zero(const ExponentVector& e, std::size_t k) const;
  void tick() const;

  const PcPresentation& p_;
  std::uint64_t max_steps_;
  mutable std::uint64_t steps_ = 0;
};

/// Collects `w` to its exponent vector.
ExponentVector collect_pcp(const PcPresentation& p, const Word& w, std::uint64_t max_steps = 10'000'000);

}  // namespace cdp
