#pragma once

#include <span>
#include <string>
#include <vector>

#include "cdp/bigint.hpp"
#include "cdp/syllable.hpp"
#include "cdp/word.hpp"

namespace cdp {

/// Coordinates in Z/d_1 + ... + Z/d_k + Z^r (torsion slots first).
using AbelianElement = std::vector<BigInt>;

/// The abelianization G/[G,G] of a finitely presented group together with
/// the images of its generators, computed from the relator exponent-sum
/// matrix by Smith normal form.
class AbelianStructure {
 public:
  AbelianStructure() = default;
  AbelianStructure(std::size_t generator_count, std::span<const Word> relators);

  std::size_t free_rank() const { return free_rank_; }
  const std::vector<BigInt>& torsion() const { return torsion_; }
  std::size_t dimension() const { return torsion_.size() + free_rank_; }

  const AbelianElement& generator_image(int generator) const { return images_.at(generator); }
  AbelianElement image(const Word& w) const;
  AbelianElement image(const SyllableWord& s) const;
  /// Sum reduced into canonical coordinates.
  AbelianElement add(const AbelianElement& x, const AbelianElement& y) const;
  AbelianElement zero() const { return AbelianElement(dimension()); }
  bool is_zero(const AbelianElement& e) const;

  /// e.g. "Z/12" or "Z + Z/2 + Z/2".
  std::string describe() const;

 private:
  void reduce(AbelianElement& e) const;
  void canonicalize();

  std::size_t generator_count_ = 0;
  std::size_t free_rank_ = 0;
  std::vector<BigInt> torsion_;
  std::vector<AbelianElement> images_;
};

}  // namespace cdp
