#include "cdp/abelian.hpp"

#include <algorithm>
#include <numeric>

#include "cdp/error.hpp"
#include "cdp/smith.hpp"

namespace cdp {

AbelianStructure::AbelianStructure(std::size_t generator_count, std::span<const Word> relators)
    : generator_count_(generator_count) {
  // Rows are relators, columns generators: Z^n / rowspace(A) is G/[G,G].
  IntMatrix a(relators.size(), generator_count);
  for (std::size_t r = 0; r < relators.size(); ++r)
    for (Letter l : relators[r]) {
      if (static_cast<std::size_t>(l.generator()) >= generator_count)
        throw Error(ErrorCode::invalid_argument, "relator letter outside alphabet");
      a(r, l.generator()) += l.sign();
    }
  const SmithForm sf = smith_normal_form(a);
  // With D = P A Q, the coordinate change x -> x Q sends rowspace(A) to rowspace(D).
  std::vector<std::size_t> torsion_cols;
  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < generator_count; ++c) {
    const BigInt d = c < sf.diagonal.rows() ? sf.diagonal(c, c) : BigInt(0);
    if (d == 1) continue;
    if (d == 0) {
      free_cols.push_back(c);
    } else {
      torsion_cols.push_back(c);
      torsion_.push_back(d);
    }
  }
  free_rank_ = free_cols.size();
  images_.assign(generator_count, AbelianElement(dimension()));
  for (std::size_t g = 0; g < generator_count; ++g) {
    std::size_t slot = 0;
    for (std::size_t c : torsion_cols) images_[g][slot++] = sf.right(g, c);
    for (std::size_t c : free_cols) images_[g][slot++] = sf.right(g, c);
    reduce(images_[g]);
  }
  canonicalize();
}

void AbelianStructure::reduce(AbelianElement& e) const {
  for (std::size_t i = 0; i < torsion_.size(); ++i) {
    mpz_fdiv_r(e[i].get_mpz_t(), e[i].get_mpz_t(), torsion_[i].get_mpz_t());
  }
}

// Each cyclic factor is only determined up to an automorphism; pick the
// unit multiplier (torsion) or sign (free) giving the lexicographically
// least list of generator images so results are reproducible.
void AbelianStructure::canonicalize() {
  for (std::size_t i = 0; i < torsion_.size(); ++i) {
    const BigInt& d = torsion_[i];
    if (d > 100000) continue;
    const long dl = d.get_si();
    long best_unit = 1;
    std::vector<BigInt> best;
    for (long u = 1; u < dl; ++u) {
      if (std::gcd(u, dl) != 1) continue;
      std::vector<BigInt> cand;
      for (const auto& img : images_) {
        BigInt v = img[i] * u;
        mpz_fdiv_r(v.get_mpz_t(), v.get_mpz_t(), d.get_mpz_t());
        cand.push_back(v);
      }
      if (best.empty() || cand < best) {
        best = std::move(cand);
        best_unit = u;
      }
    }
    for (auto& img : images_) {
      img[i] *= best_unit;
      mpz_fdiv_r(img[i].get_mpz_t(), img[i].get_mpz_t(), d.get_mpz_t());
    }
  }
  for (std::size_t j = torsion_.size(); j < dimension(); ++j) {
    auto first = std::find_if(images_.begin(), images_.end(), [j](const auto& img) { return img[j] != 0; });
    if (first != images_.end() && (*first)[j] < 0)
      for (auto& img : images_) img[j] = -img[j];
  }
}

AbelianElement AbelianStructure::image(const Word& w) const {
  AbelianElement out = zero();
  for (Letter l : w) {
    const auto& img = images_.at(l.generator());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (l.inverted()) {
        out[i] -= img[i];
      } else {
        out[i] += img[i];
      }
    }
  }
  reduce(out);
  return out;
}

AbelianElement AbelianStructure::image(const SyllableWord& s) const {
  AbelianElement out = zero();
  for (const auto& syl : s) {
    const auto& img = images_.at(syl.generator);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += syl.power * img[i];
  }
  reduce(out);
  return out;
}

AbelianElement AbelianStructure::add(const AbelianElement& x, const AbelianElement& y) const {
  AbelianElement out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y.at(i);
  reduce(out);
  return out;
}

bool AbelianStructure::is_zero(const AbelianElement& e) const {
  return std::all_of(e.begin(), e.end(), [](const BigInt& v) { return v == 0; });
}

std::string AbelianStructure::describe() const {
  std::string out;
  for (const auto& d : torsion_) out += (out.empty() ? "" : " + ") + std::string("Z/") + d.get_str();
  for (std::size_t i = 0; i < free_rank_; ++i) out += (out.empty() ? "" : " + ") + std::string("Z");
  return out.empty() ? "0" : out;
}

}  // namespace cdp
