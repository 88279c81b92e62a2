#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cdp/abelian.hpp"
#include "cdp/bigint.hpp"
#include "cdp/pcp.hpp"
#include "cdp/rewriting.hpp"
#include "cdp/sl2.hpp"
#include "cdp/syllable.hpp"
#include "cdp/word.hpp"

namespace cdp {

enum class Engine { bs12, gmbs23, sl2z, pcp };

std::string_view to_string(Engine e);

/// A group element in normal form: exponent slots plus the normal-form
/// spelling (run-length encoded) and its letter length.
struct NormalForm {
  ExponentVector exponents;
  SyllableWord spelling;
  BigInt length;

  bool operator==(const NormalForm& o) const { return exponents == o.exponents && spelling == o.spelling; }
};

struct CollectionLimits {
  std::uint64_t max_steps = 10'000'000;
};

/// Rewrite-step allowance shared by one top-level operation.
class StepBudget {
 public:
  explicit StepBudget(std::uint64_t limit) : remaining_(limit) {}
  void spend(std::uint64_t n = 1);
  std::uint64_t remaining() const { return remaining_; }

 private:
  std::uint64_t remaining_;
};

/// A finitely presented group with a normal-form engine. Immutable after
/// construction and safe to share between threads.
class Group {
 public:
  virtual ~Group() = default;

  const std::string& name() const { return name_; }
  Engine engine() const { return engine_; }
  const Alphabet& alphabet() const { return presentation_.alphabet; }
  const Presentation& presentation() const { return presentation_; }
  const AbelianStructure& abelianization() const { return abelian_; }
  const CollectionLimits& limits() const { return limits_; }

  virtual std::size_t slot_count() const = 0;
  virtual std::vector<std::string> slot_names() const = 0;

  NormalForm identity() const;

  /// x <- x * g^power, keeping x in normal form.
  virtual void apply(NormalForm& x, int generator, const BigInt& power, StepBudget& budget) const = 0;
  void apply(NormalForm& x, Letter l) const;

  NormalForm normal_form(const Word& w) const;
  NormalForm normal_form(const SyllableWord& s) const;
  ExponentVector exponents(const Word& w) const { return normal_form(w).exponents; }

  virtual NormalForm multiply(const NormalForm& a, const NormalForm& b) const;
  NormalForm invert(const NormalForm& a) const;
  /// t^-1 u t
  NormalForm conjugate(const NormalForm& u, const NormalForm& t) const;
  bool equal(const Word& u, const Word& v) const { return normal_form(u) == normal_form(v); }

  Word multiply(const Word& u, const Word& v) const;
  Word invert(const Word& u) const;
  Word conjugate(const Word& u, const Word& t) const;

  BigInt element_length(const Word& w) const { return normal_form(w).length; }

  AbelianElement abelianization_image(const Word& w) const { return abelian_.image(w); }
  AbelianElement abelianization_image(const NormalForm& x) const { return abelian_.image(x.spelling); }

  /// Token spelling of a normal form.
  std::string format(const NormalForm& x) const { return cdp::format(alphabet(), x.spelling); }
  /// Reads token syntax (exponents may be arbitrarily large) into normal form.
  NormalForm parse(std::string_view text) const;

 protected:
  Group(std::string name, Engine engine, Presentation presentation, CollectionLimits limits);
  virtual ExponentVector identity_exponents() const { return ExponentVector(slot_count()); }
  /// Computes the abelianization and checks every relator collapses to 1.
  void finish_construction();

 private:
  std::string name_;
  Engine engine_;
  Presentation presentation_;
  CollectionLimits limits_;
  AbelianStructure abelian_;
};

using GroupHandle = std::shared_ptr<const Group>;

/// BS(1,2) = <a, b | b a b^-1 = a^2>, normal form b^-e1 a^e2 b^e3.
GroupHandle make_bs12(CollectionLimits limits = {});
/// GMBS(2,3) = <q1, q2, b | q1 b q1^-1 = b^2, q2 b q2^-1 = b^3, [q1, q2]>,
/// normal form q1^-e1 q2^-e2 b^e3 q1^e4 q2^e5.
GroupHandle make_gmbs23(CollectionLimits limits = {});
/// SL(2,Z) = <S, R | S^4, S^2 R^-3>, shortlex normal form by rewriting.
/// Exponent slots are the matrix entries (a, b, c, d).
GroupHandle make_sl2z(CollectionLimits limits = {});
GroupHandle make_pcp(std::string name, PcPresentation p, CollectionLimits limits = {});

/// Text of a built-in pc-presentation ("heisenberg", "oxu-sqrt2", "dinf").
std::string_view builtin_pcp(std::string_view name);
std::vector<std::string> builtin_group_names();

/// Built-in name or a path to a pc-presentation file.
GroupHandle make_group(std::string_view spec, CollectionLimits limits = {});

/// Matrix view of an SL(2,Z) normal form.
Sl2Matrix sl2_matrix(const NormalForm& x);

/// The completed SL(2,Z) rewriting system (built once).
const RewritingSystem& sl2_rewriting_system();

/// The pc-presentation behind a pcp-engine group; throws for other engines.
const PcPresentation& pc_presentation(const Group& g);

}  // namespace cdp
