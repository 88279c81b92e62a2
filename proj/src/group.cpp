#include "cdp/group.hpp"

#include <filesystem>
#include <mutex>

#include "cdp/error.hpp"

namespace cdp {

namespace {

constexpr std::string_view kHeisenberg = R"(# Discrete Heisenberg group: x, y, z with [x, y] = z central.
generators
  x y z
orders
  inf inf inf
relations
  x^-1 y x = y z^-1
  x y x^-1 = y z
  x^-1 z x = z
  x z x^-1 = z
  y^-1 z y = z
  y z y^-1 = z
)";

constexpr std::string_view kOxuSqrt2 = R"(# Z[sqrt 2] semidirect its unit group {+-1} x <1 + sqrt 2>.
# g1 = -1, g2 = 1 + sqrt 2, g3 = 1, g4 = sqrt 2. Hirsch length 3.
generators
  g1 g2 g3 g4
orders
  2 inf inf inf
relations
  g1^2 = 1
  g1^-1 g2 g1 = g2
  g1^-1 g3 g1 = g3^-1
  g1^-1 g4 g1 = g4^-1
  g2^-1 g3 g2 = g3 g4
  g2^-1 g4 g2 = g3^2 g4
  g2 g3 g2^-1 = g3^-1 g4
  g2 g4 g2^-1 = g3^2 g4^-1
  g3^-1 g4 g3 = g4
  g3 g4 g3^-1 = g4
)";

constexpr std::string_view kDinf = R"(# Infinite dihedral group.
generators
  r s
orders
  2 inf
relations
  r^2 = 1
  r^-1 s r = s^-1
)";

// Exponent shifts are bounded so that 2^k stays allocatable.
constexpr unsigned long kMaxShift = 1ul << 24;

unsigned long small_exponent(const BigInt& v) {
  if (v < 0 || v > BigInt(kMaxShift)) throw Error(ErrorCode::collection_overflow, "exponent shift too large");
  return v.get_ui();
}

// Largest k <= limit with p^k | v (v == 0 divides by anything).
unsigned long valuation(const BigInt& v, unsigned long p, unsigned long limit) {
  if (limit == 0) return 0;
  if (v == 0) return limit;
  if (p == 2) return std::min<unsigned long>(mpz_scan1(v.get_mpz_t(), 0), limit);
  BigInt rest;
  BigInt prime(p);
  const unsigned long k = mpz_remove(rest.get_mpz_t(), v.get_mpz_t(), prime.get_mpz_t());
  return std::min(k, limit);
}

BigInt power_of(unsigned long base, unsigned long exp) {
  BigInt out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, exp);
  return out;
}

Presentation make_presentation(std::vector<std::string> names, const std::vector<std::string>& relators) {
  Presentation p{Alphabet(std::move(names)), {}};
  for (const auto& r : relators) p.relators.push_back(p.alphabet.parse(r));
  return p;
}

class Bs12Group final : public Group {
 public:
  explicit Bs12Group(CollectionLimits limits)
      : Group("bs12", Engine::bs12, make_presentation({"a", "b"}, {"b a b^-1 a^-2"}), limits) {
    finish_construction();
  }

  std::size_t slot_count() const override { return 3; }
  std::vector<std::string> slot_names() const override { return {"e1", "e2", "e3"}; }

  void apply(NormalForm& x, int generator, const BigInt& power, StepBudget& budget) const override {
    budget.spend();
    auto& e = x.exponents;
    if (generator == 0) {
      e[1] += power * power_of(2, small_exponent(e[2]));
    } else if (power > 0) {
      e[2] += power;
    } else {
      const BigInt n = -power;
      if (e[2] >= n) {
        e[2] -= n;
      } else {
        const BigInt rest = n - e[2];
        e[2] = 0;
        e[0] += rest;
        e[1] *= power_of(2, small_exponent(rest));
      }
    }
    const unsigned long k = valuation(e[1], 2, std::min(small_exponent(e[0]), small_exponent(e[2])));
    if (k > 0) {
      e[0] -= k;
      e[2] -= k;
      mpz_fdiv_q_2exp(e[1].get_mpz_t(), e[1].get_mpz_t(), k);
    }
    x.spelling.clear();
    append_syllable(x.spelling, 1, -e[0]);
    append_syllable(x.spelling, 0, e[1]);
    append_syllable(x.spelling, 1, e[2]);
    x.length = e[0] + abs(e[1]) + e[2];
  }
};

class Gmbs23Group final : public Group {
 public:
  explicit Gmbs23Group(CollectionLimits limits)
      : Group("gmbs23", Engine::gmbs23,
              make_presentation({"q1", "q2", "b"}, {"q1 b q1^-1 b^-2", "q2 b q2^-1 b^-3", "q1 q2 q1^-1 q2^-1"}),
              limits) {
    finish_construction();
  }

  std::size_t slot_count() const override { return 5; }
  std::vector<std::string> slot_names() const override { return {"e1", "e2", "e3", "e4", "e5"}; }

  void apply(NormalForm& x, int generator, const BigInt& power, StepBudget& budget) const override {
    budget.spend();
    auto& e = x.exponents;
    if (generator == 2) {
      e[2] += power * power_of(2, small_exponent(e[3])) * power_of(3, small_exponent(e[4]));
    } else {
      // q1 touches (e1, e4) with factor 2, q2 touches (e2, e5) with factor 3.
      BigInt& neg = e[generator == 0 ? 0 : 1];
      BigInt& pos = e[generator == 0 ? 3 : 4];
      const unsigned long factor = generator == 0 ? 2 : 3;
      if (power > 0) {
        pos += power;
      } else {
        const BigInt n = -power;
        if (pos >= n) {
          pos -= n;
        } else {
          const BigInt rest = n - pos;
          pos = 0;
          neg += rest;
          e[2] *= power_of(factor, small_exponent(rest));
        }
      }
    }
    const unsigned long k2 = valuation(e[2], 2, std::min(small_exponent(e[0]), small_exponent(e[3])));
    if (k2 > 0) {
      e[0] -= k2;
      e[3] -= k2;
      mpz_fdiv_q_2exp(e[2].get_mpz_t(), e[2].get_mpz_t(), k2);
    }
    const unsigned long k3 = valuation(e[2], 3, std::min(small_exponent(e[1]), small_exponent(e[4])));
    if (k3 > 0) {
      e[1] -= k3;
      e[4] -= k3;
      mpz_divexact(e[2].get_mpz_t(), e[2].get_mpz_t(), power_of(3, k3).get_mpz_t());
    }
    x.spelling.clear();
    append_syllable(x.spelling, 0, -e[0]);
    append_syllable(x.spelling, 1, -e[1]);
    append_syllable(x.spelling, 2, e[2]);
    append_syllable(x.spelling, 0, e[3]);
    append_syllable(x.spelling, 1, e[4]);
    x.length = e[0] + e[1] + abs(e[2]) + e[3] + e[4];
  }
};

Presentation sl2_presentation() { return make_presentation({"S", "R"}, {"S^4", "S^2 R^-3"}); }

class Sl2Group final : public Group {
 public:
  explicit Sl2Group(CollectionLimits limits)
      : Group("sl2z", Engine::sl2z, sl2_presentation(), limits), system_(sl2_rewriting_system()) {
    finish_construction();
  }

  std::size_t slot_count() const override { return 4; }
  std::vector<std::string> slot_names() const override { return {"a", "b", "c", "d"}; }

  void apply(NormalForm& x, int generator, const BigInt& power, StepBudget& budget) const override {
    // S^4 = R^6 = 1, so exponents only matter mod 12.
    BigInt p;
    mpz_fdiv_r_ui(p.get_mpz_t(), power.get_mpz_t(), 12);
    const long reps = p.get_si();
    if (reps == 0) return;
    budget.spend(static_cast<std::uint64_t>(reps));
    const Letter l(generator, false);
    const Sl2Matrix step = sl2_letter(l);
    auto& e = x.exponents;
    BigInt t0, t1;
    for (long k = 0; k < reps; ++k)
      for (std::size_t row = 0; row < 4; row += 2) {
        t0 = e[row] * step.a + e[row + 1] * step.c;
        t1 = e[row] * step.b + e[row + 1] * step.d;
        swap(e[row], t0);
        swap(e[row + 1], t1);
      }
    const LetterString tail(static_cast<std::size_t>(reps), l);
    // Rewrite only a window at the end; redo on the full word if the
    // rewriting reaches too close to the window start.
    const std::size_t total = to_size(x.length);
    const std::size_t window = std::min(total, 8 * max_lhs_);
    LetterString letters = trailing_letters(x.spelling, window);
    std::size_t kept = total - window;
    if (system_.append_nf(letters, tail) < max_lhs_ && kept > 0) {
      letters = trailing_letters(x.spelling, total);
      system_.append_nf(letters, tail);
      kept = 0;
    }
    drop_trailing_letters(x.spelling, total - kept);
    append_letters(x.spelling, letters);
    x.length = static_cast<unsigned long>(kept + letters.size());
  }

 protected:
  ExponentVector identity_exponents() const override { return {1, 0, 0, 1}; }

 private:
  static std::size_t to_size(const BigInt& n) { return static_cast<std::size_t>(n.get_ui()); }

  static LetterString trailing_letters(const SyllableWord& s, std::size_t count) {
    LetterString out(count);
    std::size_t pos = count;
    for (auto it = s.rbegin(); it != s.rend() && pos > 0; ++it) {
      const long p = it->power.get_si();
      const Letter l(it->generator, p < 0);
      for (std::size_t k = std::min<std::size_t>(pos, static_cast<std::size_t>(std::labs(p))); k > 0; --k)
        out[--pos] = l;
    }
    return out;
  }

  static void drop_trailing_letters(SyllableWord& s, std::size_t count) {
    while (count > 0) {
      const long p = s.back().power.get_si();
      const std::size_t n = static_cast<std::size_t>(std::labs(p));
      if (n > count) {
        s.back().power = p < 0 ? p + static_cast<long>(count) : p - static_cast<long>(count);
        return;
      }
      count -= n;
      s.pop_back();
    }
  }

  static void append_letters(SyllableWord& s, const LetterString& letters) {
    for (std::size_t i = 0; i < letters.size();) {
      std::size_t j = i;
      while (j < letters.size() && letters[j] == letters[i]) ++j;
      const long run = static_cast<long>(j - i);
      append_syllable(s, letters[i].generator(), BigInt(letters[i].inverted() ? -run : run));
      i = j;
    }
  }

  const RewritingSystem& system_;
  std::size_t max_lhs_ = sl2_rewriting_system().max_lhs_length();
};

class PcpGroup final : public Group {
 public:
  PcpGroup(std::string name, PcPresentation p, CollectionLimits limits)
      : Group(std::move(name), Engine::pcp, Presentation{p.alphabet, p.relators()}, limits), pcp_(std::move(p)) {
    pcp_.validate();
    finish_construction();
  }

  std::size_t slot_count() const override { return pcp_.size(); }
  std::vector<std::string> slot_names() const override { return pcp_.alphabet.names(); }

  void apply(NormalForm& x, int generator, const BigInt& power, StepBudget& budget) const override {
    Collector c(pcp_, budget.remaining());
    c.multiply_power(x.exponents, static_cast<std::size_t>(generator), power);
    budget.spend(std::max<std::uint64_t>(c.steps(), 1));
    x.spelling.clear();
    x.length = 0;
    for (std::size_t i = 0; i < x.exponents.size(); ++i) {
      append_syllable(x.spelling, static_cast<int>(i), x.exponents[i]);
      x.length += abs(x.exponents[i]);
    }
  }

  const PcPresentation& pcp() const { return pcp_; }

 private:
  PcPresentation pcp_;
};

}  // namespace

std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::bs12: return "BS12";
    case Engine::gmbs23: return "GMBS23";
    case Engine::sl2z: return "SL2Z";
    case Engine::pcp: return "PCP";
  }
  return "?";
}

void StepBudget::spend(std::uint64_t n) {
  if (n > remaining_) throw Error(ErrorCode::collection_overflow, "normal form computation exceeded its step budget");
  remaining_ -= n;
}

Group::Group(std::string name, Engine engine, Presentation presentation, CollectionLimits limits)
    : name_(std::move(name)), engine_(engine), presentation_(std::move(presentation)), limits_(limits) {}

void Group::finish_construction() {
  abelian_ = AbelianStructure(alphabet().size(), presentation_.relators);
  const NormalForm one = identity();
  for (const auto& r : presentation_.relators)
    if (!(normal_form(r) == one))
      throw Error(ErrorCode::invalid_presentation,
                  "relator " + alphabet().format(r) + " does not collect to the identity in " + name_);
}

NormalForm Group::identity() const { return {identity_exponents(), {}, 0}; }

void Group::apply(NormalForm& x, Letter l) const {
  StepBudget budget(limits_.max_steps);
  apply(x, l.generator(), BigInt(l.sign()), budget);
}

NormalForm Group::normal_form(const Word& w) const { return normal_form(to_syllables(w)); }

NormalForm Group::normal_form(const SyllableWord& s) const {
  NormalForm x = identity();
  StepBudget budget(limits_.max_steps);
  for (const auto& syl : s) {
    if (syl.generator < 0 || static_cast<std::size_t>(syl.generator) >= alphabet().size())
      throw Error(ErrorCode::invalid_argument, "letter outside the alphabet of " + name_);
    apply(x, syl.generator, syl.power, budget);
  }
  return x;
}

NormalForm Group::multiply(const NormalForm& a, const NormalForm& b) const {
  NormalForm x = a;
  StepBudget budget(limits_.max_steps);
  for (const auto& syl : b.spelling) apply(x, syl.generator, syl.power, budget);
  return x;
}

NormalForm Group::invert(const NormalForm& a) const { return normal_form(inverse(a.spelling)); }

NormalForm Group::conjugate(const NormalForm& u, const NormalForm& t) const {
  return multiply(multiply(invert(t), u), t);
}

Word Group::multiply(const Word& u, const Word& v) const { return to_word(normal_form(u * v).spelling); }
Word Group::invert(const Word& u) const { return to_word(normal_form(u.inverse()).spelling); }
Word Group::conjugate(const Word& u, const Word& t) const {
  return to_word(conjugate(normal_form(u), normal_form(t)).spelling);
}

NormalForm Group::parse(std::string_view text) const { return normal_form(parse_syllables(alphabet(), text)); }

GroupHandle make_bs12(CollectionLimits limits) { return std::make_shared<Bs12Group>(limits); }
GroupHandle make_gmbs23(CollectionLimits limits) { return std::make_shared<Gmbs23Group>(limits); }
GroupHandle make_sl2z(CollectionLimits limits) { return std::make_shared<Sl2Group>(limits); }
GroupHandle make_pcp(std::string name, PcPresentation p, CollectionLimits limits) {
  return std::make_shared<PcpGroup>(std::move(name), std::move(p), limits);
}

std::string_view builtin_pcp(std::string_view name) {
  if (name == "heisenberg") return kHeisenberg;
  if (name == "oxu-sqrt2") return kOxuSqrt2;
  if (name == "dinf") return kDinf;
  throw Error(ErrorCode::config_error, "unknown built-in pc-presentation '" + std::string(name) + "'");
}

std::vector<std::string> builtin_group_names() {
  return {"bs12", "gmbs23", "sl2z", "heisenberg", "oxu-sqrt2", "dinf"};
}

GroupHandle make_group(std::string_view spec, CollectionLimits limits) {
  if (spec == "bs12") return make_bs12(limits);
  if (spec == "gmbs23") return make_gmbs23(limits);
  if (spec == "sl2z") return make_sl2z(limits);
  if (spec == "heisenberg" || spec == "oxu-sqrt2" || spec == "dinf")
    return make_pcp(std::string(spec), parse_pcp(builtin_pcp(spec)), limits);
  const std::filesystem::path path{std::string(spec)};
  if (std::filesystem::exists(path)) return make_pcp(path.stem().string(), load_pcp(path), limits);
  throw Error(ErrorCode::config_error, "unknown group '" + std::string(spec) + "' (not a built-in name or a file)");
}

Sl2Matrix sl2_matrix(const NormalForm& x) {
  if (x.exponents.size() != 4) throw Error(ErrorCode::invalid_argument, "not an SL(2,Z) normal form");
  return {x.exponents[0], x.exponents[1], x.exponents[2], x.exponents[3]};
}

const RewritingSystem& sl2_rewriting_system() {
  static const RewritingSystem system = [] {
    RewritingSystem s = kb_complete(sl2_presentation(), Ranking(2));
    if (!s.confluent()) throw Error(ErrorCode::completion_budget_exceeded, "SL(2,Z) completion did not converge");
    return s;
  }();
  return system;
}

const PcPresentation& pc_presentation(const Group& g) {
  const auto* p = dynamic_cast<const PcpGroup*>(&g);
  if (!p) throw Error(ErrorCode::invalid_argument, g.name() + " is not given by a pc-presentation");
  return p->pcp();
}

}  // namespace cdp
