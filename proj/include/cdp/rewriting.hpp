#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cdp/word.hpp"

namespace cdp {

/// Unreduced letter string; rewriting needs rules such as `x x^-1 -> 1`
/// that a freely reduced Word cannot spell.
using LetterString = std::vector<Letter>;

/// Total order on the symmetric alphabet used for shortlex comparison.
/// `weights[letter.rank()]` is the letter's position in the ranking.
class Ranking {
 public:
  Ranking() = default;
  /// Default ranking x1 < x1^-1 < x2 < x2^-1 < ...
  explicit Ranking(std::size_t generator_count);
  /// Explicit ranking listing letters from smallest to largest.
  explicit Ranking(const std::vector<Letter>& order);

  int weight(Letter l) const { return weights_.at(l.rank()); }
  std::size_t symbol_count() const { return weights_.size(); }

  /// Length first, then lexicographic by weight.
  bool shortlex_less(const LetterString& u, const LetterString& v) const;
  bool shortlex_less(const Word& u, const Word& v) const;

 private:
  std::vector<int> weights_;
};

struct RewriteRule {
  LetterString lhs;
  LetterString rhs;
};

enum class CompletionStatus { confluent, budget_exceeded };

/// Shortlex string rewriting system over a group's symmetric alphabet.
class RewritingSystem {
 public:
  RewritingSystem(Alphabet alphabet, Ranking ranking);

  const Alphabet& alphabet() const { return alphabet_; }
  const Ranking& ranking() const { return ranking_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }
  bool confluent() const { return confluent_; }
  CompletionStatus status() const { return confluent_ ? CompletionStatus::confluent : CompletionStatus::budget_exceeded; }

  /// Rewrites to an irreducible string. Requires a confluent system
  /// (throws NOT_CONFLUENT otherwise).
  LetterString rewrite_nf(const LetterString& w) const;
  Word rewrite_nf(const Word& w) const;

  /// Appends `suffix` to the irreducible `nf` and rewrites in place.
  /// Returns the shortest length `nf` was cut back to along the way.
  std::size_t append_nf(LetterString& nf, const LetterString& suffix) const;

  std::size_t max_lhs_length() const;

  /// Rewrites with whatever rules are present, confluent or not.
  LetterString reduce(const LetterString& w) const;

  bool is_irreducible(const LetterString& w) const;

  /// Re-derives every critical pair and checks that both sides meet.
  bool verify_confluence() const;

  /// One `lhs -> rhs` line per rule in token syntax (identity as `1`).
  std::string dump() const;

 private:
  friend RewritingSystem kb_complete(const Presentation&, const Ranking&, std::size_t);

  void add_rule(RewriteRule rule);
  std::size_t reduce_onto(LetterString& out, const LetterString& suffix) const;
  void rebuild_index();
  std::vector<std::pair<LetterString, LetterString>> critical_pairs(const RewriteRule& a, const RewriteRule& b) const;

  Alphabet alphabet_;
  Ranking ranking_;
  std::vector<RewriteRule> rules_;
  // Rule indices bucketed by the rank of the last lhs letter.
  std::vector<std::vector<std::size_t>> by_last_;
  bool confluent_ = false;
};

/// Knuth-Bendix completion of `presentation` (free-cancellation rules are
/// seeded automatically). Returns a system flagged non-confluent if more
/// than `max_rules` rules would be needed.
RewritingSystem kb_complete(const Presentation& presentation, const Ranking& ranking,
                            std::size_t max_rules = 10000);

}  // namespace cdp
