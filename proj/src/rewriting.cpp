#include "cdp/rewriting.hpp"

#include <algorithm>
#include <deque>

#include "cdp/error.hpp"

namespace cdp {

Ranking::Ranking(std::size_t generator_count) : weights_(2 * generator_count) {
  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] = static_cast<int>(i);
}

Ranking::Ranking(const std::vector<Letter>& order) : weights_(order.size(), -1) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto rank = static_cast<std::size_t>(order[i].rank());
    if (rank >= weights_.size() || weights_[rank] != -1)
      throw Error(ErrorCode::invalid_argument, "ranking must list every letter exactly once");
    weights_[rank] = static_cast<int>(i);
  }
}

bool Ranking::shortlex_less(const LetterString& u, const LetterString& v) const {
  if (u.size() != v.size()) return u.size() < v.size();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const int a = weight(u[i]);
    const int b = weight(v[i]);
    if (a != b) return a < b;
  }
  return false;
}

bool Ranking::shortlex_less(const Word& u, const Word& v) const {
  return shortlex_less(LetterString(u.begin(), u.end()), LetterString(v.begin(), v.end()));
}

RewritingSystem::RewritingSystem(Alphabet alphabet, Ranking ranking)
    : alphabet_(std::move(alphabet)), ranking_(std::move(ranking)) {
  if (ranking_.symbol_count() != 2 * alphabet_.size())
    throw Error(ErrorCode::invalid_argument, "ranking size does not match alphabet");
  rebuild_index();
}

void RewritingSystem::rebuild_index() {
  by_last_.assign(2 * alphabet_.size(), {});
  for (std::size_t i = 0; i < rules_.size(); ++i) by_last_[rules_[i].lhs.back().rank()].push_back(i);
}

void RewritingSystem::add_rule(RewriteRule rule) {
  rules_.push_back(std::move(rule));
  by_last_[rules_.back().lhs.back().rank()].push_back(rules_.size() - 1);
}

LetterString RewritingSystem::reduce(const LetterString& w) const {
  LetterString out;
  out.reserve(w.size());
  reduce_onto(out, w);
  return out;
}

std::size_t RewritingSystem::reduce_onto(LetterString& out, const LetterString& suffix) const {
  LetterString pending(suffix.rbegin(), suffix.rend());
  std::size_t low = out.size();
  while (!pending.empty()) {
    out.push_back(pending.back());
    pending.pop_back();
    // `out` was irreducible before the push, so a match must end here.
    for (std::size_t idx : by_last_[out.back().rank()]) {
      const auto& lhs = rules_[idx].lhs;
      if (lhs.size() > out.size() || !std::equal(lhs.rbegin(), lhs.rend(), out.rbegin())) continue;
      out.resize(out.size() - lhs.size());
      low = std::min(low, out.size());
      const auto& rhs = rules_[idx].rhs;
      pending.insert(pending.end(), rhs.rbegin(), rhs.rend());
      break;
    }
  }
  return low;
}

std::size_t RewritingSystem::append_nf(LetterString& nf, const LetterString& suffix) const {
  if (!confluent_) throw Error(ErrorCode::not_confluent, "rewriting system is a flagged partial system");
  return reduce_onto(nf, suffix);
}

std::size_t RewritingSystem::max_lhs_length() const {
  std::size_t m = 0;
  for (const auto& r : rules_) m = std::max(m, r.lhs.size());
  return m;
}

LetterString RewritingSystem::rewrite_nf(const LetterString& w) const {
  if (!confluent_) throw Error(ErrorCode::not_confluent, "rewriting system is a flagged partial system");
  return reduce(w);
}

Word RewritingSystem::rewrite_nf(const Word& w) const {
  const LetterString nf = rewrite_nf(LetterString(w.begin(), w.end()));
  return Word(nf);
}

bool RewritingSystem::is_irreducible(const LetterString& w) const { return reduce(w) == w; }

std::vector<std::pair<LetterString, LetterString>> RewritingSystem::critical_pairs(const RewriteRule& a,
                                                                                    const RewriteRule& b) const {
  std::vector<std::pair<LetterString, LetterString>> out;
  const auto& la = a.lhs;
  const auto& lb = b.lhs;
  const std::size_t max_overlap = std::min(la.size(), lb.size()) - 1;
  for (std::size_t k = 1; k <= max_overlap; ++k) {
    if (!std::equal(la.end() - static_cast<std::ptrdiff_t>(k), la.end(), lb.begin())) continue;
    // la = x·o, lb = o·y: the word x·o·y rewrites two ways.
    LetterString left = a.rhs;
    left.insert(left.end(), lb.begin() + static_cast<std::ptrdiff_t>(k), lb.end());
    LetterString right(la.begin(), la.end() - static_cast<std::ptrdiff_t>(k));
    right.insert(right.end(), b.rhs.begin(), b.rhs.end());
    out.emplace_back(std::move(left), std::move(right));
  }
  return out;
}

bool RewritingSystem::verify_confluence() const {
  for (const auto& a : rules_)
    for (const auto& b : rules_)
      for (const auto& [l, r] : critical_pairs(a, b))
        if (reduce(l) != reduce(r)) return false;
  // Interreduced: no lhs contains another.
  for (std::size_t i = 0; i < rules_.size(); ++i)
    for (std::size_t j = 0; j < rules_.size(); ++j) {
      if (i == j) continue;
      const auto& big = rules_[i].lhs;
      const auto& small = rules_[j].lhs;
      if (std::search(big.begin(), big.end(), small.begin(), small.end()) != big.end()) return false;
    }
  return true;
}

std::string RewritingSystem::dump() const {
  auto spell = [this](const LetterString& s) {
    if (s.empty()) return std::string("1");
    std::string out;
    for (Letter l : s) out += (out.empty() ? "" : " ") + alphabet_.letter_name(l);
    return out;
  };
  std::string out;
  for (const auto& r : rules_) out += spell(r.lhs) + " -> " + spell(r.rhs) + "\n";
  return out;
}

RewritingSystem kb_complete(const Presentation& presentation, const Ranking& ranking, std::size_t max_rules) {
  RewritingSystem sys(presentation.alphabet, ranking);
  std::deque<std::pair<LetterString, LetterString>> pending;
  for (std::size_t g = 0; g < presentation.alphabet.size(); ++g) {
    const Letter x(static_cast<int>(g), false);
    pending.push_back({{x, x.inverse()}, {}});
    pending.push_back({{x.inverse(), x}, {}});
  }
  for (const auto& r : presentation.relators) pending.push_back({LetterString(r.begin(), r.end()), {}});

  while (!pending.empty()) {
    auto [lhs, rhs] = std::move(pending.front());
    pending.pop_front();
    lhs = sys.reduce(lhs);
    rhs = sys.reduce(rhs);
    if (lhs == rhs) continue;
    if (ranking.shortlex_less(lhs, rhs)) std::swap(lhs, rhs);

    RewriteRule fresh{lhs, rhs};
    // Interreduce: rules whose lhs contains the new lhs become equations again.
    std::vector<RewriteRule> kept;
    kept.reserve(sys.rules_.size() + 1);
    for (auto& rule : sys.rules_) {
      if (std::search(rule.lhs.begin(), rule.lhs.end(), lhs.begin(), lhs.end()) != rule.lhs.end()) {
        pending.emplace_back(std::move(rule.lhs), std::move(rule.rhs));
      } else {
        kept.push_back(std::move(rule));
      }
    }
    kept.push_back(fresh);
    sys.rules_ = std::move(kept);
    sys.rebuild_index();
    for (auto& rule : sys.rules_) rule.rhs = sys.reduce(rule.rhs);

    if (sys.rules_.size() > max_rules) {
      sys.confluent_ = false;
      return sys;
    }
    for (const auto& other : sys.rules_) {
      for (auto& cp : sys.critical_pairs(fresh, other)) pending.push_back(std::move(cp));
      for (auto& cp : sys.critical_pairs(other, fresh)) pending.push_back(std::move(cp));
    }
  }
  // Canonical rule order for stable dumps.
  std::sort(sys.rules_.begin(), sys.rules_.end(), [&](const RewriteRule& a, const RewriteRule& b) {
    return ranking.shortlex_less(a.lhs, b.lhs);
  });
  sys.rebuild_index();
  sys.confluent_ = sys.verify_confluence();
  return sys;
}

}  // namespace cdp
