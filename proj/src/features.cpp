#include "cdp/features.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "cdp/error.hpp"

namespace cdp {

namespace {

std::string key_of(std::span<const Letter> letters) {
  std::string k;
  k.reserve(letters.size());
  for (Letter l : letters) k.push_back(static_cast<char>(l.code() + 64));
  return k;
}

std::string element_key(const NormalForm& x) {
  std::string k;
  for (const auto& e : x.exponents) k += e.get_str() + ",";
  return k;
}

void extend_reduced(std::size_t symbols, std::size_t length, std::vector<Letter>& prefix,
                    std::vector<Word>& out) {
  if (prefix.size() == length) {
    out.push_back(Word(std::span<const Letter>(prefix)));
    return;
  }
  for (std::size_t r = 0; r < symbols; ++r) {
    const Letter l = Letter::from_rank(static_cast<int>(r));
    if (!prefix.empty() && prefix.back() == l.inverse()) continue;
    prefix.push_back(l);
    extend_reduced(symbols, length, prefix, out);
    prefix.pop_back();
  }
}

std::vector<Word> reduced_words(std::size_t generators, std::size_t length) {
  std::vector<Word> out;
  std::vector<Letter> prefix;
  extend_reduced(2 * generators, length, prefix, out);
  return out;
}

void finish_index(CountingIndex& idx, const Alphabet& alphabet) {
  for (auto& e : idx.entries) std::sort(e.begin(), e.end());
  std::sort(idx.entries.begin(), idx.entries.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  idx.labels.clear();
  idx.lookup.clear();
  for (std::size_t i = 0; i < idx.entries.size(); ++i) {
    idx.labels.push_back(alphabet.label(idx.entries[i].front()));
    for (const auto& w : idx.entries[i]) idx.lookup.emplace(key_of(w.letters()), static_cast<int>(i));
  }
}

}  // namespace

std::string_view to_string(FeatureKind k) {
  static constexpr std::string_view names[] = {"n0", "n1", "f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7", "fm"};
  return names[static_cast<int>(k)];
}

FeatureKind parse_feature_kind(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(FeatureKind::fm); ++i)
    if (to_string(static_cast<FeatureKind>(i)) == s) return static_cast<FeatureKind>(i);
  throw Error(ErrorCode::config_error, "unknown feature kind '" + std::string(s) + "'");
}

int CountingIndex::find(const LetterString& spelling) const {
  auto it = lookup.find(key_of(spelling));
  return it == lookup.end() ? -1 : it->second;
}

CountingIndex build_index(const Group& g, std::size_t l) {
  if (l < 1 || l > 3) throw Error(ErrorCode::invalid_argument, "counting index middle length must be 1, 2 or 3");
  const std::size_t length = l + 2;
  const std::size_t n = g.alphabet().size();

  // Elements reachable by words shorter than the patterns.
  std::set<std::string> ball;
  std::vector<NormalForm> frontier{g.identity()};
  ball.insert(element_key(frontier.front()));
  for (std::size_t radius = 1; radius < length; ++radius) {
    std::vector<NormalForm> next;
    for (const auto& x : frontier)
      for (std::size_t r = 0; r < 2 * n; ++r) {
        NormalForm y = x;
        g.apply(y, Letter::from_rank(static_cast<int>(r)));
        if (ball.insert(element_key(y)).second) next.push_back(std::move(y));
      }
    frontier = std::move(next);
  }

  std::map<std::string, std::vector<Word>> by_element;
  for (const Word& w : reduced_words(n, length)) {
    const std::string k = element_key(g.normal_form(w));
    if (ball.count(k)) continue;
    by_element[k].push_back(w);
  }
  CountingIndex idx;
  idx.middle_length = l;
  for (auto& [k, spellings] : by_element) idx.entries.push_back(std::move(spellings));
  finish_index(idx, g.alphabet());
  return idx;
}

CountingIndex build_free_index(const Alphabet& alphabet, std::size_t l) {
  CountingIndex idx;
  idx.middle_length = l;
  for (const Word& w : reduced_words(alphabet.size(), l + 2)) idx.entries.push_back({w});
  finish_index(idx, alphabet);
  return idx;
}

FeatureVector count_subwords(const SyllableWord& w, const CountingIndex& idx, bool weighted) {
  FeatureVector out(idx.size(), 0.0);
  const std::size_t L = idx.pattern_length();
  std::vector<Letter> window;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Letter x(w[i].generator, w[i].power < 0);
    const BigInt n = abs(w[i].power);
    if (n >= L) {
      window.assign(L, x);
      const int e = idx.find(window);
      if (e >= 0) out[e] += BigInt(n - L + 1).get_d();
    }
    // Windows starting in the last k letters of this syllable, k < L.
    const std::size_t kmax = n < L ? n.get_ui() : L - 1;
    for (std::size_t k = 1; k <= kmax; ++k) {
      window.assign(k, x);
      for (std::size_t j = i + 1; j < w.size() && window.size() < L; ++j) {
        const Letter y(w[j].generator, w[j].power < 0);
        const BigInt m = abs(w[j].power);
        const std::size_t need = L - window.size();
        const std::size_t take = m < need ? m.get_ui() : need;
        window.insert(window.end(), take, y);
      }
      if (window.size() < L) continue;
      const int e = idx.find(window);
      if (e >= 0) out[e] += 1.0;
    }
  }
  if (weighted) {
    const double len = letter_length(w).get_d();
    if (len > 0)
      for (auto& v : out) v /= len;
  }
  return out;
}

FeatureVector count_subwords(const Word& w, const CountingIndex& idx, bool weighted) {
  return count_subwords(to_syllables(w), idx, weighted);
}

FeatureVector generator_count(const SyllableWord& w, std::size_t generator_count, bool weighted) {
  std::vector<BigInt> counts(generator_count);
  for (const auto& syl : w) counts.at(syl.generator) += abs(syl.power);
  FeatureVector out(generator_count);
  const double len = letter_length(w).get_d();
  for (std::size_t i = 0; i < generator_count; ++i)
    out[i] = weighted ? (len > 0 ? counts[i].get_d() / len : 0.0) : counts[i].get_d();
  return out;
}

FeatureVector nf_features(const NormalForm& x, bool weighted, bool strict) {
  FeatureVector out;
  out.reserve(x.exponents.size());
  if (weighted && x.length == 0) {
    if (strict) throw Error(ErrorCode::zero_length, "weighted normal-form features of the identity");
    return FeatureVector(x.exponents.size(), 0.0);
  }
  if (!weighted) {
    for (const auto& e : x.exponents) out.push_back(e.get_d());
    return out;
  }
  // Divide in extended precision so huge exponents keep their ratio.
  const mpf_class len(x.length, 128);
  for (const auto& e : x.exponents) {
    mpf_class q(e, 128);
    q /= len;
    out.push_back(q.get_d());
  }
  return out;
}

FeatureVector matrix_features(const Group& g, const NormalForm& x) {
  if (g.engine() != Engine::sl2z) throw Error(ErrorCode::invalid_argument, "matrix features need SL(2,Z)");
  const auto n = sl2_normalized(sl2_matrix(x));
  return FeatureVector(n.begin(), n.end());
}

FeatureKind pair_recipe_kind(std::string_view pair_name) {
  if (pair_name == "c0") return FeatureKind::n0;
  if (pair_name == "c1") return FeatureKind::n1;
  if (pair_name == "cm") return FeatureKind::fm;
  if (pair_name == "g0") return FeatureKind::f0;
  if (pair_name == "g1") return FeatureKind::f1;
  if (pair_name.size() == 2 && pair_name[0] == 'c' && pair_name[1] >= '2' && pair_name[1] <= '7')
    return static_cast<FeatureKind>(static_cast<int>(FeatureKind::f2) + (pair_name[1] - '2'));
  throw Error(ErrorCode::config_error, "unknown feature recipe '" + std::string(pair_name) + "'");
}

FeatureRecipe::FeatureRecipe(GroupHandle group, std::string pair_name)
    : group_(std::move(group)), name_(std::move(pair_name)), kind_(pair_recipe_kind(name_)) {
  if (kind_ == FeatureKind::fm && group_->engine() != Engine::sl2z)
    throw Error(ErrorCode::config_error, "recipe cm is only defined for SL(2,Z)");
  if (kind_ >= FeatureKind::f2 && kind_ <= FeatureKind::f7) {
    const std::size_t l = (static_cast<int>(kind_) - static_cast<int>(FeatureKind::f2)) / 2 + 1;
    index_ = build_index(*group_, l);
  }
}

std::size_t FeatureRecipe::word_dimension() const {
  switch (kind_) {
    case FeatureKind::n0:
    case FeatureKind::n1: return group_->slot_count();
    case FeatureKind::f0:
    case FeatureKind::f1: return group_->alphabet().size();
    case FeatureKind::fm: return 4;
    default: return index_.size();
  }
}

bool FeatureRecipe::discrete() const {
  switch (kind_) {
    case FeatureKind::n0:
    case FeatureKind::f0:
    case FeatureKind::f2:
    case FeatureKind::f4:
    case FeatureKind::f6: return true;
    default: return false;
  }
}

std::vector<std::string> FeatureRecipe::column_names() const {
  std::vector<std::string> base;
  switch (kind_) {
    case FeatureKind::n0:
    case FeatureKind::n1: base = group_->slot_names(); break;
    case FeatureKind::f0:
    case FeatureKind::f1: base = group_->alphabet().names(); break;
    case FeatureKind::fm: base = {"a", "b", "c", "d"}; break;
    default: base = index_.labels;
  }
  std::vector<std::string> out;
  for (const char* side : {"u.", "v."})
    for (const auto& b : base) out.push_back(side + b);
  return out;
}

FeatureVector FeatureRecipe::word_features(const NormalForm& x) const {
  switch (kind_) {
    case FeatureKind::n0: return nf_features(x, false);
    case FeatureKind::n1: return nf_features(x, true, false);
    case FeatureKind::f0: return generator_count(x.spelling, group_->alphabet().size(), false);
    case FeatureKind::f1: return generator_count(x.spelling, group_->alphabet().size(), true);
    case FeatureKind::fm: return matrix_features(*group_, x);
    default: {
      const bool weighted = (static_cast<int>(kind_) - static_cast<int>(FeatureKind::f2)) % 2 == 1;
      return count_subwords(x.spelling, index_, weighted);
    }
  }
}

FeatureVector FeatureRecipe::pair_features(const NormalForm& u, const NormalForm& v) const {
  FeatureVector out = word_features(u);
  const FeatureVector fv = word_features(v);
  out.insert(out.end(), fv.begin(), fv.end());
  return out;
}

void write_feature_csv(std::ostream& out, const std::vector<std::string>& columns,
                       const std::vector<FeatureVector>& rows, const std::vector<int>& labels) {
  for (const auto& c : columns) out << c << ',';
  out << "label\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (double v : rows[i]) out << v << ',';
    out << labels.at(i) << '\n';
  }
  out.precision(old);
}

}  // namespace cdp
