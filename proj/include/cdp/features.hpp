#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cdp/group.hpp"

namespace cdp {

using FeatureVector = std::vector<double>;

enum class FeatureKind { n0, n1, f0, f1, f2, f3, f4, f5, f6, f7, fm };

std::string_view to_string(FeatureKind k);
FeatureKind parse_feature_kind(std::string_view s);

/// Patterns x u y (x, y letters, |u| = l) used by the counting-subgraph
/// features. Each entry is a class of spellings of one group element; the
/// first spelling is the shortlex-least and serves as the label.
struct CountingIndex {
  std::size_t middle_length = 0;
  std::vector<std::vector<Word>> entries;
  std::vector<std::string> labels;

  std::size_t size() const { return entries.size(); }
  std::size_t pattern_length() const { return middle_length + 2; }
  /// Entry of a spelling, or -1 if the spelling is not admissible.
  int find(const LetterString& spelling) const;

  std::unordered_map<std::string, int> lookup;
};

/// Freely reduced, geodesic patterns of length l + 2, one entry per group
/// element (group-equal patterns merged).
CountingIndex build_index(const Group& g, std::size_t l);

/// Every freely reduced word of length l + 2 as its own entry.
CountingIndex build_free_index(const Alphabet& alphabet, std::size_t l);

/// Overlapping occurrence counts of each entry's spellings in `w`.
FeatureVector count_subwords(const SyllableWord& w, const CountingIndex& idx, bool weighted);
FeatureVector count_subwords(const Word& w, const CountingIndex& idx, bool weighted);

/// f0 / f1: occurrences of each generator (either sign).
FeatureVector generator_count(const SyllableWord& w, std::size_t generator_count, bool weighted);

/// n0 / n1: normal-form exponent slots. Weighted features of the identity
/// throw ZERO_LENGTH when `strict`, otherwise give the zero vector.
FeatureVector nf_features(const NormalForm& x, bool weighted, bool strict = true);

/// fm: matrix entries divided by the Frobenius norm (SL(2,Z) only).
FeatureVector matrix_features(const Group& g, const NormalForm& x);

/// A per-word feature kind for one group, concatenated over a pair.
/// Pair names: c0 = n0, c1 = n1, c2..c7 = f2..f7, cm = fm, g0/g1 = f0/f1.
class FeatureRecipe {
 public:
  FeatureRecipe(GroupHandle group, std::string pair_name);

  const std::string& name() const { return name_; }
  FeatureKind kind() const { return kind_; }
  const Group& group() const { return *group_; }
  std::size_t word_dimension() const;
  std::size_t dimension() const { return 2 * word_dimension(); }
  /// True when every value is an integer (usable by N-tuple networks).
  bool discrete() const;
  std::vector<std::string> column_names() const;

  FeatureVector word_features(const NormalForm& x) const;
  FeatureVector pair_features(const NormalForm& u, const NormalForm& v) const;

 private:
  GroupHandle group_;
  std::string name_;
  FeatureKind kind_;
  CountingIndex index_;
};

FeatureKind pair_recipe_kind(std::string_view pair_name);

/// CSV with a header row of column names followed by a `label` column.
void write_feature_csv(std::ostream& out, const std::vector<std::string>& columns,
                       const std::vector<FeatureVector>& rows, const std::vector<int>& labels);

}  // namespace cdp
