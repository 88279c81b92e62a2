#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cdp/error.hpp"
#include "cdp/features.hpp"
#include "oracles.hpp"

using namespace cdp;

namespace {

const Letter a(0, false), A(0, true), b(1, false), B(1, true);

// Plain sliding-window count of one pattern.
int naive_count(const Word& w, const Word& pattern) {
  int n = 0;
  for (std::size_t i = 0; i + pattern.size() <= w.size(); ++i)
    if (std::equal(pattern.begin(), pattern.end(), w.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
  return n;
}

// Number of elements at geodesic distance exactly `radius`, by exhaustive
// evaluation of all reduced words in an independent model.
template <class Eval>
std::size_t sphere_size(int generators, std::size_t radius, Eval eval) {
  std::map<std::string, std::size_t> best;
  std::vector<std::vector<Letter>> layer{{}};
  for (std::size_t len = 0; len <= radius; ++len) {
    std::vector<std::vector<Letter>> next;
    for (const auto& w : layer) {
      const std::string k = eval(Word(std::span<const Letter>(w)));
      best.emplace(k, len);
      if (len == radius) continue;
      for (int r = 0; r < 2 * generators; ++r) {
        const Letter l = Letter::from_rank(r);
        if (!w.empty() && w.back() == l.inverse()) continue;
        auto x = w;
        x.push_back(l);
        next.push_back(std::move(x));
      }
    }
    layer = std::move(next);
  }
  std::size_t n = 0;
  for (const auto& [k, d] : best) n += d == radius;
  return n;
}

std::string bs_key(const Word& w) {
  const auto g = oracle::bs_eval(w);
  return g.x.get_str() + "|" + std::to_string(g.k);
}

std::string sl2_key(const Word& w) {
  const auto m = oracle::sl2_eval(w);
  return m[0].get_str() + "," + m[1].get_str() + "," + m[2].get_str() + "," + m[3].get_str();
}

}  // namespace

TEST_CASE("free index enumerates all reduced words") {
  const CountingIndex idx = build_free_index(Alphabet({"a", "b"}), 1);
  CHECK(idx.size() == 36);
  CHECK(idx.labels.front() == "aaa");
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) CHECK(idx.entries[i].front() < idx.entries[i + 1].front());
}

TEST_CASE("group index equals the geodesic sphere of the pattern length") {
  auto bs = make_bs12();
  auto sl = make_sl2z();
  const CountingIndex bs1 = build_index(*bs, 1), bs2 = build_index(*bs, 2), sl1 = build_index(*sl, 1);
  CHECK(bs1.size() == sphere_size(2, 3, bs_key));
  CHECK(bs2.size() == sphere_size(2, 4, bs_key));
  CHECK(sl1.size() == sphere_size(2, 3, sl2_key));
  CHECK(bs1.size() == 26);
  CHECK(bs2.size() == 50);
  CHECK(sl1.size() == 12);
}

TEST_CASE("index invariants") {
  for (const char* name : {"bs12", "sl2z", "gmbs23"}) {
    auto g = make_group(name);
    const CountingIndex idx = build_index(*g, 1);
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (const Word& w : idx.entries[i]) {
        CHECK(w.size() == 3);
        CHECK(g->element_length(w) > 0);
        CHECK(idx.find(LetterString(w.begin(), w.end())) == static_cast<int>(i));
        // same element as the label, and not reachable by anything shorter
        CHECK(g->normal_form(w) == g->normal_form(idx.entries[i].front()));
      }
      std::ostringstream key;
      for (const auto& e : g->normal_form(idx.entries[i].front()).exponents) key << e << ',';
      CHECK(seen.emplace(key.str(), 0).second);
    }
  }
}

TEST_CASE("window counts") {
  const CountingIndex idx = build_free_index(Alphabet({"a", "b"}), 1);
  auto entry = [&](const Word& w) { return static_cast<std::size_t>(idx.find(LetterString(w.begin(), w.end()))); };
  CHECK(count_subwords(Word{a, b, a}, idx, false)[entry(Word{a, b, a})] == 1);
  CHECK(count_subwords(Word{a, b, a, b, a}, idx, false)[entry(Word{a, b, a})] == 2);
  const FeatureVector zero = count_subwords(Word{}, idx, false);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0; }));
}

TEST_CASE("run-length counting matches naive counting") {
  const CountingIndex idx = build_free_index(Alphabet({"a", "b"}), 2);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 1000; ++t) {
    Word w = oracle::random_word(rng, 2, 30);
    if (t % 3 == 0) w = w * Word{a, a, a, a, a, a} * oracle::random_word(rng, 2, 5);
    const FeatureVector c = count_subwords(w, idx, false);
    double total = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      REQUIRE(c[i] == naive_count(w, idx.entries[i].front()));
      total += c[i];
    }
    CHECK(total == std::max<double>(static_cast<double>(w.size()) - 3, 0));
    const FeatureVector cw = count_subwords(w, idx, true);
    for (std::size_t i = 0; i < idx.size(); ++i)
      CHECK(cw[i] == doctest::Approx(w.empty() ? 0.0 : c[i] / static_cast<double>(w.size())));
  }
}

TEST_CASE("counting on astronomically long runs") {
  const CountingIndex idx = build_free_index(Alphabet({"a", "b"}), 1);
  SyllableWord s{{1, BigInt(-2)}, {0, BigInt(1) << 60}, {1, BigInt(1)}};
  const FeatureVector c = count_subwords(s, idx, false);
  const int aaa = idx.find(LetterString{a, a, a});
  CHECK(c[aaa] == BigInt((BigInt(1) << 60) - 2).get_d());
  CHECK(c[idx.find(LetterString{B, B, a})] == 1);
  CHECK(c[idx.find(LetterString{a, a, b})] == 1);
}

TEST_CASE("generator counts") {
  const SyllableWord w = to_syllables(Word{a, b, A, b});
  CHECK(generator_count(w, 2, false) == FeatureVector{2, 2});
  CHECK(generator_count(w, 2, true) == FeatureVector{0.5, 0.5});
  CHECK(generator_count({}, 2, false) == FeatureVector{0, 0});
  CHECK(generator_count(to_syllables(Word{A}), 2, false) == FeatureVector{1, 0});
}

TEST_CASE("normal-form features") {
  auto bs = make_bs12();
  const NormalForm x = bs->normal_form(Word{b, a});
  CHECK(nf_features(x, false) == FeatureVector{0, 2, 1});
  const FeatureVector n1 = nf_features(x, true);
  CHECK(n1[1] == doctest::Approx(2.0 / 3));
  CHECK(n1[2] == doctest::Approx(1.0 / 3));
  CHECK(nf_features(bs->identity(), false) == FeatureVector{0, 0, 0});
  CHECK_THROWS_WITH_AS(nf_features(bs->identity(), true), doctest::Contains("ZERO_LENGTH"), Error);
  CHECK(nf_features(bs->identity(), true, false) == FeatureVector{0, 0, 0});

  auto gm = make_gmbs23();
  CHECK(nf_features(gm->normal_form(Word{Letter(0, false), Letter(2, false), Letter(0, true)}), false) ==
        FeatureVector{0, 0, 2, 0, 0});
}

TEST_CASE("pair recipes") {
  auto bs = make_bs12();
  const FeatureRecipe c0(bs, "c0");
  const NormalForm x = bs->normal_form(Word{b, a});
  CHECK(c0.pair_features(x, x) == FeatureVector{0, 2, 1, 0, 2, 1});
  CHECK(c0.dimension() == 6);
  CHECK(FeatureRecipe(make_gmbs23(), "c1").dimension() == 10);
  CHECK(FeatureRecipe(make_group("oxu-sqrt2"), "c0").dimension() == 2 * (3 + 1));
  CHECK(c0.discrete());
  CHECK_FALSE(FeatureRecipe(bs, "c1").discrete());
  CHECK(c0.column_names().front() == "u.e1");

  auto sl = make_sl2z();
  const FeatureRecipe cm(sl, "cm");
  const FeatureVector f = cm.pair_features(sl->normal_form(Word{a}), sl->normal_form(Word{a}));
  const double r = 1 / std::sqrt(2.0);
  const FeatureVector expect{0, -r, r, 0, 0, -r, r, 0};
  for (std::size_t i = 0; i < 8; ++i) CHECK(f[i] == doctest::Approx(expect[i]));
  CHECK_THROWS_AS(FeatureRecipe(bs, "cm"), Error);
  CHECK_THROWS_AS(FeatureRecipe(bs, "c9"), Error);
}

TEST_CASE("pair features are symmetric under swapping and weighting divides by length") {
  std::mt19937_64 rng(8);
  for (const char* name : {"bs12", "sl2z", "gmbs23"}) {
    auto g = make_group(name);
    const int n = static_cast<int>(g->alphabet().size());
    const FeatureRecipe c2(g, "c2"), c3(g, "c3"), c0(g, "c0"), c1(g, "c1");
    for (int t = 0; t < 300; ++t) {
      const NormalForm u = g->normal_form(oracle::random_word(rng, n, 20));
      const NormalForm v = g->normal_form(oracle::random_word(rng, n, 20));
      const FeatureVector uv = c2.pair_features(u, v), vu = c2.pair_features(v, u);
      const std::size_t h = c2.word_dimension();
      for (std::size_t i = 0; i < h; ++i) {
        CHECK(uv[i] == vu[h + i]);
        CHECK(uv[h + i] == vu[i]);
      }
      if (u.length == 0) continue;
      const double len = u.length.get_d();
      const FeatureVector w2 = c2.word_features(u), w3 = c3.word_features(u);
      for (std::size_t i = 0; i < h; ++i) CHECK(w3[i] == doctest::Approx(w2[i] / len));
      const FeatureVector n0 = c0.word_features(u), n1 = c1.word_features(u);
      for (std::size_t i = 0; i < n0.size(); ++i) CHECK(n1[i] == doctest::Approx(n0[i] / len));
    }
  }
}

TEST_CASE("csv export") {
  std::ostringstream out;
  write_feature_csv(out, {"x", "y"}, {{1, 2.5}, {0, -1}}, {1, 0});
  CHECK(out.str() == "x,y,label\n1,2.5,1\n0,-1,0\n");
}
