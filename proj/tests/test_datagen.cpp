#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cdp/datagen.hpp"
#include "cdp/error.hpp"
#include "oracles.hpp"

using namespace cdp;
namespace fs = std::filesystem;

namespace {

Word spelled(const NormalForm& x) { return to_word(x.spelling); }

// Exponent sum of b, computed from the spelling alone.
long b_sum(const NormalForm& x) {
  long s = 0;
  for (Letter l : spelled(x))
    if (l.generator() == 1) s += l.sign();
  return s;
}

// S -> 3, R -> 2 in Z/12.
long sl2_image(const NormalForm& x) {
  long s = 0;
  for (Letter l : spelled(x)) s += (l.generator() == 0 ? 3 : 2) * l.sign();
  return ((s % 12) + 12) % 12;
}

std::array<mpz_class, 3> bs_key(const Word& w) { return oracle::bs_normal_form(oracle::bs_eval(w)); }

long bs_oracle_length(const NormalForm& x) {
  const auto e = bs_key(spelled(x));
  return mpz_class(e[0] + abs(e[1]) + e[2]).get_si();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cdp_test_datagen_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CollectionConfig small_config(CollectionId id, std::uint64_t seed = 11) {
  CollectionConfig cfg;
  cfg.collection = id;
  cfg.pairs_per_class = 10;
  cfg.min_length = 5;
  cfg.max_length = 14;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("random words of length one are single letters") {
  for (const auto& name : {"bs12", "gmbs23", "sl2z", "heisenberg"}) {
    const auto g = make_group(name);
    Rng rng(derive_seed(1, name));
    for (int i = 0; i < 20; ++i) {
      const NormalForm x = random_word(*g, 1, rng);
      CHECK(x.length == 1);
      REQUIRE(x.spelling.size() == 1);
      CHECK(abs(x.spelling[0].power) == 1);
    }
  }
}

TEST_CASE("random words hit the target length exactly") {
  const auto bs = make_bs12();
  Rng rng(7);
  const NormalForm x = random_word(*bs, 7, rng);
  CHECK(x.length == 7);
  CHECK(bs_oracle_length(x) == 7);

  for (const auto& name : {"bs12", "gmbs23", "sl2z", "heisenberg", "oxu-sqrt2"}) {
    const auto g = make_group(name);
    Rng r(derive_seed(2, name));
    for (std::int64_t n = 1; n <= 30; ++n) {
      const NormalForm w = random_word(*g, n, r);
      CHECK(w.length == static_cast<long>(n));
      CHECK(g->normal_form(w.spelling) == w);
    }
  }
  for (int i = 0; i < 50; ++i) CHECK(bs_oracle_length(random_word(*bs, 5 + i, rng)) == 5 + i);
}

TEST_CASE("random words are deterministic under a seed") {
  const auto g = make_gmbs23();
  Rng r1(99), r2(99);
  for (int n = 1; n < 40; ++n) CHECK(random_word(*g, n, r1) == random_word(*g, n, r2));
}

TEST_CASE("unreachable targets raise after the restart budget") {
  const auto g = make_sl2z();
  Rng rng(1);
  GenLimits tight;
  tight.max_restarts = 3;
  tight.steps_per_length = 0;
  CHECK_THROWS_WITH_AS(random_word(*g, 1000, rng, tight), doctest::Contains("TARGET_UNREACHABLE"), Error);
}

TEST_CASE("conjugate pairs") {
  const auto g = make_bs12();
  const NormalForm a = g->parse("a"), B = g->parse("b^-1");
  const LabeledPair p = conjugate_pair(*g, a, B);
  CHECK(g->format(p.v) == "a^2");
  CHECK(p.label == kConjugate);
  REQUIRE(p.t);
  CHECK(*p.t == B);
  CHECK(conjugate_pair(*g, a, g->identity()).v == a);

  for (const auto& name : {"bs12", "gmbs23", "sl2z"}) {
    const auto h = make_group(name);
    Rng r1(5), r2(5);
    for (int i = 0; i < 20; ++i) {
      const LabeledPair x = conjugate_pair(*h, 8, 6, r1);
      const LabeledPair y = conjugate_pair(*h, 8, 6, r2);
      CHECK(x.v == y.v);
      CHECK(h->abelianization_image(x.u) == h->abelianization_image(x.v));
      CHECK(x.u.length == 8);
      CHECK(x.t->length == 6);
    }
  }
}

TEST_CASE("conjugates agree with the affine oracle") {
  const auto g = make_bs12();
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const LabeledPair p = conjugate_pair(*g, 3 + i % 20, 3 + i % 17, rng);
    const Word t = spelled(*p.t);
    Word conj = t.inverse();
    for (Letter l : spelled(p.u)) conj.push_back(l);
    for (Letter l : t) conj.push_back(l);
    CHECK(bs_key(conj) == bs_key(spelled(p.v)));
  }
}

TEST_CASE("abelianization filter") {
  const auto bs = make_bs12();
  const NormalForm u = bs->parse("a b a");
  CHECK_FALSE(passes_abelian_filter(*bs, u, u));
  CHECK_FALSE(passes_abelian_filter(*bs, bs->parse("a"), bs->parse("b")));
  CHECK(passes_abelian_filter(*bs, bs->parse("b"), bs->parse("b^2")));

  const auto sl = make_sl2z();
  const NormalForm s = sl->parse("S"), rsr = sl->parse("R S R^-1");
  REQUIRE(sl2_image(s) == 3);
  REQUIRE(sl2_image(rsr) == 3);
  CHECK_FALSE(passes_abelian_filter(*sl, s, rsr));
  CHECK(passes_abelian_filter(*sl, s, sl->parse("R")));

  Rng rng(4);
  for (int i = 0; i < 300; ++i) {
    const LabeledPair p = nonconjugate_pair(*bs, 4 + i % 11, 4 + i % 7, rng);
    CHECK(p.label == kNonconjugate);
    CHECK(b_sum(p.u) != 0);
    CHECK(b_sum(p.v) != 0);
    CHECK(b_sum(p.u) != b_sum(p.v));
    CHECK(p.u.length == 4 + i % 11);
    CHECK(p.v.length == 4 + i % 7);
  }
  for (int i = 0; i < 200; ++i) {
    const LabeledPair p = nonconjugate_pair(*sl, 6, 6, rng);
    CHECK(sl2_image(p.u) != 0);
    CHECK(sl2_image(p.v) != 0);
    CHECK(sl2_image(p.u) != sl2_image(p.v));
  }
  GenLimits none;
  none.filter_retries = 0;
  CHECK_THROWS_WITH_AS(nonconjugate_pair(*bs, 5, 5, rng, none), doctest::Contains("FILTER_EXHAUSTED"), Error);
}

TEST_CASE("pool") {
  const auto g = make_bs12();
  const auto pool = build_pool(*g, 100, 5, 14, 17);
  REQUIRE(pool.size() == 100);
  std::set<std::array<mpz_class, 3>> keys;
  std::set<long> lengths;
  for (const auto& w : pool) {
    keys.insert(bs_key(spelled(w)));
    const long n = bs_oracle_length(w);
    CHECK(n >= 5);
    CHECK(n <= 14);
    lengths.insert(n);
  }
  CHECK(keys.size() == 100);
  CHECK(lengths.size() == 10);

  const auto one = build_pool(*g, 1, 5, 14, 17);
  REQUIRE(one.size() == 1);
  CHECK(one[0].length >= 5);

  const auto threaded = build_pool(*g, 100, 5, 14, 17, {}, 3);
  CHECK(threaded == pool);

  CHECK_THROWS_WITH_AS(build_pool(*g, 100, 1, 1, 3), doctest::Contains("POOL_EXHAUSTED"), Error);
}

TEST_CASE("D0 length rules") {
  const auto g = make_bs12();
  const auto splits = build_collection(*g, small_config(CollectionId::D0));
  for (const auto& d : splits) {
    CHECK(d.count(kConjugate) == 10);
    CHECK(d.count(kNonconjugate) == 10);
    CHECK(audit_dataset(*g, d).empty());
    for (const auto& p : d.pairs) {
      const long lu = bs_oracle_length(p.u);
      CHECK(lu >= 5);
      CHECK(lu <= 14);
      if (p.label == kConjugate) {
        CHECK(bs_oracle_length(*p.t) == lu);
      } else {
        CHECK(bs_oracle_length(p.v) == lu);
        CHECK(b_sum(p.u) != b_sum(p.v));
      }
    }
  }
}

TEST_CASE("D1 to D3 length rules") {
  for (const auto& name : {"bs12", "gmbs23", "sl2z"}) {
    const auto g = make_group(name);
    std::array<Dataset, 3> d2;
    for (auto id : {CollectionId::D1, CollectionId::D2, CollectionId::D3}) {
      const auto splits = build_collection(*g, small_config(id));
      for (const auto& d : splits) {
        INFO(name, " ", to_string(id));
        CHECK(d.count(kConjugate) == 10);
        CHECK(d.count(kNonconjugate) == 10);
        const auto issues = audit_dataset(*g, d);
        CHECK_MESSAGE(issues.empty(), (issues.empty() ? "" : issues.front()));
      }
      if (id == CollectionId::D2) d2 = splits;
      if (id == CollectionId::D1) {
        for (const auto& p : splits[0].pairs)
          if (p.label == kConjugate) CHECK(p.u.length == p.t->length);
      }
      if (id == CollectionId::D3) {
        for (int s = 0; s < 3; ++s) {
          // D3 reuses the D2 conjugates and reads the length span off them.
          BigInt lo = d2[s].pairs[0].u.length, hi = lo;
          for (const auto& p : d2[s].pairs)
            if (p.label == kConjugate)
              for (const auto& w : {p.u, p.v}) {
                lo = std::min(lo, w.length);
                hi = std::max(hi, w.length);
              }
          CHECK(splits[s].meta.conjugate_min == lo.get_str());
          CHECK(splits[s].meta.conjugate_max == hi.get_str());
          for (std::size_t i = 0; i < 10; ++i) CHECK(pair_key(*g, splits[s].pairs[i]) == pair_key(*g, d2[s].pairs[i]));
          for (const auto& p : splits[s].pairs)
            if (p.label == kNonconjugate) {
              CHECK(p.v.length >= splits[s].meta.v_min);
              CHECK(p.v.length <= splits[s].meta.v_max);
            }
        }
      }
    }
  }
}

TEST_CASE("D2 conjugators are drawn independently of u") {
  const auto g = make_bs12();
  auto cfg = small_config(CollectionId::D2);
  cfg.pairs_per_class = 40;
  const auto splits = build_collection(*g, cfg);
  int differing = 0;
  for (const auto& p : splits[0].pairs)
    if (p.label == kConjugate && p.u.length != p.t->length) ++differing;
  CHECK(differing > 20);
}

TEST_CASE("D3 non-conjugate lengths may leave the base range") {
  const auto g = make_bs12();
  auto cfg = small_config(CollectionId::D3);
  cfg.pairs_per_class = 40;
  const auto splits = build_collection(*g, cfg);
  CHECK(splits[0].meta.v_max > cfg.max_length);
  bool outside = false;
  for (const auto& p : splits[0].pairs)
    if (p.label == kNonconjugate && p.v.length > cfg.max_length) outside = true;
  CHECK(outside);
}

TEST_CASE("splits share no pairs") {
  for (auto id : {CollectionId::D0, CollectionId::D1, CollectionId::D2, CollectionId::D3}) {
    const auto g = make_sl2z();
    auto cfg = small_config(id);
    cfg.min_length = 3;
    cfg.max_length = 8;
    const auto splits = build_collection(*g, cfg);
    std::set<std::string> keys;
    std::size_t total = 0;
    for (const auto& d : splits)
      for (const auto& p : d.pairs) {
        keys.insert(pair_key(*g, p));
        ++total;
      }
    CHECK(keys.size() == total);
  }
}

TEST_CASE("collections are byte-identical across worker counts") {
  const auto g = make_gmbs23();
  const fs::path dir = scratch_dir("workers");
  for (auto id : {CollectionId::D0, CollectionId::D3}) {
    auto cfg = small_config(id, 5);
    const auto serial = build_collection(*g, cfg);
    cfg.workers = 4;
    const auto parallel = build_collection(*g, cfg);
    for (int s = 0; s < 3; ++s) {
      write_dataset(*g, serial[s], dir / "a.jsonl");
      write_dataset(*g, parallel[s], dir / "b.jsonl");
      CHECK(read_file(dir / "a.jsonl") == read_file(dir / "b.jsonl"));
      CHECK(read_file(dir / "a.meta.json") == read_file(dir / "b.meta.json"));
    }
    cfg.seed = 6;
    CHECK(pair_key(*g, build_collection(*g, cfg)[0].pairs[0]) != pair_key(*g, serial[0].pairs[0]));
  }
}

TEST_CASE("audit reports violations") {
  const auto g = make_bs12();
  auto splits = build_collection(*g, small_config(CollectionId::D0));
  Dataset d = splits[0];
  d.pairs[0].v = g->parse("a");
  CHECK_FALSE(audit_dataset(*g, d).empty());

  d = splits[0];
  for (auto& p : d.pairs)
    if (p.label == kNonconjugate) {
      p.v = p.u;
      break;
    }
  CHECK_FALSE(audit_dataset(*g, d).empty());

  d = splits[0];
  d.pairs.pop_back();
  CHECK_FALSE(audit_dataset(*g, d).empty());
}

TEST_CASE("dataset files round trip") {
  const auto g = make_gmbs23();
  const fs::path dir = scratch_dir("io");
  const auto splits = build_collection(*g, small_config(CollectionId::D3));
  const fs::path path = dir / "d3.jsonl";
  write_dataset(*g, splits[1], path, R"({"tool_version": "x"})");
  CHECK(fs::exists(dir / "d3.meta.json"));
  const Dataset back = read_dataset(*g, path);
  REQUIRE(back.pairs.size() == splits[1].pairs.size());
  for (std::size_t i = 0; i < back.pairs.size(); ++i) {
    CHECK(back.pairs[i].u == splits[1].pairs[i].u);
    CHECK(back.pairs[i].v == splits[1].pairs[i].v);
    CHECK(back.pairs[i].label == splits[1].pairs[i].label);
    CHECK(back.pairs[i].t.has_value() == (back.pairs[i].label == kConjugate));
  }
  CHECK(back.meta.collection == CollectionId::D3);
  CHECK(back.meta.split == SplitId::So);
  CHECK(back.meta.v_max == splits[1].meta.v_max);
  CHECK(back.meta.conjugate_max == splits[1].meta.conjugate_max);
  CHECK(audit_dataset(*g, back).empty());

  const auto line = read_file(path).substr(0, read_file(path).find('\n'));
  CHECK(line.find("\"label\":") != std::string::npos);
  CHECK(line.find("\"u\":") != std::string::npos);

  CHECK_THROWS_WITH_AS(read_dataset(*make_bs12(), path), doctest::Contains("REFUSAL"), Error);

  std::ofstream(dir / "bad.jsonl") << "{\"u\": \"q1\", \"v\": \"zz\", \"label\": 0}\n";
  CHECK_THROWS_WITH_AS(read_dataset(*g, dir / "bad.jsonl"), doctest::Contains("FORMAT_ERROR"), Error);
  std::ofstream(dir / "bad2.jsonl") << "not json\n";
  CHECK_THROWS_WITH_AS(read_dataset(*g, dir / "bad2.jsonl"), doctest::Contains("FORMAT_ERROR"), Error);
  CHECK_THROWS_WITH_AS(read_dataset(*g, dir / "missing.jsonl"), doctest::Contains("IO_ERROR"), Error);
}

TEST_CASE("collection and split names") {
  CHECK(parse_collection("D2") == CollectionId::D2);
  CHECK(to_string(SplitId::Sv) == "S_v");
  CHECK_THROWS_AS(parse_collection("D9"), Error);
}
