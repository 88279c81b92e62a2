#include "cdp/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <unordered_set>

#include "cdp/error.hpp"
#include "cdp/parallel.hpp"
#include "json.hpp"

namespace cdp {

using nlohmann::json;

namespace {

std::string exponent_key(const NormalForm& x) {
  std::string k;
  for (const auto& e : x.exponents) k += e.get_str(16) + ",";
  return k;
}

std::int64_t round_robin_length(std::size_t i, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(i % static_cast<std::size_t>(hi - lo + 1));
}

using PairMaker = std::function<LabeledPair(Rng&, std::size_t)>;

// Pair i comes from its own stream; duplicates (within `seen`) are redrawn
// from follow-up streams, so the result does not depend on `workers`.
std::vector<LabeledPair> make_pairs(const Group& g, std::size_t count, std::uint64_t stream, const PairMaker& make,
                                    std::unordered_set<std::string>& seen, unsigned workers) {
  std::vector<LabeledPair> out(count);
  parallel_for(count, workers, [&](std::size_t i) {
    Rng rng(derive_seed(stream, "pair", i));
    out[i] = make(rng, i);
  });
  for (std::size_t i = 0; i < count; ++i) {
    for (std::uint64_t attempt = 1; !seen.insert(pair_key(g, out[i])).second; ++attempt) {
      if (attempt > 1000) throw Error(ErrorCode::filter_exhausted, "could not draw a fresh pair");
      Rng rng(derive_seed(derive_seed(stream, "pair", i), "retry", attempt));
      out[i] = make(rng, i);
    }
  }
  return out;
}

// Pool indices in a per-subset random order, consumed without replacement.
class PoolCursor {
 public:
  PoolCursor(const std::vector<NormalForm>& pool, std::uint64_t seed) : pool_(pool), order_(pool.size()) {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    Rng rng(seed);
    rng.shuffle(order_.begin(), order_.end());
  }

  const NormalForm& draw() {
    if (next_ >= order_.size())
      throw Error(ErrorCode::pool_exhausted, "word pool exhausted; increase the pool size");
    return pool_[order_[next_++]];
  }

 private:
  const std::vector<NormalForm>& pool_;
  std::vector<std::size_t> order_;
  std::size_t next_ = 0;
};

struct SubsetState {
  std::unordered_set<std::string> seen;
};

}  // namespace

std::string_view to_string(CollectionId c) {
  static constexpr std::string_view names[] = {"D0", "D1", "D2", "D3"};
  return names[static_cast<int>(c)];
}

std::string_view to_string(SplitId s) {
  static constexpr std::string_view names[] = {"S_i", "S_o", "S_v"};
  return names[static_cast<int>(s)];
}

CollectionId parse_collection(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (to_string(static_cast<CollectionId>(i)) == s) return static_cast<CollectionId>(i);
  throw Error(ErrorCode::config_error, "unknown collection '" + std::string(s) + "' (expected D0..D3)");
}

SplitId parse_split(std::string_view s) {
  for (int i = 0; i < 3; ++i)
    if (to_string(static_cast<SplitId>(i)) == s) return static_cast<SplitId>(i);
  throw Error(ErrorCode::config_error, "unknown split '" + std::string(s) + "'");
}

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [label](const LabeledPair& p) { return p.label == label; }));
}

NormalForm random_word(const Group& g, std::int64_t n, Rng& rng, const GenLimits& limits) {
  if (n < 0) throw Error(ErrorCode::invalid_argument, "negative target length");
  if (n == 0) return g.identity();
  const std::uint64_t symbols = 2 * g.alphabet().size();
  const BigInt target(static_cast<long>(n));
  const std::size_t max_letters = limits.steps_per_length * static_cast<std::size_t>(n) + 64;
  for (std::size_t attempt = 0; attempt <= limits.max_restarts; ++attempt) {
    NormalForm x = g.identity();
    StepBudget budget(g.limits().max_steps);
    for (std::size_t step = 0; step < max_letters; ++step) {
      const Letter l = Letter::from_rank(static_cast<int>(rng.below(symbols)));
      g.apply(x, l.generator(), BigInt(l.sign()), budget);
      if (x.length == target) return x;
      if (x.length > target) break;
    }
  }
  throw Error(ErrorCode::target_unreachable,
              "no walk reached normal-form length " + std::to_string(n) + " in " + g.name());
}

bool passes_abelian_filter(const Group& g, const NormalForm& u, const NormalForm& v) {
  const auto iu = g.abelianization_image(u);
  const auto iv = g.abelianization_image(v);
  const auto& ab = g.abelianization();
  return iu != iv && !ab.is_zero(iu) && !ab.is_zero(iv);
}

LabeledPair nonconjugate_pair(const Group& g, std::int64_t len_u, std::int64_t len_v, Rng& rng,
                              const GenLimits& limits) {
  for (std::size_t attempt = 0; attempt < limits.filter_retries; ++attempt) {
    NormalForm u = random_word(g, len_u, rng, limits);
    NormalForm v = random_word(g, len_v, rng, limits);
    if (passes_abelian_filter(g, u, v)) return {std::move(u), std::move(v), kNonconjugate, std::nullopt};
  }
  throw Error(ErrorCode::filter_exhausted, "abelianization filter rejected every candidate pair");
}

LabeledPair conjugate_pair(const Group& g, const NormalForm& u, const NormalForm& t) {
  return {u, g.conjugate(u, t), kConjugate, t};
}

LabeledPair conjugate_pair(const Group& g, std::int64_t len_u, std::int64_t len_t, Rng& rng,
                           const GenLimits& limits) {
  const NormalForm u = random_word(g, len_u, rng, limits);
  const NormalForm t = random_word(g, len_t, rng, limits);
  return conjugate_pair(g, u, t);
}

std::vector<NormalForm> build_pool(const Group& g, std::size_t size, std::int64_t min_len, std::int64_t max_len,
                                   std::uint64_t seed, const GenLimits& limits, unsigned workers) {
  if (size == 0) throw Error(ErrorCode::invalid_argument, "pool size must be positive");
  std::vector<NormalForm> pool;
  std::unordered_set<std::string> keys;
  const std::size_t budget = size * limits.pool_retry_factor + 64;
  std::size_t drawn = 0;
  while (pool.size() < size) {
    if (drawn >= budget) throw Error(ErrorCode::pool_exhausted, "could not find enough distinct words for the pool");
    const std::size_t batch = std::min(budget - drawn, (size - pool.size()) + (size - pool.size()) / 8 + 8);
    std::vector<NormalForm> candidates(batch);
    parallel_for(batch, workers, [&](std::size_t i) {
      Rng rng(derive_seed(seed, "pool", drawn + i));
      candidates[i] = random_word(g, rng.between(min_len, max_len), rng, limits);
    });
    drawn += batch;
    for (auto& c : candidates) {
      if (pool.size() == size) break;
      if (keys.insert(exponent_key(c)).second) pool.push_back(std::move(c));
    }
  }
  return pool;
}

std::string pair_key(const Group& g, const LabeledPair& p) { return g.format(p.u) + "|" + g.format(p.v); }

std::array<Dataset, 3> build_collection(const Group& g, const CollectionConfig& cfg) {
  if (cfg.pairs_per_class == 0) throw Error(ErrorCode::config_error, "pairs per class must be positive");
  if (cfg.min_length < 1 || cfg.max_length < cfg.min_length)
    throw Error(ErrorCode::config_error, "length range must satisfy 1 <= min <= max");
  const std::size_t ppc = cfg.pairs_per_class;
  const std::int64_t lo = cfg.min_length, hi = cfg.max_length;
  const std::uint64_t root = derive_seed(cfg.seed, "datagen/" + g.name());
  const bool pool_needed = cfg.collection != CollectionId::D0;

  std::vector<NormalForm> pool;
  if (pool_needed) {
    const std::size_t pool_size = cfg.pool_size ? cfg.pool_size : 4 * ppc;
    pool = build_pool(g, pool_size, lo, hi, derive_seed(root, "pool"), cfg.limits, cfg.workers);
  }

  SubsetState conj_fixed, nonconj_fixed, conj_pool, nonconj_pool, nonconj_d3;
  std::array<Dataset, 3> out;
  for (int s = 0; s < 3; ++s) {
    const SplitId split = static_cast<SplitId>(s);
    const std::string tag(to_string(split));
    Dataset& d = out[s];
    d.meta = {g.name(), cfg.collection, split, cfg.seed, ppc, lo, hi, 0, 0, "", ""};

    std::vector<LabeledPair> conj, nonconj;
    if (cfg.collection == CollectionId::D0 || cfg.collection == CollectionId::D1) {
      conj = make_pairs(
          g, ppc, derive_seed(root, "conj-fixed/" + tag),
          [&](Rng& rng, std::size_t i) {
            const std::int64_t l = round_robin_length(i, lo, hi);
            return conjugate_pair(g, l, l, rng, cfg.limits);
          },
          conj_fixed.seen, cfg.workers);
    } else {
      PoolCursor cursor(pool, derive_seed(root, "conj-pool/" + tag));
      while (conj.size() < ppc) {
        const NormalForm& u = cursor.draw();
        LabeledPair p = conjugate_pair(g, u, cursor.draw());
        if (conj_pool.seen.insert(pair_key(g, p)).second) conj.push_back(std::move(p));
      }
    }

    if (cfg.collection == CollectionId::D0) {
      nonconj = make_pairs(
          g, ppc, derive_seed(root, "nonconj-fixed/" + tag),
          [&](Rng& rng, std::size_t i) {
            const std::int64_t m = round_robin_length(i, lo, hi);
            return nonconjugate_pair(g, m, m, rng, cfg.limits);
          },
          nonconj_fixed.seen, cfg.workers);
    } else if (cfg.collection == CollectionId::D3) {
      BigInt cmin = conj.front().u.length, cmax = cmin;
      for (const auto& p : conj)
        for (const BigInt* len : {&p.u.length, &p.v.length}) {
          cmin = std::min(cmin, *len);
          cmax = std::max(cmax, *len);
        }
      const std::int64_t cap = cfg.d3_length_cap ? cfg.d3_length_cap : 2 * hi;
      const std::int64_t vmin = to_int64(cmin);
      const std::int64_t vmax = cmax > BigInt(static_cast<long>(cap)) ? std::max(cap, vmin) : to_int64(cmax);
      d.meta.v_min = vmin;
      d.meta.v_max = vmax;
      d.meta.conjugate_min = cmin.get_str();
      d.meta.conjugate_max = cmax.get_str();
      nonconj = make_pairs(
          g, ppc, derive_seed(root, "nonconj-d3/" + tag),
          [&](Rng& rng, std::size_t i) {
            const std::int64_t m = round_robin_length(i, lo, hi);
            // Long targets are occasionally unreachable; draw another |v|.
            for (std::size_t redraw = 0;; ++redraw) {
              try {
                return nonconjugate_pair(g, m, rng.between(vmin, vmax), rng, cfg.limits);
              } catch (const Error& e) {
                if (e.code() != ErrorCode::target_unreachable || redraw >= 100) throw;
              }
            }
          },
          nonconj_d3.seen, cfg.workers);
    } else {
      PoolCursor cursor(pool, derive_seed(root, "nonconj-pool/" + tag));
      const auto& ab = g.abelianization();
      auto draw_nontrivial = [&]() -> const NormalForm& {
        for (;;) {
          const NormalForm& w = cursor.draw();
          if (!ab.is_zero(g.abelianization_image(w))) return w;
        }
      };
      while (nonconj.size() < ppc) {
        const NormalForm& u = draw_nontrivial();
        for (std::size_t tries = 0;; ++tries) {
          if (tries >= cfg.limits.filter_retries)
            throw Error(ErrorCode::filter_exhausted, "no pool word passes the abelianization filter");
          LabeledPair p{u, draw_nontrivial(), kNonconjugate, std::nullopt};
          if (!passes_abelian_filter(g, p.u, p.v)) continue;
          if (!nonconj_pool.seen.insert(pair_key(g, p)).second) continue;
          nonconj.push_back(std::move(p));
          break;
        }
      }
    }
    d.pairs = std::move(conj);
    d.pairs.insert(d.pairs.end(), std::make_move_iterator(nonconj.begin()), std::make_move_iterator(nonconj.end()));
  }
  return out;
}

std::vector<std::string> audit_dataset(const Group& g, const Dataset& d) {
  std::vector<std::string> issues;
  const auto& m = d.meta;
  const std::size_t conj = d.count(kConjugate), nonconj = d.count(kNonconjugate);
  if (conj != nonconj) issues.push_back("unbalanced classes: " + std::to_string(conj) + " vs " + std::to_string(nonconj));
  if (m.pairs_per_class && conj != m.pairs_per_class) issues.push_back("class size differs from pairs_per_class");
  const BigInt lo(static_cast<long>(m.min_length)), hi(static_cast<long>(m.max_length));
  auto in_range = [&](const BigInt& x) { return x >= lo && x <= hi; };
  std::unordered_set<std::string> keys;
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    const auto& p = d.pairs[i];
    const std::string where = "pair " + std::to_string(i) + ": ";
    if (!keys.insert(pair_key(g, p)).second) issues.push_back(where + "duplicate pair");
    if (p.label == kConjugate) {
      if (!p.t) {
        issues.push_back(where + "conjugate pair without conjugator");
        continue;
      }
      if (!(g.conjugate(p.u, *p.t) == p.v)) issues.push_back(where + "v is not u^t");
      if (m.collection == CollectionId::D0 || m.collection == CollectionId::D1) {
        if (p.u.length != p.t->length || !in_range(p.u.length)) issues.push_back(where + "conjugate rule |u|=|t|=l");
      } else if (!in_range(p.u.length) || !in_range(p.t->length)) {
        issues.push_back(where + "conjugate rule |u|=l, |t|=p");
      }
    } else if (p.label == kNonconjugate) {
      if (!passes_abelian_filter(g, p.u, p.v)) issues.push_back(where + "abelianization filter violated");
      if (m.collection == CollectionId::D0) {
        if (p.u.length != p.v.length || !in_range(p.u.length)) issues.push_back(where + "non-conjugate rule |u|=|v|=m");
      } else if (m.collection == CollectionId::D3) {
        const BigInt cmin(m.conjugate_min), cmax(m.conjugate_max);
        if (!in_range(p.u.length) || p.v.length < cmin || p.v.length > cmax)
          issues.push_back(where + "non-conjugate rule |u|=m, |v| in [min2k, max2k]");
      } else if (!in_range(p.u.length) || !in_range(p.v.length)) {
        issues.push_back(where + "non-conjugate rule |u|=m, |v|=n");
      }
    } else {
      issues.push_back(where + "bad label");
    }
  }
  return issues;
}

std::filesystem::path meta_path(const std::filesystem::path& jsonl) {
  std::filesystem::path p = jsonl;
  p.replace_extension(".meta.json");
  return p;
}

void write_dataset(const Group& g, const Dataset& d, const std::filesystem::path& jsonl,
                   const std::string& extra_meta_json) {
  std::ofstream out(jsonl, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + jsonl.string());
  for (const auto& p : d.pairs) {
    json line = {{"u", g.format(p.u)}, {"v", g.format(p.v)}, {"label", p.label}};
    if (p.t) line["t"] = g.format(*p.t);
    out << line.dump() << '\n';
  }
  json meta = json::parse(extra_meta_json);
  meta["group"] = d.meta.group;
  meta["collection"] = std::string(to_string(d.meta.collection));
  meta["split"] = std::string(to_string(d.meta.split));
  meta["seed"] = d.meta.seed;
  meta["pairs_per_class"] = d.meta.pairs_per_class;
  meta["min_length"] = d.meta.min_length;
  meta["max_length"] = d.meta.max_length;
  if (d.meta.collection == CollectionId::D3) {
    meta["v_min"] = d.meta.v_min;
    meta["v_max"] = d.meta.v_max;
    meta["conjugate_min"] = d.meta.conjugate_min;
    meta["conjugate_max"] = d.meta.conjugate_max;
  }
  std::ofstream mout(meta_path(jsonl), std::ios::binary);
  if (!mout) throw Error(ErrorCode::io_error, "cannot write " + meta_path(jsonl).string());
  mout << meta.dump(2) << '\n';
  if (!out || !mout) throw Error(ErrorCode::io_error, "write failed for " + jsonl.string());
}

Dataset read_dataset(const Group& g, const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + jsonl.string());
  Dataset d;
  if (std::ifstream min{meta_path(jsonl)}) {
    json meta;
    try {
      meta = json::parse(min);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::format_error, meta_path(jsonl).string() + ": " + e.what());
    }
    d.meta.group = meta.value("group", "");
    if (!d.meta.group.empty() && d.meta.group != g.name())
      throw Error(ErrorCode::refusal, "dataset " + jsonl.string() + " belongs to group " + d.meta.group +
                                          ", not " + g.name());
    d.meta.collection = parse_collection(meta.value("collection", "D0"));
    d.meta.split = parse_split(meta.value("split", "S_i"));
    d.meta.seed = meta.value("seed", std::uint64_t{0});
    d.meta.pairs_per_class = meta.value("pairs_per_class", std::size_t{0});
    d.meta.min_length = meta.value("min_length", std::int64_t{0});
    d.meta.max_length = meta.value("max_length", std::int64_t{0});
    d.meta.v_min = meta.value("v_min", std::int64_t{0});
    d.meta.v_max = meta.value("v_max", std::int64_t{0});
    d.meta.conjugate_min = meta.value("conjugate_min", "");
    d.meta.conjugate_max = meta.value("conjugate_max", "");
  }
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      LabeledPair p;
      p.u = g.parse(j.at("u").get<std::string>());
      p.v = g.parse(j.at("v").get<std::string>());
      p.label = j.at("label").get<int>();
      if (p.label != kConjugate && p.label != kNonconjugate) throw Error(ErrorCode::format_error, "label must be 0 or 1");
      if (j.contains("t")) p.t = g.parse(j.at("t").get<std::string>());
      d.pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::format_error, jsonl.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const ParseError& e) {
      throw Error(ErrorCode::format_error, jsonl.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return d;
}

}  // namespace cdp
