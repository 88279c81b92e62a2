#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cdp/datagen.hpp"
#include "cdp/error.hpp"
#include "cdp/evaluation.hpp"
#include "cdp/features.hpp"
#include "cdp/group.hpp"
#include "cdp/learn.hpp"
#include "cdp/pcp.hpp"
#include "cdp/pipeline.hpp"
#include "cdp/rewriting.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace cdp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void note(const std::string& s) { details.push_back(s); }
  void fail(const std::string& s) {
    pass = false;
    details.push_back("FAILED " + s);
  }
};

std::string fixed(double x, int digits = 4) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << x;
  return o.str();
}

constexpr std::uint64_t kDeskSeed = 2024;
constexpr std::size_t kDeskPairs = 2000;
constexpr std::size_t kSoundnessPairs = 10000;

struct Context {
  fs::path dir;
  unsigned workers = 1;
  std::map<std::string, std::array<Dataset, 3>> desk;
  std::optional<Model> best_ntnn;
  std::string best_ntnn_settings;

  const std::array<Dataset, 3>& desk_set(const std::string& group) {
    auto it = desk.find(group);
    if (it != desk.end()) return it->second;
    CollectionConfig cc;
    cc.collection = CollectionId::D0;
    cc.pairs_per_class = kDeskPairs;
    cc.min_length = 5;
    cc.max_length = 104;
    cc.seed = kDeskSeed;
    cc.workers = workers;
    return desk.emplace(group, build_collection(*make_group(group), cc)).first->second;
  }
};

double model_accuracy(const Model& m, const TrainingSet& s) {
  return accuracy(predict_all(m, s.rows), s.labels);
}

ModelConfig forest_config(const std::string& recipe, std::size_t trees) {
  ModelConfig mc;
  mc.family = "forest";
  mc.recipe = recipe;
  mc.criterion = SplitCriterion::entropy;
  mc.depth = "none";
  mc.trees = trees;
  return mc;
}

// ---- 1 ----

Outcome structural(Context&) {
  Outcome o;
  struct Check {
    std::string what;
    std::size_t expected;
    std::size_t actual;
  };
  std::vector<Check> checks;
  auto dim = [](const std::string& g, const std::string& r) { return FeatureRecipe(make_group(g), r).dimension(); };
  for (const char* r : {"c0", "c1"}) {
    checks.push_back({std::string("bs12 ") + r, 6, dim("bs12", r)});
    checks.push_back({std::string("gmbs23 ") + r, 10, dim("gmbs23", r)});
    for (const char* g : {"oxu-sqrt2", "dinf"}) {
      const std::size_t h = pc_presentation(*make_group(g)).hirsch_length();
      checks.push_back({std::string(g) + " " + r + " = 2(H+1), H=" + std::to_string(h), 2 * (h + 1), dim(g, r)});
    }
  }
  checks.push_back({"bs12 c2", 48, dim("bs12", "c2")});
  checks.push_back({"sl2z c2", 40, dim("sl2z", "c2")});
  checks.push_back({"bs12 c4", 96, dim("bs12", "c4")});
  std::vector<std::string> bad;
  for (const auto& c : checks) {
    const std::string line = c.what + ": " + std::to_string(c.actual) + " (expected " + std::to_string(c.expected) + ")";
    if (c.actual == c.expected) {
      o.note(line);
    } else {
      o.fail(line);
      bad.push_back(c.what + " " + std::to_string(c.actual) + "!=" + std::to_string(c.expected));
    }
  }
  o.summary = bad.empty() ? "all feature dimensions exact"
                          : "counting-subgraph dimensions do not match: " + [&] {
                              std::string s;
                              for (std::size_t i = 0; i < bad.size(); ++i) s += (i ? ", " : "") + bad[i];
                              return s;
                            }();
  return o;
}

// ---- 2 ----

Outcome ntnn_table(Context&) {
  Outcome o;
  const TrainingSet samples{{{-4, -1, 5, 2, 3}, {-4, -7, 5, 2, 3}, {-2, -1, 6, 3, 1}}, {0, 0, 0}};
  const auto m = ntnn_train_with_patterns(samples, {2, 3, NtnnCriterion::voting}, {{{0, 2, 4}, {1, 2, 3}}});
  using Entries = std::map<std::vector<double>, std::uint32_t>;
  const Entries t00{{{-4, 5, 3}, 2}, {{-2, 6, 1}, 1}};
  const Entries t10{{{-1, 5, 2}, 1}, {{-7, 5, 2}, 1}, {{-1, 6, 3}, 1}};
  auto show = [](const Entries& e) {
    std::string s;
    for (const auto& [k, v] : e) {
      s += " (";
      for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(static_cast<long>(k[i]));
      s += ")->" + std::to_string(v);
    }
    return s;
  };
  const auto a = m.table_entries(0, 0), b = m.table_entries(0, 1);
  if (a == t00) o.note("T00:" + show(a));
  else o.fail("T00:" + show(a) + " expected" + show(t00));
  if (b == t10) o.note("T10:" + show(b));
  else o.fail("T10:" + show(b) + " expected" + show(t10));
  o.summary = o.pass ? "both tables match entry for entry, (-4,5,3)->2" : "table entries differ";
  return o;
}

// ---- 3 ----

struct OracleCase {
  std::string group;
  int generators;
  std::function<std::string(const Word&)> key;
  std::function<std::string(const SyllableWord&)> spelled_key;
};

std::string join_key(const auto& xs) {
  std::string s;
  for (const auto& x : xs) {
    std::ostringstream o;
    o << x;
    s += o.str() + ",";
  }
  return s;
}

// Evaluates syllables by repeated squaring so huge exponents stay cheap.
template <class Eval, class Mul, class Canon>
OracleCase oracle_case(std::string group, int generators, Eval eval, Mul mul, Canon canon) {
  OracleCase c{std::move(group), generators, {}, {}};
  c.key = [=](const Word& w) { return join_key(canon(eval(w))); };
  c.spelled_key = [=](const SyllableWord& spelling) {
    auto acc = eval(Word{});
    for (const auto& syl : spelling) {
      auto base = eval(free_reduce(std::vector<Letter>{Letter(syl.generator, syl.power < 0)}));
      mpz_class e = abs(syl.power);
      auto p = eval(Word{});
      while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) p = mul(p, base);
        base = mul(base, base);
        e >>= 1;
      }
      acc = mul(acc, p);
    }
    return join_key(canon(acc));
  };
  return c;
}

Word reduced_word(std::mt19937_64& rng, int generators, std::size_t max_len) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  std::vector<Letter> raw;
  while (raw.size() < n) {
    const Letter l(static_cast<int>(rng() % static_cast<unsigned>(generators)), rng() % 2 == 1);
    if (raw.empty() || !(raw.back() == l.inverse())) raw.push_back(l);
  }
  return free_reduce(raw);
}

Outcome oracle_equivalence(Context&) {
  Outcome o;
  const auto same = [](const auto& x) { return x; };
  const std::vector<OracleCase> cases = {
      oracle_case("bs12", 2, oracle::bs_eval, oracle::bs_mul, oracle::bs_normal_form),
      oracle_case("gmbs23", 3, oracle::gmbs_eval, oracle::gmbs_mul, oracle::gmbs_normal_form),
      oracle_case("sl2z", 2, oracle::sl2_eval, oracle::m2_mul, same),
      oracle_case("heisenberg", 3, oracle::heisenberg_eval, oracle::m3_mul, oracle::heisenberg_normal_form),
  };
  std::size_t total_failures = 0;
  for (const auto& c : cases) {
    const auto g = make_group(c.group);
    std::mt19937_64 rng(fnv1a(c.group));
    std::map<std::string, std::string> nf_to_oracle, oracle_to_nf;
    std::size_t failures = 0, repeats = 0;
    for (int i = 0; i < 10000; ++i) {
      const Word w = reduced_word(rng, c.generators, i % 3 == 0 ? 6 : 40);
      const NormalForm nf = g->normal_form(w);
      const std::string nk = join_key(nf.exponents), ok = c.key(w);
      if (c.spelled_key(nf.spelling) != ok) ++failures;
      const auto [a, fresh_a] = nf_to_oracle.emplace(nk, ok);
      const auto [b, fresh_b] = oracle_to_nf.emplace(ok, nk);
      if (a->second != ok || b->second != nk) ++failures;
      if (!fresh_a) ++repeats;
    }
    total_failures += failures;
    const std::string line = c.group + ": 10000 words, " + std::to_string(nf_to_oracle.size()) + " distinct elements, " +
                             std::to_string(repeats) + " repeated, " + std::to_string(failures) + " failures";
    if (failures) o.fail(line);
    else o.note(line);
  }
  o.summary = std::to_string(total_failures) + " failures over 4 x 10^4 words";
  return o;
}

// ---- 4 ----

Outcome rewriting_soundness(Context&) {
  Outcome o;
  const auto g = make_sl2z();
  const RewritingSystem sys = kb_complete(g->presentation(), Ranking(2));
  const bool confluent = sys.confluent() && sys.verify_confluence();
  if (confluent) o.note("completion confluent with " + std::to_string(sys.rules().size()) + " rules");
  else o.fail("completion did not reach a confluent system");
  const Letter S(0, false), R(1, false);
  const LetterString rrr{R, R, R}, ss{S, S};
  if (confluent && sys.rewrite_nf(rrr) == ss) o.note("R R R -> S S");
  else o.fail("R R R does not rewrite to S S");
  if (!confluent) {
    o.summary = "not confluent";
    return o;
  }
  std::mt19937_64 rng(44);
  std::vector<Word> relators;
  for (const auto& r : g->presentation().relators) {
    relators.push_back(r);
    relators.push_back(r.inverse());
  }
  std::size_t equal = 0, mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const Word u = oracle::random_word(rng, 2, i % 2 ? 6 : 24);
    Word v;
    if (i % 4 == 0) {
      // Same element, different spelling: splice a relator into u.
      const auto& r = relators[rng() % relators.size()];
      const std::size_t at = rng() % (u.size() + 1);
      std::vector<Letter> raw(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(at));
      raw.insert(raw.end(), r.begin(), r.end());
      raw.insert(raw.end(), u.begin() + static_cast<std::ptrdiff_t>(at), u.end());
      v = free_reduce(raw);
    } else {
      v = oracle::random_word(rng, 2, i % 2 ? 6 : 24);
    }
    const bool nf_equal = sys.rewrite_nf(u) == sys.rewrite_nf(v);
    const bool matrix_equal = oracle::sl2_eval(u) == oracle::sl2_eval(v);
    equal += matrix_equal;
    mismatches += nf_equal != matrix_equal;
  }
  const std::string line = "1000 pairs, " + std::to_string(equal) + " equal in SL(2,Z), " + std::to_string(mismatches) +
                           " disagreements";
  if (mismatches) o.fail(line);
  else o.note(line);
  o.summary = o.pass ? "confluent, RRR -> SS, 1000 pairs agree with matrices" : "rewriting unsound";
  return o;
}

// ---- 5 ----

std::size_t independent_violations(const Group& g, const Dataset& d) {
  std::size_t bad = 0;
  const auto& ab = g.abelianization();
  for (const auto& p : d.pairs) {
    if (p.label == kConjugate) {
      bad += !p.t || !(g.conjugate(p.u, *p.t) == p.v);
    } else {
      const auto iu = g.abelianization_image(p.u), iv = g.abelianization_image(p.v);
      bad += ab.is_zero(iu) || ab.is_zero(iv) || iu == iv;
    }
  }
  return bad;
}

Outcome label_soundness(Context& ctx) {
  Outcome o;
  std::size_t checked = 0, violations = 0;
  for (const std::string group : {"bs12", "gmbs23", "sl2z", "heisenberg"}) {
    const auto g = make_group(group);
    for (int c = 0; c < 4; ++c) {
      const auto coll = static_cast<CollectionId>(c);
      const auto start = std::chrono::steady_clock::now();
      std::array<Dataset, 3> sets;
      if (coll == CollectionId::D0 && ctx.desk.count(group)) {
        sets = ctx.desk.at(group);
      } else {
        CollectionConfig cc;
        cc.collection = coll;
        cc.pairs_per_class = (kSoundnessPairs + 5) / 6;
        cc.seed = kDeskSeed + 1;
        cc.workers = ctx.workers;
        sets = build_collection(*g, cc);
      }
      std::size_t pairs = 0, bad = 0;
      std::set<std::string> keys;
      std::size_t repeats = 0;
      for (const auto& d : sets) {
        pairs += d.pairs.size();
        bad += audit_dataset(*g, d).size() + independent_violations(*g, d);
        for (const auto& p : d.pairs) repeats += !keys.insert(pair_key(*g, p)).second;
      }
      checked += pairs;
      violations += bad;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::string line = group + " " + std::string(to_string(coll)) + ": " + std::to_string(pairs) + " pairs, " +
                         std::to_string(bad) + " violations, " + std::to_string(repeats) + " cross-split repeats (" +
                         fixed(secs, 1) + "s)";
      if (bad || pairs < kSoundnessPairs) o.fail(line);
      else o.note(line);
    }
  }
  o.summary = std::to_string(checked) + " pairs checked, " + std::to_string(violations) + " violations";
  return o;
}

// ---- 6 ----

Outcome accuracy_bands(Context& ctx) {
  Outcome o;
  struct Band {
    std::string group, recipe;
    double floor;
  };
  for (const Band& b : {Band{"gmbs23", "c1", 0.90}, Band{"sl2z", "cm", 0.90}, Band{"bs12", "c1", 0.80}}) {
    const auto& sets = ctx.desk_set(b.group);
    const FeatureRecipe recipe(make_group(b.group), b.recipe);
    const auto out = train_model(forest_config(b.recipe, 10), recipe, sets[0], nullptr, kDeskSeed, ctx.workers);
    const double acc = model_accuracy(out.model, featurize(recipe, sets[2], ctx.workers));
    const std::string line = b.group + " forest 10 entropy " + b.recipe + ": " + fixed(acc) + " (band >= " +
                             fixed(b.floor, 2) + ")";
    if (acc >= b.floor) o.note(line);
    else o.fail(line);
  }
  const auto& sl = ctx.desk_set("sl2z");
  const FeatureRecipe c2(make_sl2z(), "c2");
  const TrainingSet sv = featurize(c2, sl[2], ctx.workers);
  double best = -1;
  for (std::size_t m : {20, 30})
    for (std::size_t p : {3, 4})
      for (auto crit : {NtnnCriterion::voting, NtnnCriterion::log_voting}) {
        ModelConfig mc;
        mc.family = "ntnn";
        mc.recipe = "c2";
        mc.patterns = m;
        mc.width = p;
        mc.ntnn_criterion = crit;
        const std::string settings =
            "M=" + std::to_string(m) + " P=" + std::to_string(p) + " " + std::string(to_string(crit));
        try {
          const auto out = train_model(mc, c2, sl[0], &sl[1], kDeskSeed, ctx.workers);
          const double acc = model_accuracy(out.model, sv);
          o.note("sl2z ntnn c2 " + settings + ": " + fixed(acc) + " (" + out.run->stop_reason + ", " +
                 std::to_string(out.run->tested) + " tested)");
          if (acc > best) {
            best = acc;
            ctx.best_ntnn = out.model;
            ctx.best_ntnn_settings = settings;
          }
        } catch (const Error& e) {
          o.note("sl2z ntnn c2 " + settings + ": " + e.what());
        }
      }
  const std::string line = "sl2z ntnn c2 best (" + ctx.best_ntnn_settings + "): " + fixed(best) + " (band >= 0.95)";
  if (best >= 0.95) o.note(line);
  else o.fail(line);
  o.summary = o.pass ? "all four bands met" : "a band was missed";
  return o;
}

// ---- 7 ----

Outcome forest_size(Context& ctx) {
  Outcome o;
  const auto& sets = ctx.desk_set("gmbs23");
  const FeatureRecipe recipe(make_gmbs23(), "c1");
  const TrainingSet sv = featurize(recipe, sets[2], ctx.workers);
  double acc[2];
  for (int i = 0; i < 2; ++i) {
    const std::size_t trees = i ? 100 : 10;
    const auto out = train_model(forest_config("c1", trees), recipe, sets[0], nullptr, kDeskSeed, ctx.workers);
    acc[i] = model_accuracy(out.model, sv);
    o.note("gmbs23 forest " + std::to_string(trees) + " trees: " + fixed(acc[i]));
  }
  o.pass = acc[1] >= acc[0] - 0.02;
  o.summary = "100 trees " + fixed(acc[1]) + " vs 10 trees " + fixed(acc[0]) + " - 0.02";
  return o;
}

// ---- 8 ----

bool same_threshold(const LengthThreshold& a, const LengthThreshold& b) {
  return a.length == b.length && a.below == b.below && a.above == b.above && a.gap == b.gap &&
         a.candidates == b.candidates && a.tie == b.tie && a.degenerate == b.degenerate;
}

Outcome length_trend(Context& ctx) {
  Outcome o;
  if (!ctx.best_ntnn) accuracy_bands(ctx);
  if (!ctx.best_ntnn) {
    o.fail("no N-tuple model could be trained");
    o.summary = "no model";
    return o;
  }
  const auto& sl = ctx.desk_set("sl2z");
  const auto g = make_sl2z();
  const EvalReport r = evaluate(*ctx.best_ntnn, FeatureRecipe(g, "c2"), sl[2], ctx.workers);
  const json j = json::parse(report_json(r));
  bool trend = false, exact = true;
  for (int c = 0; c < 2; ++c) {
    const auto& t = r.thresholds[static_cast<std::size_t>(c)];
    if (!t) {
      o.note(class_name(c) + ": series too short");
      continue;
    }
    const bool up = t->above > t->below;
    trend = trend || up;
    o.note(class_name(c) + ": L = " + std::to_string(t->length) + ", below " + fixed(t->below) + ", above " +
           fixed(t->above) + (up ? "" : " (no improvement)"));
    const bool direct = same_threshold(length_threshold(r.per_length[static_cast<std::size_t>(c)]), *t);
    const json& cj = j.at("classes").at(c);
    LengthSeries series;
    for (const auto& p : cj.at("per_length"))
      series.push_back({p.at("length").get<std::int64_t>(), p.at("correct").get<std::size_t>(),
                        p.at("total").get<std::size_t>()});
    const auto& tj = cj.at("threshold");
    LengthThreshold stored;
    stored.length = tj.at("length").get<std::int64_t>();
    stored.below = tj.at("below").get<double>();
    stored.above = tj.at("above").get<double>();
    stored.gap = tj.at("gap").get<double>();
    stored.candidates = tj.at("candidates").get<std::vector<std::int64_t>>();
    stored.tie = tj.at("tie").get<bool>();
    stored.degenerate = tj.at("degenerate").get<bool>();
    const bool from_report = same_threshold(length_threshold(series), stored);
    if (!direct || !from_report) {
      exact = false;
      o.fail(class_name(c) + ": threshold does not recompute from the series");
    }
  }
  if (!trend) o.fail("no class is more accurate on longer words");
  o.note("model: ntnn c2 " + ctx.best_ntnn_settings + ", overall " + fixed(r.accuracy()));
  o.summary = std::string(trend ? "longer words more accurate for at least one class" : "no length trend") +
              (exact ? ", thresholds recompute exactly" : ", recomputation mismatch");
  return o;
}

// ---- 9 ----

std::map<std::string, std::string> artifact_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const char* sub : {"data", "models", "reports"}) {
    if (!fs::exists(root / sub)) continue;
    for (const auto& e : fs::recursive_directory_iterator(root / sub)) {
      if (!e.is_regular_file()) continue;
      std::ifstream f(e.path(), std::ios::binary);
      std::ostringstream s;
      s << f.rdbuf();
      out[e.path().lexically_relative(root).generic_string()] = s.str();
    }
  }
  return out;
}

void pipeline_run(const fs::path& out, unsigned workers) {
  fs::remove_all(out);
  ExperimentConfig a;
  a.out = out;
  a.seed = 99;
  a.workers = workers;
  a.data.group = "bs12";
  a.data.pairs = 300;
  a.data.max_length = 54;
  cmd_gen(a);
  cmd_train(a, dataset_path(a, SplitId::Si), dataset_path(a, SplitId::So), default_model_path(a));
  cmd_eval(a, default_model_path(a), dataset_path(a, SplitId::Sv));

  ExperimentConfig b = a;
  b.data.group = "sl2z";
  b.data.collection = CollectionId::D3;
  b.data.pairs = 150;
  b.data.max_length = 40;
  b.model.family = "ntnn";
  b.model.recipe = "c2";
  b.model.ntnn_criterion = NtnnCriterion::log_voting;
  b.model.optimize.budget = 200;
  cmd_gen(b);
  cmd_train(b, dataset_path(b, SplitId::Si), dataset_path(b, SplitId::So), default_model_path(b));
  cmd_eval(b, default_model_path(b), dataset_path(b, SplitId::Sv));
}

Outcome determinism(Context& ctx) {
  Outcome o;
  const fs::path one = ctx.dir / "determinism-a", two = ctx.dir / "determinism-b";
  pipeline_run(one, 1);
  pipeline_run(two, std::max(2u, ctx.workers));
  const auto a = artifact_bytes(one), b = artifact_bytes(two);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) {
      ++differing;
      o.fail(name + " differs between runs");
    }
  }
  if (a.size() != b.size()) o.fail("runs produced different file sets");
  std::size_t reports = 0;
  for (const auto& [name, bytes] : a) reports += name.rfind("reports/", 0) == 0;
  if (reports != 4) o.fail("expected 4 report files, found " + std::to_string(reports));
  o.note(std::to_string(a.size()) + " artifacts compared (datasets, metadata, models, reports); workers 1 vs " +
         std::to_string(std::max(2u, ctx.workers)));
  o.summary = differing ? std::to_string(differing) + " artifacts differ" : "byte-identical re-run";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  std::string dir = (fs::temp_directory_path() / "cdp-acceptance").string();
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("criteria", only, "criteria to run (default: all)");
  app.add_option("--dir", dir, "scratch directory for pipeline runs");
  app.add_option("--workers", workers, "worker threads");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.dir = dir;
  ctx.workers = workers;
  fs::create_directories(ctx.dir);

  const std::vector<std::pair<std::string, Outcome (*)(Context&)>> criteria = {
      {"structural feature dimensions", structural},
      {"N-tuple table reproduction", ntnn_table},
      {"oracle equivalence", oracle_equivalence},
      {"rewriting soundness", rewriting_soundness},
      {"label soundness", label_soundness},
      {"desk-scale accuracy bands", accuracy_bands},
      {"forest-size trend", forest_size},
      {"per-length trend", length_trend},
      {"determinism", determinism},
  };
  int failed = 0;
  const auto all_start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& d : o.details) std::cout << "    " << d << "\n";
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << criteria[i].first << "): " << o.summary
              << " [" << fixed(secs, 1) << "s]" << std::endl;
    failed += !o.pass;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - all_start).count();
  std::cout << failed << " criteria failed, total " << fixed(total, 1) << "s" << std::endl;
  return failed ? 1 : 0;
}
