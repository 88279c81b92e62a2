#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cdp/error.hpp"
#include "cdp/pipeline.hpp"
#include "json.hpp"

using namespace cdp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cdp-test-pipeline-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

ExperimentConfig small(const fs::path& out, const std::string& group = "bs12") {
  ExperimentConfig c;
  c.out = out;
  c.seed = 7;
  c.data.group = group;
  c.data.pairs = 60;
  c.data.max_length = 30;
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::invalid_argument;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(CDP_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config keys, validation and snapshots") {
  ExperimentConfig c;
  c.set("data.group", "sl2z");
  c.set("data.collection", "D3");
  c.set("model.theta_omega", "0.9");
  c.set("grid.patterns", std::vector<std::string>{"10, 20", "30"});
  CHECK(c.data.collection == CollectionId::D3);
  CHECK(c.grid.patterns == std::vector<std::string>{"10", "20", "30"});
  c.validate();

  CHECK(code_of([&] { c.set("data.nonsense", "1"); }) == ErrorCode::config_error);
  CHECK(code_of([&] { c.set("data.pairs", "ten"); }) == ErrorCode::config_error);
  CHECK(code_of([&] { c.set("data.collection", "D9"); }) == ErrorCode::config_error);
  ExperimentConfig bad;
  bad.model.family = "svm";
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config_error);
  bad = {};
  bad.model.width = 9;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config_error);
  bad = {};
  bad.grid.criteria = std::vector<std::string>{};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config_error);

  const fs::path dir = scratch("snapshot");
  c.out = dir;
  const fs::path snap = write_snapshot(c, "gen");
  ExperimentConfig back;
  load_config_file(back, snap);
  CHECK(back.snapshot() == c.snapshot());
  CHECK(back.hash() == c.hash());

  ExperimentConfig moved = c;
  moved.out = "elsewhere";
  moved.workers = 8;
  CHECK(moved.hash() == c.hash());
  moved.seed = 8;
  CHECK(moved.hash() != c.hash());
}

TEST_CASE("config files use sections and lists") {
  const fs::path dir = scratch("ini");
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << "seed = 11\n[data]\ngroup = gmbs23\npairs = 5\n[model]\nfamily = ntnn\n"
                                    "[grid]\npatterns = 10, 20\nwidths = [3, 4]\n";
  ExperimentConfig c;
  load_config_file(c, dir / "run.ini");
  CHECK(c.seed == 11);
  CHECK(c.data.group == "gmbs23");
  CHECK(c.data.pairs == 5);
  CHECK(c.model.family == "ntnn");
  CHECK(c.grid.widths == std::vector<std::string>{"3", "4"});
  CHECK(code_of([&] { load_config_file(c, dir / "missing.ini"); }) == ErrorCode::io_error);
}

TEST_CASE("gen, train, eval and refusals") {
  const fs::path dir = scratch("flow");
  auto c = small(dir);
  const auto gen = cmd_gen(c);
  CHECK(gen.sizes == std::array<std::size_t, 3>{120, 120, 120});
  const auto meta = json::parse(slurp(meta_path(dataset_path(c, SplitId::Si))));
  CHECK(meta.at("tool_version") == std::string(tool_version()));
  CHECK(meta.at("config_hash") == c.hash());

  const auto train = cmd_train(c, dataset_path(c, SplitId::Si), dataset_path(c, SplitId::So), default_model_path(c));
  const auto model = json::parse(slurp(train.model_path));
  CHECK(model.at("config_hash") == c.hash());
  CHECK(model.at("training").at("samples") == 120);

  const auto ev = cmd_eval(c, train.model_path, dataset_path(c, SplitId::Sv));
  const std::string text = slurp(ev.text_path);
  CHECK(text.find("confusion") != std::string::npos);
  CHECK(text.find("per-length accuracy") != std::string::npos);
  const auto report = json::parse(slurp(ev.json_path));
  CHECK(report.at("samples") == 120);
  CHECK(report.at("classes").size() == 2);
  CHECK(report.at("tool_version") == std::string(tool_version()));

  auto other = small(dir, "gmbs23");
  cmd_gen(other);
  CHECK(code_of([&] { cmd_eval(c, train.model_path, dataset_path(other, SplitId::Sv)); }) == ErrorCode::refusal);
  CHECK(code_of([&] {
          cmd_train(c, dataset_path(other, SplitId::Si), dataset_path(other, SplitId::So), dir / "x.json");
        }) == ErrorCode::refusal);

  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("files").contains("data/bs12-D0-S_i.jsonl"));
  CHECK(manifest.at("files").contains("reports/bs12-forest-c1-D0-S_v.json"));
  CHECK(manifest.at("files").at("models/bs12-forest-c1.json").at("fnv1a64") == file_digest(train.model_path));
  CHECK(fs::exists(dir / "config" / "eval.ini"));
}

TEST_CASE("gen is byte-identical on re-run") {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  auto ca = small(a), cb = small(b);
  cb.workers = 3;
  cmd_gen(ca);
  cmd_gen(cb);
  for (int s = 0; s < 3; ++s) {
    const auto split = static_cast<SplitId>(s);
    CHECK(slurp(dataset_path(ca, split)) == slurp(dataset_path(cb, split)));
    CHECK(slurp(meta_path(dataset_path(ca, split))) == slurp(meta_path(dataset_path(cb, split))));
  }
}

TEST_CASE("optimize resumes and is a no-op at the goal") {
  const fs::path dir = scratch("opt");
  auto c = small(dir, "sl2z");
  c.model.family = "ntnn";
  c.model.recipe = "c2";
  c.model.optimize.budget = 3;
  c.model.optimize.theta_alpha = 0.5;
  cmd_gen(c);
  const auto path = default_model_path(c);
  const auto train = cmd_train(c, dataset_path(c, SplitId::Si), dataset_path(c, SplitId::So), path);
  REQUIRE(train.run);
  const auto before = load_model(path);
  const auto r = cmd_optimize(c, path, dataset_path(c, SplitId::Si), dataset_path(c, SplitId::So));
  if (!r.skipped) {
    CHECK(r.run.tested <= 3);
    const auto after = load_model(path);
    const auto& b = std::get<NtnnModel>(before.body);
    const auto& a = std::get<NtnnModel>(after.body);
    CHECK(a.classes[0].cursor + a.classes[1].cursor >= b.classes[0].cursor + b.classes[1].cursor + r.run.tested);
    CHECK(json::parse(slurp(path)).at("optimizations").size() == 1);
  }
  auto goal = c;
  goal.model.optimize.theta_omega = 0.5;
  const std::string bytes = slurp(path);
  const auto noop = cmd_optimize(goal, path, dataset_path(c, SplitId::Si), dataset_path(c, SplitId::So));
  CHECK(noop.skipped);
  CHECK(noop.message.find("nothing to do") != std::string::npos);
  CHECK(slurp(path) == bytes);

  auto forest = small(dir);
  cmd_gen(forest);
  const auto fpath = cmd_train(forest, dataset_path(forest, SplitId::Si), dataset_path(forest, SplitId::So),
                               default_model_path(forest)).model_path;
  CHECK(code_of([&] { cmd_optimize(forest, fpath, dataset_path(forest, SplitId::Si), dataset_path(forest, SplitId::So)); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("grid rows, failed cells and the best flag") {
  const fs::path dir = scratch("grid");
  auto c = small(dir);
  c.model.family = "ntnn";
  c.model.recipe = "c0";
  c.grid.patterns = std::vector<std::string>{"10", "20"};
  c.grid.widths = std::vector<std::string>{"3", "4"};
  const auto g = cmd_grid(c);
  REQUIRE(g.rows.size() == 4);
  int best = 0;
  for (const auto& r : g.rows) {
    best += r.best;
    if (!r.ok) CHECK_FALSE(r.error.empty());
  }
  CHECK(best == 1);
  CHECK(fs::exists(g.text_path));
  CHECK(json::parse(slurp(g.json_path)).at("rows").size() == 4);

  auto crit = small(dir);
  crit.grid.criteria = std::vector<std::string>{"gini", "entropy"};
  crit.grid.recipes = std::vector<std::string>{"c1", "cm"};
  const auto g2 = cmd_grid(crit);
  REQUIRE(g2.rows.size() == 4);
  CHECK(g2.rows[0].ok);
  CHECK_FALSE(g2.rows[2].ok);
  CHECK(g2.rows[2].error.find("cm") != std::string::npos);

  auto empty = small(dir);
  CHECK(code_of([&] { cmd_grid(empty); }) == ErrorCode::config_error);
}

TEST_CASE("inspect and exit codes") {
  const fs::path dir = scratch("inspect");
  auto c = small(dir, "sl2z");
  CHECK(cmd_inspect(c, std::nullopt, std::nullopt).find("abelianization Z/12") != std::string::npos);
  cmd_gen(c);
  CHECK(cmd_inspect(c, dataset_path(c, SplitId::Sv), std::nullopt).find("audit: clean") != std::string::npos);

  auto file = small(dir, std::string(CDP_DATA_DIR) + "/pcp/heisenberg.pcp");
  CHECK(dataset_path(file, SplitId::Si) == dir / "data" / "heisenberg-D0-S_i.jsonl");
  CHECK(default_model_path(file) == dir / "models" / "heisenberg-forest-c1.json");

  CHECK(exit_code(ErrorCode::config_error) == 2);
  CHECK(exit_code(ErrorCode::target_unreachable) == 3);
  CHECK(exit_code(ErrorCode::io_error) == 4);
  CHECK(exit_code(ErrorCode::refusal) == 5);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const std::string out = "--out " + dir.string();
  CHECK(run_cli(out + " gen --group bs12 --collection D0 --pairs 200 --min-len 5 --max-len 54 --seed 7") == 0);
  const std::string first = slurp(dir / "data" / "bs12-D0-S_i.jsonl");
  CHECK(run_cli(out + " gen --group bs12 --collection D0 --pairs 200 --min-len 5 --max-len 54 --seed 7") == 0);
  CHECK(slurp(dir / "data" / "bs12-D0-S_i.jsonl") == first);
  CHECK(run_cli(out + " gen --collection D7") == 2);
  CHECK(run_cli(out + " gen --group nosuchgroup") == 2);
  CHECK(run_cli(out + " gen --group bs12 --min-len 1 --max-len 1 --pairs 50 --collection D1") == 3);
  CHECK(run_cli(out + " --seed 7 train --group bs12") == 0);
  CHECK(run_cli(out + " --seed 7 eval --group bs12") == 0);
  CHECK(run_cli(out + " gen --group gmbs23 --pairs 50 --max-len 30") == 0);
  CHECK(run_cli(out + " eval --group gmbs23 --model " + (dir / "models" / "bs12-forest-c1.json").string()) == 5);
  CHECK(run_cli(out + " eval --group bs12 --model " + (dir / "missing.json").string()) == 4);
  CHECK(run_cli(out + " grid --group bs12") == 2);
  CHECK(run_cli(out + " frobnicate") == 2);
}
