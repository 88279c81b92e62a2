#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdp/error.hpp"
#include "cdp/pipeline.hpp"

namespace fs = std::filesystem;
using cdp::ExperimentConfig;
using cdp::SplitId;

namespace {

using Values = std::map<std::string, std::vector<std::string>>;

void option(CLI::App* app, Values& values, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option(flag, values[key], help)->expected(1)->type_name("VALUE");
}

void list_option(CLI::App* app, Values& values, const std::string& flag, const std::string& key,
                 const std::string& help) {
  app->add_option(flag, values[key], help)->delimiter(',')->type_name("LIST");
}

void data_options(CLI::App* app, Values& v) {
  option(app, v, "--group", "data.group", "built-in group name or pcp file");
  option(app, v, "--collection", "data.collection", "D0, D1, D2 or D3");
}

void model_options(CLI::App* app, Values& v) {
  option(app, v, "--family", "model.family", "tree, forest or ntnn");
  option(app, v, "--recipe", "model.recipe", "feature recipe (c0, c1, c2, ..., cm)");
  option(app, v, "--criterion", "model.criterion", "gini or entropy");
  option(app, v, "--depth", "model.depth", "none, auto or a level count");
  option(app, v, "--trees", "model.trees", "forest size");
  option(app, v, "--vote", "model.vote", "vote or average");
  option(app, v, "--patterns", "model.patterns", "N-tuple patterns per class (M)");
  option(app, v, "--width", "model.width", "N-tuple pattern size (P)");
  option(app, v, "--ntnn-criterion", "model.ntnn_criterion", "voting or log-voting");
  option(app, v, "--theta-alpha", "model.theta_alpha", "restart acceptance accuracy");
  option(app, v, "--theta-omega", "model.theta_omega", "optimization goal accuracy");
  option(app, v, "--restarts", "model.restarts", "restart budget");
  option(app, v, "--budget", "model.budget", "optimization candidates to test (0: one full pass)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conjugacy decision datasets, classifiers and reports"};
  app.set_version_flag("--version", std::string(cdp::tool_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Values v;
  std::string config_file;
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "INI config file")->type_name("FILE");
  option(&app, v, "--seed", "seed", "master seed");
  option(&app, v, "--workers", "workers", "worker threads");
  option(&app, v, "--out", "out", "run directory");
  app.add_option("--set", sets, "override a config key, e.g. model.trees=100")->type_name("KEY=VALUE");

  auto* gen = app.add_subcommand("gen", "generate S_i, S_o and S_v of one collection");
  data_options(gen, v);
  option(gen, v, "--pairs", "data.pairs", "pairs per class");
  option(gen, v, "--min-len", "data.min_len", "shortest word length");
  option(gen, v, "--max-len", "data.max_len", "longest word length");
  option(gen, v, "--pool-size", "data.pool_size", "word pool size for D1-D3 (0: 4 * pairs)");
  option(gen, v, "--d3-cap", "data.d3_cap", "longest D3 non-conjugate |v| (0: 2 * max-len)");
  bool full_scale = false;
  gen->add_flag("--full-scale", full_scale, "20000 pairs per class, lengths [5,1004], pool 250000");

  std::string train_path, opt_path, model_path, data_path;
  auto* train = app.add_subcommand("train", "train a model on S_i (N-tuple networks also optimize on S_o)");
  data_options(train, v);
  model_options(train, v);
  train->add_option("--train", train_path, "training set (default: run S_i)");
  train->add_option("--opt", opt_path, "optimization set (default: run S_o)");
  train->add_option("--model", model_path, "output model (default: run models/)");

  auto* optimize = app.add_subcommand("optimize", "resume N-tuple pattern optimization");
  data_options(optimize, v);
  option(optimize, v, "--recipe", "model.recipe", "recipe used for the default model path");
  option(optimize, v, "--theta-omega", "model.theta_omega", "optimization goal accuracy");
  option(optimize, v, "--budget", "model.budget", "candidates to test (0: one full pass)");
  optimize->add_option("--model", model_path, "model to update (default: run models/)");
  optimize->add_option("--train", train_path, "training set (default: run S_i)");
  optimize->add_option("--opt", opt_path, "optimization set (default: run S_o)");

  std::string split = "S_v";
  auto* eval = app.add_subcommand("eval", "evaluate a model and write text and JSON reports");
  data_options(eval, v);
  option(eval, v, "--family", "model.family", "family used for the default model path");
  option(eval, v, "--recipe", "model.recipe", "recipe used for the default model path");
  eval->add_option("--model", model_path, "model file (default: run models/)");
  eval->add_option("--data", data_path, "dataset (default: run split of --split)");
  eval->add_option("--split", split, "S_i, S_o or S_v");

  auto* grid = app.add_subcommand("grid", "train and score every combination of the listed settings");
  data_options(grid, v);
  model_options(grid, v);
  list_option(grid, v, "--groups", "grid.groups", "groups");
  list_option(grid, v, "--families", "grid.families", "model families");
  list_option(grid, v, "--recipes", "grid.recipes", "feature recipes");
  list_option(grid, v, "--criteria", "grid.criteria", "split criteria");
  list_option(grid, v, "--depths", "grid.depths", "depth limits");
  list_option(grid, v, "--trees-list", "grid.trees", "forest sizes");
  list_option(grid, v, "--patterns-list", "grid.patterns", "N-tuple pattern counts (M)");
  list_option(grid, v, "--widths", "grid.widths", "N-tuple pattern sizes (P)");
  list_option(grid, v, "--ntnn-criteria", "grid.ntnn_criteria", "N-tuple decision criteria");

  auto* inspect = app.add_subcommand("inspect", "describe a group, a dataset or a model");
  data_options(inspect, v);
  inspect->add_option("--data", data_path, "dataset file");
  inspect->add_option("--model", model_path, "model file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_file.empty()) cdp::load_config_file(cfg, config_file);
    if (full_scale) cfg.apply_full_scale();
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw cdp::Error(cdp::ErrorCode::config_error, "--set expects KEY=VALUE, got " + s);
      cfg.set(s.substr(0, eq), std::vector<std::string>{s.substr(eq + 1)});
    }
    for (const auto& [key, values] : v) {
      if (values.empty()) continue;
      if (key.rfind("grid.", 0) == 0) cfg.set(key, values);
      else cfg.set(key, values.back());
    }
    cfg.validate();

    auto or_default = [](const std::string& given, const fs::path& fallback) {
      return given.empty() ? fallback : fs::path(given);
    };

    if (*gen) {
      const auto r = cdp::cmd_gen(cfg);
      for (std::size_t i = 0; i < 3; ++i)
        std::cout << cdp::to_string(static_cast<SplitId>(i)) << ": " << r.sizes[i] << " pairs -> "
                  << cdp::dataset_path(cfg, static_cast<SplitId>(i)).string() << "\n";
    } else if (*train) {
      const auto r = cdp::cmd_train(cfg, or_default(train_path, cdp::dataset_path(cfg, SplitId::Si)),
                                    or_default(opt_path, cdp::dataset_path(cfg, SplitId::So)),
                                    or_default(model_path, cdp::default_model_path(cfg)));
      std::cout << "model -> " << r.model_path.string() << "\n";
      if (r.run)
        std::cout << "restarts " << r.run->restarts_used << ", S_o accuracy " << r.run->initial_accuracy << " -> "
                  << r.run->final_accuracy << " (" << r.run->tested << " tested, " << r.run->accepted
                  << " accepted, " << r.run->stop_reason << ")\n";
    } else if (*optimize) {
      cfg.model.family = "ntnn";
      const auto r = cdp::cmd_optimize(cfg, or_default(model_path, cdp::default_model_path(cfg)),
                                       or_default(train_path, cdp::dataset_path(cfg, SplitId::Si)),
                                       or_default(opt_path, cdp::dataset_path(cfg, SplitId::So)));
      std::cout << r.message << "\n";
    } else if (*eval) {
      const auto r = cdp::cmd_eval(cfg, or_default(model_path, cdp::default_model_path(cfg)),
                                   or_default(data_path, cdp::dataset_path(cfg, cdp::parse_split(split))));
      std::ifstream text(r.text_path);
      std::cout << text.rdbuf() << "\nreports -> " << r.text_path.string() << ", " << r.json_path.string() << "\n";
    } else if (*grid) {
      const auto r = cdp::cmd_grid(cfg);
      std::cout << cdp::grid_text(r) << "\nsummary -> " << r.text_path.string() << ", " << r.json_path.string()
                << "\n";
    } else if (*inspect) {
      std::optional<fs::path> d, m;
      if (!data_path.empty()) d = data_path;
      if (!model_path.empty()) m = model_path;
      std::cout << cdp::cmd_inspect(cfg, d, m);
    }
  } catch (const cdp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cdp::exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IO_ERROR: " << e.what() << "\n";
    return cdp::exit_code(cdp::ErrorCode::io_error);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
