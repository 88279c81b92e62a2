#include "cdp/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "cdp/error.hpp"
#include "cdp/parallel.hpp"
#include "json.hpp"

#ifndef CDP_VERSION
#define CDP_VERSION "0.0.0"
#endif

namespace cdp {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view tool_version() { return CDP_VERSION; }

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::config_error, key + " = '" + value + "': " + why);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) bad_value(key, text, "not a number");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(key, text, "not a boolean");
}

std::string number_text(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string join(const std::vector<std::string>& items, const std::string& sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::vector<std::string> split_values(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
    }
  }
  return out;
}

const std::string& single(const std::string& key, const std::vector<std::string>& values) {
  if (values.size() != 1) throw Error(ErrorCode::config_error, key + " takes exactly one value");
  return values.front();
}

void check_family(const std::string& f) {
  if (f != "tree" && f != "forest" && f != "ntnn")
    throw Error(ErrorCode::config_error, "unknown model family '" + f + "' (tree, forest or ntnn)");
}

void check_depth(const std::string& d) {
  if (d == "none" || d == "auto") return;
  const int v = parse_number<int>("model.depth", d);
  if (v < 1) bad_value("model.depth", d, "must be none, auto or at least 1");
}

template <class Fn>
auto as_config_error(const std::string& key, const std::string& value, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    bad_value(key, value, e.what());
  }
}

std::string group_name(const std::string& spec) {
  const auto names = builtin_group_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return spec;
  const fs::path p{spec};
  if (fs::exists(p)) return p.stem().string();
  throw Error(ErrorCode::config_error, "unknown group '" + spec + "' (not a built-in name or a file)");
}

std::string rel(const ExperimentConfig& cfg, const fs::path& p) {
  const fs::path r = p.lexically_normal().lexically_relative(cfg.out.lexically_normal());
  if (r.empty() || *r.begin() == "..") return p.generic_string();
  return r.generic_string();
}

json stamp(const ExperimentConfig& cfg) {
  return {{"tool_version", std::string(tool_version())}, {"config_hash", cfg.hash()}};
}

std::string hex64(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << v;
  return o.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

GroupHandle group_for(const ExperimentConfig& cfg, const std::string& name) {
  if (group_name(cfg.data.group) == name) return make_group(cfg.data.group);
  try {
    return make_group(name);
  } catch (const Error&) {
    throw Error(ErrorCode::refusal, "model group " + name + " does not match configured group " + cfg.data.group);
  }
}

std::string model_settings(const ModelConfig& m) {
  if (m.family == "ntnn")
    return "M=" + std::to_string(m.patterns) + " P=" + std::to_string(m.width) + " " +
           std::string(to_string(m.ntnn_criterion));
  std::string s = std::string(to_string(m.criterion)) + " depth=" + m.depth;
  if (m.family == "forest") s += " trees=" + std::to_string(m.trees);
  return s;
}

json model_params_json(const ModelConfig& m) {
  json j = {{"family", m.family}, {"recipe", m.recipe}};
  if (m.family == "ntnn") {
    j["patterns"] = m.patterns;
    j["width"] = m.width;
    j["criterion"] = std::string(to_string(m.ntnn_criterion));
    j["theta_alpha"] = m.optimize.theta_alpha;
    j["theta_omega"] = m.optimize.theta_omega;
    j["restarts"] = m.optimize.restarts;
    j["budget"] = m.optimize.budget;
  } else {
    j["criterion"] = std::string(to_string(m.criterion));
    j["depth"] = m.depth;
    if (m.family == "forest") {
      j["trees"] = m.trees;
      j["vote"] = std::string(to_string(m.vote));
    }
  }
  return j;
}

}  // namespace

bool GridConfig::any() const {
  return groups || families || recipes || criteria || depths || trees || patterns || widths || ntnn_criteria;
}

void ExperimentConfig::set(const std::string& key_in, const std::vector<std::string>& raw) {
  std::string key = key_in;
  if (key.rfind("run.", 0) == 0) key = key.substr(4);
  if (key.rfind("grid.", 0) == 0) {
    const std::string name = key.substr(5);
    std::optional<std::vector<std::string>>* slot = nullptr;
    if (name == "groups") slot = &grid.groups;
    else if (name == "families") slot = &grid.families;
    else if (name == "recipes") slot = &grid.recipes;
    else if (name == "criteria") slot = &grid.criteria;
    else if (name == "depths") slot = &grid.depths;
    else if (name == "trees") slot = &grid.trees;
    else if (name == "patterns") slot = &grid.patterns;
    else if (name == "widths") slot = &grid.widths;
    else if (name == "ntnn_criteria") slot = &grid.ntnn_criteria;
    else throw Error(ErrorCode::config_error, "unknown key " + key_in);
    *slot = split_values(raw);
    return;
  }
  const std::string& v = single(key_in, raw);
  if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "workers") workers = parse_number<unsigned>(key, v);
  else if (key == "out") out = v;
  else if (key == "data.group") data.group = v;
  else if (key == "data.collection") data.collection = as_config_error(key, v, [&] { return parse_collection(v); });
  else if (key == "data.pairs") data.pairs = parse_number<std::size_t>(key, v);
  else if (key == "data.min_len") data.min_length = parse_number<std::int64_t>(key, v);
  else if (key == "data.max_len") data.max_length = parse_number<std::int64_t>(key, v);
  else if (key == "data.pool_size") data.pool_size = parse_number<std::size_t>(key, v);
  else if (key == "data.d3_cap") data.d3_length_cap = parse_number<std::int64_t>(key, v);
  else if (key == "data.max_restarts") data.max_restarts = parse_number<std::size_t>(key, v);
  else if (key == "model.family") model.family = v;
  else if (key == "model.recipe") model.recipe = v;
  else if (key == "model.criterion") model.criterion = as_config_error(key, v, [&] { return parse_split_criterion(v); });
  else if (key == "model.depth") model.depth = v;
  else if (key == "model.trees") model.trees = parse_number<std::size_t>(key, v);
  else if (key == "model.vote") model.vote = as_config_error(key, v, [&] { return parse_forest_vote(v); });
  else if (key == "model.patterns") model.patterns = parse_number<std::size_t>(key, v);
  else if (key == "model.width") model.width = parse_number<std::size_t>(key, v);
  else if (key == "model.ntnn_criterion")
    model.ntnn_criterion = as_config_error(key, v, [&] { return parse_ntnn_criterion(v); });
  else if (key == "model.theta_alpha") model.optimize.theta_alpha = parse_number<double>(key, v);
  else if (key == "model.theta_omega") model.optimize.theta_omega = parse_number<double>(key, v);
  else if (key == "model.restarts") model.optimize.restarts = parse_number<std::size_t>(key, v);
  else if (key == "model.budget") model.optimize.budget = parse_number<std::size_t>(key, v);
  else if (key == "model.reserved_counts_wrong") model.optimize.reserved_counts_wrong = parse_bool(key, v);
  else throw Error(ErrorCode::config_error, "unknown key " + key_in);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::config_error, m); };
  group_name(data.group);
  if (data.pairs == 0) fail("data.pairs must be positive");
  if (data.min_length < 1 || data.max_length < data.min_length) fail("need 1 <= data.min_len <= data.max_len");
  if (data.d3_length_cap < 0) fail("data.d3_cap must be non-negative");
  if (workers == 0) fail("workers must be positive");
  check_family(model.family);
  pair_recipe_kind(model.recipe);
  check_depth(model.depth);
  if (model.trees == 0) fail("model.trees must be positive");
  if (model.patterns == 0) fail("model.patterns must be positive");
  if (model.width == 0 || model.width > TupleKey::kMaxWidth) fail("model.width must be in [1, 8]");
  const auto& o = model.optimize;
  if (!(o.theta_alpha >= 0 && o.theta_alpha <= o.theta_omega && o.theta_omega <= 1))
    fail("need 0 <= model.theta_alpha <= model.theta_omega <= 1");
  if (o.restarts == 0) fail("model.restarts must be positive");
  auto nonempty = [&](const auto& list, const char* name) {
    if (list && list->empty()) fail(std::string("empty grid: grid.") + name + " has no values");
  };
  nonempty(grid.groups, "groups");
  nonempty(grid.families, "families");
  nonempty(grid.recipes, "recipes");
  nonempty(grid.criteria, "criteria");
  nonempty(grid.depths, "depths");
  nonempty(grid.trees, "trees");
  nonempty(grid.patterns, "patterns");
  nonempty(grid.widths, "widths");
  nonempty(grid.ntnn_criteria, "ntnn_criteria");
  if (grid.groups)
    for (const auto& g : *grid.groups) group_name(g);
  if (grid.families)
    for (const auto& f : *grid.families) check_family(f);
  if (grid.recipes)
    for (const auto& r : *grid.recipes) pair_recipe_kind(r);
  if (grid.criteria)
    for (const auto& c : *grid.criteria) as_config_error("grid.criteria", c, [&] { return parse_split_criterion(c); });
  if (grid.depths)
    for (const auto& d : *grid.depths) check_depth(d);
  if (grid.trees)
    for (const auto& t : *grid.trees)
      if (parse_number<std::size_t>("grid.trees", t) == 0) fail("grid.trees must be positive");
  if (grid.patterns)
    for (const auto& m : *grid.patterns)
      if (parse_number<std::size_t>("grid.patterns", m) == 0) fail("grid.patterns must be positive");
  if (grid.widths)
    for (const auto& w : *grid.widths) {
      const auto p = parse_number<std::size_t>("grid.widths", w);
      if (p == 0 || p > TupleKey::kMaxWidth) fail("grid.widths must be in [1, 8]");
    }
  if (grid.ntnn_criteria)
    for (const auto& c : *grid.ntnn_criteria)
      as_config_error("grid.ntnn_criteria", c, [&] { return parse_ntnn_criterion(c); });
}

namespace {

std::string snapshot_text(const ExperimentConfig& c, bool location) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n";
  if (location) o << "workers = " << c.workers << "\nout = " << c.out.generic_string() << "\n";
  o << "\n[data]\n";
  o << "group = " << c.data.group << "\n";
  o << "collection = " << to_string(c.data.collection) << "\n";
  o << "pairs = " << c.data.pairs << "\n";
  o << "min_len = " << c.data.min_length << "\n";
  o << "max_len = " << c.data.max_length << "\n";
  o << "pool_size = " << c.data.pool_size << "\n";
  o << "d3_cap = " << c.data.d3_length_cap << "\n";
  o << "max_restarts = " << c.data.max_restarts << "\n";
  o << "\n[model]\n";
  o << "family = " << c.model.family << "\n";
  o << "recipe = " << c.model.recipe << "\n";
  o << "criterion = " << to_string(c.model.criterion) << "\n";
  o << "depth = " << c.model.depth << "\n";
  o << "trees = " << c.model.trees << "\n";
  o << "vote = " << to_string(c.model.vote) << "\n";
  o << "patterns = " << c.model.patterns << "\n";
  o << "width = " << c.model.width << "\n";
  o << "ntnn_criterion = " << to_string(c.model.ntnn_criterion) << "\n";
  o << "theta_alpha = " << number_text(c.model.optimize.theta_alpha) << "\n";
  o << "theta_omega = " << number_text(c.model.optimize.theta_omega) << "\n";
  o << "restarts = " << c.model.optimize.restarts << "\n";
  o << "budget = " << c.model.optimize.budget << "\n";
  o << "reserved_counts_wrong = " << (c.model.optimize.reserved_counts_wrong ? "true" : "false") << "\n";
  if (c.grid.any()) {
    o << "\n[grid]\n";
    auto list = [&](const auto& l, const char* name) {
      if (l) o << name << " = " << join(*l) << "\n";
    };
    list(c.grid.groups, "groups");
    list(c.grid.families, "families");
    list(c.grid.recipes, "recipes");
    list(c.grid.criteria, "criteria");
    list(c.grid.depths, "depths");
    list(c.grid.trees, "trees");
    list(c.grid.patterns, "patterns");
    list(c.grid.widths, "widths");
    list(c.grid.ntnn_criteria, "ntnn_criteria");
  }
  return o.str();
}

}  // namespace

std::string ExperimentConfig::snapshot() const { return snapshot_text(*this, true); }

std::string ExperimentConfig::hash() const { return hex64(fnv1a(snapshot_text(*this, false))); }

void ExperimentConfig::apply_full_scale() {
  data.pairs = 20000;
  data.min_length = 5;
  data.max_length = 1004;
  data.pool_size = 250000;
}

void load_config_file(ExperimentConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read config " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string key;
    for (const auto& p : item.parents) key += p + ".";
    key += item.name;
    if (key.rfind("grid.", 0) == 0) {
      cfg.set(key, item.inputs);
    } else {
      std::vector<std::string> values;
      for (const auto& v : item.inputs)
        if (!v.empty()) values.push_back(v);
      cfg.set(key, values);
    }
  }
}

std::optional<int> resolve_depth(const std::string& depth, std::size_t samples) {
  if (depth == "none") return std::nullopt;
  if (depth == "auto") return default_depth_limit(samples);
  return parse_number<int>("depth", depth);
}

TrainingSet featurize(const FeatureRecipe& recipe, const Dataset& data, unsigned workers) {
  TrainingSet s;
  s.rows.resize(data.pairs.size());
  s.labels.resize(data.pairs.size());
  parallel_for(data.pairs.size(), workers, [&](std::size_t i) {
    s.rows[i] = recipe.pair_features(data.pairs[i].u, data.pairs[i].v);
    s.labels[i] = data.pairs[i].label;
  });
  return s;
}

namespace {

TrainOutcome train_on(const ModelConfig& mc, const FeatureRecipe& recipe, const TrainingSet& train,
                      const TrainingSet* opt, std::uint64_t seed, unsigned workers) {
  TrainOutcome out;
  out.model.group = recipe.group().name();
  out.model.recipe = recipe.name();
  TreeParams tp{mc.criterion, resolve_depth(mc.depth, train.size())};
  if (mc.family == "tree") {
    out.model.body = train_tree(train, tp);
  } else if (mc.family == "forest") {
    ForestParams fp;
    fp.trees = mc.trees;
    fp.tree = tp;
    fp.vote = mc.vote;
    fp.seed = derive_seed(seed, "forest");
    fp.workers = workers;
    out.model.body = train_forest(train, fp);
  } else if (mc.family == "ntnn") {
    if (!recipe.discrete())
      throw Error(ErrorCode::invalid_argument, "recipe " + recipe.name() + " has non-integer values");
    if (!opt) throw Error(ErrorCode::invalid_argument, "N-tuple training needs an optimization set");
    auto [model, run] = ntnn_fit(train, *opt, NtnnParams{mc.patterns, mc.width, mc.ntnn_criterion}, mc.optimize,
                                 derive_seed(seed, "ntnn"));
    out.model.body = std::move(model);
    out.run = std::move(run);
  } else {
    check_family(mc.family);
  }
  return out;
}

}  // namespace

TrainOutcome train_model(const ModelConfig& mc, const FeatureRecipe& recipe, const Dataset& train,
                         const Dataset* opt, std::uint64_t seed, unsigned workers) {
  const TrainingSet tr = featurize(recipe, train, workers);
  std::optional<TrainingSet> op;
  if (opt && mc.family == "ntnn") op = featurize(recipe, *opt, workers);
  return train_on(mc, recipe, tr, op ? &*op : nullptr, seed, workers);
}

std::string ntnn_run_json(const NtnnRun& run) {
  return json{{"restarts_used", run.restarts_used},
              {"initial_accuracy", run.initial_accuracy},
              {"final_accuracy", run.final_accuracy},
              {"tested", run.tested},
              {"accepted", run.accepted},
              {"stop_reason", run.stop_reason},
              {"history", run.history}}
      .dump();
}

fs::path dataset_path(const ExperimentConfig& cfg, SplitId split) {
  return cfg.out / "data" /
         (group_name(cfg.data.group) + "-" + std::string(to_string(cfg.data.collection)) + "-" +
          std::string(to_string(split)) + ".jsonl");
}

fs::path default_model_path(const ExperimentConfig& cfg) {
  return cfg.out / "models" /
         (group_name(cfg.data.group) + "-" + cfg.model.family + "-" + cfg.model.recipe + ".json");
}

fs::path write_snapshot(const ExperimentConfig& cfg, const std::string& command) {
  const fs::path p = cfg.out / "config" / (command + ".ini");
  write_text(p, "; " + command + ", tool " + std::string(tool_version()) + ", config hash " + cfg.hash() + "\n" +
                    cfg.snapshot());
  return p;
}

std::string file_digest(const fs::path& path) { return hex64(fnv1a(read_text(path))); }

void update_manifest(const ExperimentConfig& cfg, const std::string& command, const std::vector<fs::path>& files) {
  const fs::path mp = cfg.out / "manifest.json";
  json m = {{"format", "cdp-manifest"}, {"files", json::object()}};
  if (fs::exists(mp)) {
    try {
      m = json::parse(read_text(mp));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::format_error, mp.string() + ": " + e.what());
    }
  }
  m["tool_version"] = std::string(tool_version());
  for (const auto& f : files)
    m["files"][rel(cfg, f)] = {{"command", command},
                               {"config_hash", cfg.hash()},
                               {"fnv1a64", file_digest(f)},
                               {"bytes", fs::file_size(f)}};
  write_text(mp, m.dump(2) + "\n");
}

// ---- commands ----

GenResult cmd_gen(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto g = make_group(cfg.data.group);
  CollectionConfig cc;
  cc.collection = cfg.data.collection;
  cc.pairs_per_class = cfg.data.pairs;
  cc.min_length = cfg.data.min_length;
  cc.max_length = cfg.data.max_length;
  cc.seed = cfg.seed;
  cc.pool_size = cfg.data.pool_size;
  cc.d3_length_cap = cfg.data.d3_length_cap;
  cc.limits.max_restarts = cfg.data.max_restarts;
  cc.workers = cfg.workers;
  const auto sets = build_collection(*g, cc);
  GenResult r;
  const std::string extra = stamp(cfg).dump();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto violations = audit_dataset(*g, sets[i]);
    if (!violations.empty()) throw std::logic_error("generated data failed its audit: " + violations.front());
    const fs::path p = dataset_path(cfg, static_cast<SplitId>(i));
    fs::create_directories(p.parent_path());
    write_dataset(*g, sets[i], p, extra);
    r.files.push_back(p);
    r.files.push_back(meta_path(p));
    r.sizes[i] = sets[i].pairs.size();
  }
  r.files.push_back(write_snapshot(cfg, "gen"));
  update_manifest(cfg, "gen", r.files);
  return r;
}

TrainResult cmd_train(const ExperimentConfig& cfg, const fs::path& train_path, const fs::path& opt_path,
                      const fs::path& model_path) {
  cfg.validate();
  const auto g = make_group(cfg.data.group);
  const FeatureRecipe recipe(g, cfg.model.recipe);
  const Dataset train = read_dataset(*g, train_path);
  std::optional<Dataset> opt;
  if (cfg.model.family == "ntnn") opt = read_dataset(*g, opt_path);
  const auto outcome = train_model(cfg.model, recipe, train, opt ? &*opt : nullptr, cfg.seed, cfg.workers);
  json extra = stamp(cfg);
  extra["seed"] = cfg.seed;
  extra["hyperparameters"] = model_params_json(cfg.model);
  json training = {{"train", rel(cfg, train_path)}, {"samples", train.pairs.size()}};
  if (opt) {
    training["opt"] = rel(cfg, opt_path);
    training["opt_samples"] = opt->pairs.size();
  }
  if (outcome.run) training["ntnn_run"] = json::parse(ntnn_run_json(*outcome.run));
  extra["training"] = training;
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  save_model(outcome.model, model_path, extra.dump());
  update_manifest(cfg, "train", {model_path, write_snapshot(cfg, "train")});
  return {model_path, outcome.run};
}

OptimizeResult cmd_optimize(const ExperimentConfig& cfg, const fs::path& model_path, const fs::path& train_path,
                            const fs::path& opt_path) {
  cfg.validate();
  const std::string original = read_text(model_path);
  Model m = load_model(model_path);
  if (m.family() != "ntnn") throw Error(ErrorCode::invalid_argument, "optimize needs an N-tuple model, got " + m.family());
  const auto g = group_for(cfg, m.group);
  const FeatureRecipe recipe(g, m.recipe);
  const TrainingSet train = featurize(recipe, read_dataset(*g, train_path), cfg.workers);
  const TrainingSet opt = featurize(recipe, read_dataset(*g, opt_path), cfg.workers);
  auto& net = std::get<NtnnModel>(m.body);
  OptimizeResult r;
  const double now = ntnn_accuracy(net, opt, cfg.model.optimize.reserved_counts_wrong);
  if (now >= cfg.model.optimize.theta_omega) {
    r.skipped = true;
    r.run.initial_accuracy = r.run.final_accuracy = now;
    r.run.stop_reason = "goal";
    std::ostringstream msg;
    msg << "nothing to do: accuracy " << number_text(now) << " already meets theta_omega "
        << number_text(cfg.model.optimize.theta_omega);
    r.message = msg.str();
    return r;
  }
  r.run = ntnn_optimize(net, train, opt, cfg.model.optimize);
  json extra = stamp(cfg);
  try {
    const json old = json::parse(original);
    for (const char* k : {"seed", "hyperparameters", "training", "optimizations"})
      if (old.contains(k)) extra[k] = old[k];
  } catch (const json::exception&) {
  }
  if (!extra.contains("optimizations")) extra["optimizations"] = json::array();
  json entry = json::parse(ntnn_run_json(r.run));
  entry["opt"] = rel(cfg, opt_path);
  entry["budget"] = cfg.model.optimize.budget;
  extra["optimizations"].push_back(entry);
  save_model(m, model_path, extra.dump());
  std::ostringstream msg;
  msg << "accuracy " << number_text(r.run.initial_accuracy) << " -> " << number_text(r.run.final_accuracy) << " ("
      << r.run.tested << " tested, " << r.run.accepted << " accepted, " << r.run.stop_reason << ")";
  r.message = msg.str();
  update_manifest(cfg, "optimize", {model_path, write_snapshot(cfg, "optimize")});
  return r;
}

EvalResult cmd_eval(const ExperimentConfig& cfg, const fs::path& model_path, const fs::path& data_path) {
  cfg.validate();
  const Model m = load_model(model_path);
  const auto g = group_for(cfg, m.group);
  const FeatureRecipe recipe(g, m.recipe);
  const Dataset data = read_dataset(*g, data_path);
  EvalResult r;
  r.report = evaluate(m, recipe, data, cfg.workers);
  const std::string split(to_string(data.meta.split));
  const std::string stem = model_path.stem().string() + "-" + std::string(to_string(data.meta.collection)) + "-" + split;
  r.text_path = cfg.out / "reports" / (stem + ".txt");
  r.json_path = cfg.out / "reports" / (stem + ".json");
  const std::string title = m.group + " " + m.family() + " " + m.recipe + " on " + std::string(to_string(data.meta.collection)) +
                            " " + split + " (tool " + std::string(tool_version()) + ", config " + cfg.hash() + ")";
  write_text(r.text_path, report_text(r.report, title));
  json extra = stamp(cfg);
  extra["group"] = m.group;
  extra["family"] = m.family();
  extra["recipe"] = m.recipe;
  extra["model"] = rel(cfg, model_path);
  extra["data"] = rel(cfg, data_path);
  extra["collection"] = std::string(to_string(data.meta.collection));
  extra["split"] = split;
  write_text(r.json_path, report_json(r.report, extra.dump()) + "\n");
  update_manifest(cfg, "eval", {r.text_path, r.json_path, write_snapshot(cfg, "eval")});
  return r;
}

namespace {

std::vector<std::string> axis(const std::optional<std::vector<std::string>>& list, std::string fallback) {
  return list ? *list : std::vector<std::string>{std::move(fallback)};
}

std::vector<ModelConfig> grid_cells(const ExperimentConfig& cfg, const std::string& family, const std::string& recipe) {
  std::vector<ModelConfig> cells;
  ModelConfig base = cfg.model;
  base.family = family;
  base.recipe = recipe;
  if (family == "ntnn") {
    for (const auto& m : axis(cfg.grid.patterns, std::to_string(cfg.model.patterns)))
      for (const auto& p : axis(cfg.grid.widths, std::to_string(cfg.model.width)))
        for (const auto& c : axis(cfg.grid.ntnn_criteria, std::string(to_string(cfg.model.ntnn_criterion)))) {
          ModelConfig mc = base;
          mc.patterns = parse_number<std::size_t>("grid.patterns", m);
          mc.width = parse_number<std::size_t>("grid.widths", p);
          mc.ntnn_criterion = parse_ntnn_criterion(c);
          cells.push_back(mc);
        }
    return cells;
  }
  const auto trees = family == "forest" ? axis(cfg.grid.trees, std::to_string(cfg.model.trees))
                                        : std::vector<std::string>{std::to_string(cfg.model.trees)};
  for (const auto& c : axis(cfg.grid.criteria, std::string(to_string(cfg.model.criterion))))
    for (const auto& d : axis(cfg.grid.depths, cfg.model.depth))
      for (const auto& t : trees) {
        ModelConfig mc = base;
        mc.criterion = parse_split_criterion(c);
        mc.depth = d;
        mc.trees = parse_number<std::size_t>("grid.trees", t);
        cells.push_back(mc);
      }
  return cells;
}

}  // namespace

GridResult cmd_grid(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.grid.any()) throw Error(ErrorCode::config_error, "empty grid: no [grid] lists given");
  GridResult result;
  std::vector<fs::path> written;
  for (const auto& gname : axis(cfg.grid.groups, cfg.data.group)) {
    ExperimentConfig gc = cfg;
    gc.data.group = gname;
    bool have = true;
    for (int s = 0; s < 3; ++s) have = have && fs::exists(dataset_path(gc, static_cast<SplitId>(s)));
    if (!have) {
      const auto gen = cmd_gen(gc);
      written.insert(written.end(), gen.files.begin(), gen.files.end());
    }
    const auto g = make_group(gname);
    std::array<Dataset, 3> sets;
    for (int s = 0; s < 3; ++s) sets[static_cast<std::size_t>(s)] = read_dataset(*g, dataset_path(gc, static_cast<SplitId>(s)));
    const std::size_t first = result.rows.size();
    for (const auto& recipe_name : axis(cfg.grid.recipes, cfg.model.recipe)) {
      std::optional<FeatureRecipe> recipe;
      std::array<TrainingSet, 3> feats;
      std::string recipe_error;
      try {
        recipe.emplace(g, recipe_name);
        for (std::size_t s = 0; s < 3; ++s) feats[s] = featurize(*recipe, sets[s], cfg.workers);
      } catch (const Error& e) {
        recipe_error = e.what();
      }
      for (const auto& family : axis(cfg.grid.families, cfg.model.family)) {
        for (const auto& mc : grid_cells(cfg, family, recipe_name)) {
          GridRow row;
          row.group = g->name();
          row.family = family;
          row.recipe = recipe_name;
          row.settings = model_settings(mc);
          if (!recipe_error.empty()) {
            row.error = recipe_error;
          } else {
            try {
              const auto out = train_on(mc, *recipe, feats[0], &feats[1], cfg.seed, cfg.workers);
              std::vector<int> pred(feats[2].size());
              parallel_for(pred.size(), cfg.workers,
                           [&](std::size_t i) { pred[i] = out.model.predict(feats[2].rows[i]); });
              row.accuracy = accuracy(pred, feats[2].labels);
              row.ok = true;
            } catch (const Error& e) {
              row.error = e.what();
            }
          }
          result.rows.push_back(std::move(row));
        }
      }
    }
    std::optional<std::size_t> best;
    for (std::size_t i = first; i < result.rows.size(); ++i)
      if (result.rows[i].ok && (!best || result.rows[i].accuracy > result.rows[*best].accuracy)) best = i;
    if (best) result.rows[*best].best = true;
  }
  result.text_path = cfg.out / "grid" / "grid.txt";
  result.json_path = cfg.out / "grid" / "grid.json";
  write_text(result.text_path, grid_text(result));
  json rows = json::array();
  for (const auto& r : result.rows) {
    json j = {{"group", r.group}, {"family", r.family}, {"recipe", r.recipe}, {"settings", r.settings},
              {"ok", r.ok}, {"best", r.best}};
    if (r.ok) j["accuracy"] = r.accuracy;
    else j["error"] = r.error;
    rows.push_back(j);
  }
  json j = stamp(cfg);
  j["rows"] = rows;
  write_text(result.json_path, j.dump(2) + "\n");
  written.push_back(result.text_path);
  written.push_back(result.json_path);
  written.push_back(write_snapshot(cfg, "grid"));
  update_manifest(cfg, "grid", written);
  return result;
}

std::string grid_text(const GridResult& g) {
  std::ostringstream o;
  o << std::left << std::setw(10) << "group" << std::setw(8) << "family" << std::setw(8) << "recipe"
    << std::setw(32) << "settings" << "accuracy\n";
  for (const auto& r : g.rows) {
    o << std::left << std::setw(10) << r.group << std::setw(8) << r.family << std::setw(8) << r.recipe
      << std::setw(32) << r.settings;
    if (r.ok) o << std::fixed << std::setprecision(2) << 100 * r.accuracy << "%" << (r.best ? "  best" : "");
    else o << "failed: " << r.error;
    o << "\n";
  }
  return o.str();
}

std::string cmd_inspect(const ExperimentConfig& cfg, const std::optional<fs::path>& data_path,
                        const std::optional<fs::path>& model_path) {
  std::ostringstream o;
  if (model_path) {
    const Model m = load_model(*model_path);
    o << "model " << model_path->string() << "\n";
    o << "family " << m.family() << ", group " << m.group << ", recipe " << m.recipe << "\n";
    if (const auto* t = std::get_if<DecisionTree>(&m.body)) {
      o << "nodes " << t->nodes.size() << ", leaves " << t->leaf_count() << ", depth " << t->depth() << "\n";
    } else if (const auto* f = std::get_if<ForestModel>(&m.body)) {
      std::size_t nodes = 0, depth = 0;
      for (const auto& t : f->trees) {
        nodes += t.nodes.size();
        depth = std::max(depth, t.depth());
      }
      o << "trees " << f->trees.size() << ", features per split " << f->max_features << ", vote "
        << to_string(f->vote) << ", nodes " << nodes << ", max depth " << depth << "\n";
    } else {
      const auto& n = std::get<NtnnModel>(m.body);
      o << "N " << n.dimension << ", M " << n.params.patterns << ", P " << n.params.width << ", "
        << to_string(n.params.criterion) << "\n";
      for (std::size_t c = 0; c < n.classes.size(); ++c) {
        const auto& st = n.classes[c];
        o << "class " << c << " cursor " << st.cursor << ", patterns";
        for (const auto& p : st.active) {
          o << " (";
          for (std::size_t k = 0; k < p.size(); ++k) o << (k ? "," : "") << p[k];
          o << ")";
        }
        o << "\n";
      }
    }
    return o.str();
  }
  const auto g = make_group(cfg.data.group);
  if (data_path) {
    const Dataset d = read_dataset(*g, *data_path);
    o << "dataset " << data_path->string() << "\n";
    o << "group " << d.meta.group << ", collection " << to_string(d.meta.collection) << ", split "
      << to_string(d.meta.split) << ", seed " << d.meta.seed << "\n";
    o << "pairs " << d.pairs.size() << " (conjugate " << d.count(kConjugate) << ", non-conjugate "
      << d.count(kNonconjugate) << ")\n";
    BigInt umin, umax, vmin, vmax;
    for (std::size_t i = 0; i < d.pairs.size(); ++i) {
      const auto& p = d.pairs[i];
      if (i == 0 || p.u.length < umin) umin = p.u.length;
      if (i == 0 || p.u.length > umax) umax = p.u.length;
      if (i == 0 || p.v.length < vmin) vmin = p.v.length;
      if (i == 0 || p.v.length > vmax) vmax = p.v.length;
    }
    if (!d.pairs.empty())
      o << "|u| in [" << umin.get_str() << ", " << umax.get_str() << "], |v| in [" << vmin.get_str() << ", "
        << vmax.get_str() << "]\n";
    const auto violations = audit_dataset(*g, d);
    o << "audit: " << (violations.empty() ? "clean" : std::to_string(violations.size()) + " violations") << "\n";
    for (std::size_t i = 0; i < violations.size() && i < 10; ++i) o << "  " << violations[i] << "\n";
    return o.str();
  }
  o << "group " << g->name() << " (" << to_string(g->engine()) << ")\n";
  o << "generators " << join(g->alphabet().names(), " ") << "\n";
  for (const auto& r : g->presentation().relators) o << "relator " << g->alphabet().format(r) << "\n";
  o << "normal-form slots " << g->slot_count() << ": " << join(g->slot_names(), " ") << "\n";
  o << "abelianization " << g->abelianization().describe() << "\n";
  o << "feature dimensions per pair:";
  for (const char* r : {"c0", "c1", "c2", "c3", "c4", "cm"}) {
    try {
      const std::size_t dim = FeatureRecipe(g, r).dimension();
      o << " " << r << "=" << dim;
    } catch (const Error&) {
    }
  }
  o << "\n";
  return o.str();
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error:
    case ErrorCode::invalid_argument:
    case ErrorCode::parse_error:
    case ErrorCode::invalid_presentation: return 2;
    case ErrorCode::target_unreachable:
    case ErrorCode::filter_exhausted:
    case ErrorCode::pool_exhausted:
    case ErrorCode::collection_overflow:
    case ErrorCode::completion_budget_exceeded:
    case ErrorCode::not_confluent:
    case ErrorCode::zero_length: return 3;
    case ErrorCode::io_error:
    case ErrorCode::format_error: return 4;
    case ErrorCode::refusal: return 5;
    case ErrorCode::empty_data:
    case ErrorCode::pattern_too_large:
    case ErrorCode::restart_budget_exceeded:
    case ErrorCode::series_too_short: return 6;
  }
  return 1;
}

}  // namespace cdp
