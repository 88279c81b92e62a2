#include <fstream>
#include <sstream>

#include "cdp/error.hpp"
#include "cdp/learn.hpp"
#include "json.hpp"

namespace cdp {

using nlohmann::json;

namespace {

json tree_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.counts}));
  return {{"classes", t.classes}, {"nodes", nodes}};
}

DecisionTree tree_from(const json& j) {
  DecisionTree t;
  t.classes = j.at("classes").get<int>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.counts = n.at(4).get<std::vector<std::size_t>>();
    node.label = static_cast<int>(std::max_element(node.counts.begin(), node.counts.end()) - node.counts.begin());
    t.nodes.push_back(std::move(node));
  }
  const int size = static_cast<int>(t.nodes.size());
  if (size == 0) throw Error(ErrorCode::format_error, "tree without nodes");
  for (const auto& n : t.nodes)
    if (!n.leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size))
      throw Error(ErrorCode::format_error, "tree node child index out of range");
  return t;
}

json ntnn_json(const NtnnModel& m) {
  json classes = json::array();
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    const auto& st = m.classes[c];
    json tables = json::array();
    for (std::size_t k = 0; k < st.active.size(); ++k) {
      json entries = json::array();
      for (const auto& [values, count] : m.table_entries(static_cast<int>(c), k))
        entries.push_back(json::array({values, count}));
      tables.push_back(entries);
    }
    classes.push_back({{"permutation_seed", st.permutation_seed},
                       {"cursor", st.cursor},
                       {"active", st.active},
                       {"tables", tables}});
  }
  return {{"dimension", m.dimension},
          {"patterns", m.params.patterns},
          {"width", m.params.width},
          {"criterion", std::string(to_string(m.params.criterion))},
          {"next_class", m.next_class},
          {"columns", m.columns},
          {"classes", classes}};
}

NtnnModel ntnn_from(const json& j) {
  NtnnModel m;
  m.dimension = j.at("dimension").get<std::size_t>();
  m.params.patterns = j.at("patterns").get<std::size_t>();
  m.params.width = j.at("width").get<std::size_t>();
  m.params.criterion = parse_ntnn_criterion(j.at("criterion").get<std::string>());
  m.next_class = j.value("next_class", 0);
  m.columns = j.at("columns").get<std::vector<std::vector<double>>>();
  if (m.columns.size() != m.dimension) throw Error(ErrorCode::format_error, "column dictionary size mismatch");
  for (const auto& cj : j.at("classes")) {
    NtnnClassState st;
    st.permutation_seed = cj.at("permutation_seed").get<std::uint64_t>();
    st.cursor = cj.at("cursor").get<std::size_t>();
    st.active = cj.at("active").get<std::vector<Pattern>>();
    const auto& tables = cj.at("tables");
    if (tables.size() != st.active.size()) throw Error(ErrorCode::format_error, "table count differs from patterns");
    for (std::size_t k = 0; k < st.active.size(); ++k) {
      const Pattern& p = st.active[k];
      if (p.size() > TupleKey::kMaxWidth) throw Error(ErrorCode::format_error, "pattern too wide");
      for (int pos : p)
        if (pos < 0 || static_cast<std::size_t>(pos) >= m.dimension)
          throw Error(ErrorCode::format_error, "pattern position out of range");
      NtnnTable table;
      for (const auto& e : tables[k]) {
        const auto values = e.at(0).get<std::vector<double>>();
        if (values.size() != p.size()) throw Error(ErrorCode::format_error, "table key width mismatch");
        TupleKey key;
        key.width = static_cast<std::uint8_t>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
          const auto& col = m.columns[static_cast<std::size_t>(p[i])];
          const auto it = std::lower_bound(col.begin(), col.end(), values[i]);
          if (it == col.end() || *it != values[i]) throw Error(ErrorCode::format_error, "table key not in column dictionary");
          key.codes[i] = static_cast<std::uint32_t>(it - col.begin());
        }
        table[key] = e.at(1).get<std::uint32_t>();
      }
      st.tables.push_back(std::move(table));
    }
    m.classes.push_back(std::move(st));
  }
  return m;
}

}  // namespace

std::string Model::family() const {
  static const char* names[] = {"tree", "forest", "ntnn"};
  return names[body.index()];
}

int Model::predict(const FeatureVector& x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, body);
}

std::string model_to_json(const Model& m, const std::string& extra_json) {
  json j = json::parse(extra_json);
  j["format"] = "cdp-model";
  j["version"] = kModelFormatVersion;
  j["family"] = m.family();
  j["group"] = m.group;
  j["recipe"] = m.recipe;
  if (const auto* t = std::get_if<DecisionTree>(&m.body)) {
    j["tree"] = tree_json(*t);
  } else if (const auto* f = std::get_if<ForestModel>(&m.body)) {
    json trees = json::array();
    for (const auto& t : f->trees) trees.push_back(tree_json(t));
    j["forest"] = {{"classes", f->classes},
                   {"vote", std::string(to_string(f->vote))},
                   {"max_features", f->max_features},
                   {"tree_seeds", f->tree_seeds},
                   {"trees", trees}};
  } else {
    j["ntnn"] = ntnn_json(std::get<NtnnModel>(m.body));
  }
  return j.dump();
}

Model model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "cdp-model") throw Error(ErrorCode::format_error, "not a model document");
    const int version = j.at("version").get<int>();
    if (version < 1 || version > kModelFormatVersion)
      throw Error(ErrorCode::format_error, "unsupported model version " + std::to_string(version));
    Model m;
    m.group = j.value("group", "");
    m.recipe = j.value("recipe", "");
    const std::string family = j.at("family").get<std::string>();
    if (family == "tree") {
      m.body = tree_from(j.at("tree"));
    } else if (family == "forest") {
      const auto& fj = j.at("forest");
      ForestModel f;
      f.classes = fj.at("classes").get<int>();
      f.vote = parse_forest_vote(fj.at("vote").get<std::string>());
      f.max_features = fj.at("max_features").get<std::size_t>();
      f.tree_seeds = fj.at("tree_seeds").get<std::vector<std::uint64_t>>();
      for (const auto& tj : fj.at("trees")) f.trees.push_back(tree_from(tj));
      if (f.trees.empty()) throw Error(ErrorCode::format_error, "forest without trees");
      m.body = std::move(f);
    } else if (family == "ntnn") {
      m.body = ntnn_from(j.at("ntnn"));
    } else {
      throw Error(ErrorCode::format_error, "unknown model family '" + family + "'");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("malformed model: ") + e.what());
  }
}

void save_model(const Model& m, const std::filesystem::path& path, const std::string& extra_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << model_to_json(m, extra_json) << '\n';
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream s;
  s << in.rdbuf();
  return model_from_json(s.str());
}

}  // namespace cdp
