#include <algorithm>
#include <cassert>
#include <cmath>

#include "cdp/error.hpp"
#include "cdp/learn.hpp"

namespace cdp {

namespace {

// Row-major code matrix.
struct CodedRows {
  std::size_t width = 0;
  std::vector<std::uint32_t> codes;
  std::vector<int> labels;

  const std::uint32_t* row(std::size_t i) const { return codes.data() + i * width; }
  std::size_t size() const { return labels.size(); }
};

CodedRows encode_rows(const NtnnModel& m, const TrainingSet& data) {
  CodedRows out;
  out.width = m.dimension;
  out.labels = data.labels;
  out.codes.reserve(data.size() * m.dimension);
  for (const auto& r : data.rows) {
    if (r.size() != m.dimension) throw Error(ErrorCode::invalid_argument, "feature dimension differs from the model");
    const auto c = m.encode(r);
    out.codes.insert(out.codes.end(), c.begin(), c.end());
  }
  return out;
}

// False when the projection touches an unseen value.
bool project(const std::uint32_t* row, const Pattern& p, TupleKey& key) {
  key.width = static_cast<std::uint8_t>(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    key.codes[j] = row[static_cast<std::size_t>(p[j])];
    if (key.codes[j] == NtnnModel::kUnseen) return false;
  }
  return true;
}

NtnnTable build_table(const CodedRows& train, const Pattern& p, int cls) {
  NtnnTable t;
  TupleKey key;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train.labels[i] == cls && project(train.row(i), p, key)) ++t[key];
  return t;
}

std::int64_t lookup(const NtnnTable& t, const std::uint32_t* row, const Pattern& p, NtnnCriterion c) {
  TupleKey key;
  if (!project(row, p, key)) return 0;
  const auto it = t.find(key);
  return it == t.end() ? 0 : table_score(it->second, c);
}

int strict_winner(const std::int64_t* s, std::size_t classes) {
  int best = 0;
  bool tie = false;
  for (std::size_t c = 1; c < classes; ++c) {
    if (s[c] > s[best]) {
      best = static_cast<int>(c);
      tie = false;
    } else if (s[c] == s[best]) {
      tie = true;
    }
  }
  return tie ? kReserved : best;
}

double score_accuracy(std::size_t correct, std::size_t reserved, std::size_t total, bool reserved_wrong) {
  const std::size_t denom = reserved_wrong ? total : total - reserved;
  return denom == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(denom);
}

void check_params(const TrainingSet& data, const NtnnParams& params) {
  if (data.rows.empty()) throw Error(ErrorCode::empty_data, "no training samples");
  if (params.width == 0 || params.width > data.dimension() || params.width > TupleKey::kMaxWidth)
    throw Error(ErrorCode::pattern_too_large, "pattern width " + std::to_string(params.width) +
                                                  " exceeds feature dimension " + std::to_string(data.dimension()) +
                                                  " or the supported maximum " + std::to_string(TupleKey::kMaxWidth));
  if (params.patterns == 0) throw Error(ErrorCode::config_error, "pattern count must be positive");
}

NtnnModel empty_model(const TrainingSet& data, const NtnnParams& params) {
  NtnnModel m;
  m.dimension = data.dimension();
  m.params = params;
  m.columns.resize(m.dimension);
  for (std::size_t j = 0; j < m.dimension; ++j) {
    auto& col = m.columns[j];
    col.reserve(data.size());
    for (const auto& r : data.rows) col.push_back(r[j]);
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
  }
  m.classes.resize(static_cast<std::size_t>(data.classes()));
  return m;
}

void fill_tables(NtnnModel& m, const TrainingSet& data) {
  const CodedRows coded = encode_rows(m, data);
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    auto& st = m.classes[c];
    st.tables.clear();
    for (const auto& p : st.active) st.tables.push_back(build_table(coded, p, static_cast<int>(c)));
  }
}

}  // namespace

std::size_t TupleKeyHash::operator()(const TupleKey& k) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < k.width; ++i) {
    h ^= k.codes[i];
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

std::string_view to_string(NtnnCriterion c) { return c == NtnnCriterion::voting ? "voting" : "log-voting"; }

NtnnCriterion parse_ntnn_criterion(std::string_view s) {
  if (s == "voting") return NtnnCriterion::voting;
  if (s == "log-voting") return NtnnCriterion::log_voting;
  throw Error(ErrorCode::config_error, "unknown NTNN criterion '" + std::string(s) + "'");
}

std::vector<Pattern> all_patterns(std::size_t n, std::size_t p) {
  std::vector<Pattern> out;
  if (p == 0 || p > n) return out;
  Pattern cur(p);
  for (std::size_t i = 0; i < p; ++i) cur[i] = static_cast<int>(i);
  for (;;) {
    out.push_back(cur);
    std::size_t i = p;
    while (i > 0 && cur[i - 1] == static_cast<int>(n - p + i - 1)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < p; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

std::int64_t table_score(std::uint32_t count, NtnnCriterion criterion) {
  if (count == 0) return 0;
  if (criterion == NtnnCriterion::voting) return count;
  return std::llround(std::log(static_cast<double>(count)) * 4294967296.0);
}

std::vector<std::uint32_t> NtnnModel::encode(const FeatureVector& x) const {
  std::vector<std::uint32_t> out(dimension, kUnseen);
  for (std::size_t j = 0; j < dimension; ++j) {
    const auto& col = columns[j];
    const auto it = std::lower_bound(col.begin(), col.end(), x[j]);
    if (it != col.end() && *it == x[j]) out[j] = static_cast<std::uint32_t>(it - col.begin());
  }
  return out;
}

std::vector<std::int64_t> NtnnModel::scores(const FeatureVector& x) const {
  if (x.size() != dimension) throw Error(ErrorCode::invalid_argument, "feature dimension differs from the model");
  const auto codes = encode(x);
  std::vector<std::int64_t> out(classes.size(), 0);
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (std::size_t k = 0; k < classes[c].active.size(); ++k)
      out[c] += lookup(classes[c].tables[k], codes.data(), classes[c].active[k], params.criterion);
  return out;
}

int NtnnModel::predict(const FeatureVector& x) const {
  const auto s = scores(x);
  return strict_winner(s.data(), s.size());
}

std::map<std::vector<double>, std::uint32_t> NtnnModel::table_entries(int cls, std::size_t k) const {
  const auto& st = classes.at(static_cast<std::size_t>(cls));
  const Pattern& p = st.active.at(k);
  std::map<std::vector<double>, std::uint32_t> out;
  for (const auto& [key, count] : st.tables.at(k)) {
    std::vector<double> values;
    for (std::size_t j = 0; j < p.size(); ++j) values.push_back(columns[static_cast<std::size_t>(p[j])][key.codes[j]]);
    out[values] = count;
  }
  return out;
}

std::vector<Pattern> NtnnModel::pattern_list(int cls) const {
  auto list = all_patterns(dimension, params.width);
  Rng rng(classes.at(static_cast<std::size_t>(cls)).permutation_seed);
  rng.shuffle(list.begin(), list.end());
  return list;
}

NtnnModel ntnn_train(const TrainingSet& data, const NtnnParams& params, std::uint64_t seed) {
  check_params(data, params);
  NtnnModel m = empty_model(data, params);
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    auto& st = m.classes[c];
    st.permutation_seed = derive_seed(seed, "class", c);
    const auto list = m.pattern_list(static_cast<int>(c));
    const std::size_t count = std::min(params.patterns, list.size());
    st.active.assign(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(count));
    st.cursor = count;
  }
  fill_tables(m, data);
  return m;
}

NtnnModel ntnn_train_with_patterns(const TrainingSet& data, const NtnnParams& params,
                                   const std::vector<std::vector<Pattern>>& per_class) {
  check_params(data, params);
  NtnnModel m = empty_model(data, params);
  if (per_class.size() > m.classes.size()) m.classes.resize(per_class.size());
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    for (const auto& p : per_class[c]) {
      if (p.size() != params.width) throw Error(ErrorCode::invalid_argument, "pattern width differs from P");
      for (std::size_t j = 0; j < p.size(); ++j)
        if (p[j] < 0 || static_cast<std::size_t>(p[j]) >= m.dimension || (j > 0 && p[j] <= p[j - 1]))
          throw Error(ErrorCode::invalid_argument, "patterns must be increasing positions below the dimension");
    }
    m.classes[c].active = per_class[c];
  }
  fill_tables(m, data);
  return m;
}

double ntnn_accuracy(const NtnnModel& model, const TrainingSet& data, bool reserved_counts_wrong) {
  if (data.rows.empty()) throw Error(ErrorCode::empty_data, "no samples to score");
  std::size_t correct = 0, reserved = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int p = model.predict(data.rows[i]);
    if (p == kReserved) ++reserved;
    if (p == data.labels[i]) ++correct;
  }
  return score_accuracy(correct, reserved, data.size(), reserved_counts_wrong);
}

NtnnRun ntnn_optimize(NtnnModel& model, const TrainingSet& train, const TrainingSet& opt,
                      const NtnnOptimizeParams& params) {
  if (opt.rows.empty()) throw Error(ErrorCode::empty_data, "empty optimization set");
  const std::size_t classes = model.classes.size();
  const std::size_t n = opt.size();
  const CodedRows coded_train = encode_rows(model, train);
  const CodedRows coded_opt = encode_rows(model, opt);
  const NtnnCriterion crit = model.params.criterion;

  // contrib[c][k][i]: score of opt row i from class c's k-th active table.
  std::vector<std::vector<std::vector<std::int64_t>>> contrib(classes);
  std::vector<std::int64_t> totals(n * classes, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto& st = model.classes[c];
    for (std::size_t k = 0; k < st.active.size(); ++k) {
      std::vector<std::int64_t> s(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = lookup(st.tables[k], coded_opt.row(i), st.active[k], crit);
        totals[i * classes + c] += s[i];
      }
      contrib[c].push_back(std::move(s));
    }
  }

  std::vector<std::int64_t> row_scores(classes);
  // Accuracy with class c's column replaced by base + delta.
  auto evaluate = [&](std::size_t c, const std::vector<std::int64_t>* minus, const std::vector<std::int64_t>* plus) {
    std::size_t correct = 0, reserved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(totals.begin() + static_cast<std::ptrdiff_t>(i * classes), classes, row_scores.begin());
      if (minus) row_scores[c] += (*plus)[i] - (*minus)[i];
      const int p = strict_winner(row_scores.data(), classes);
      if (p == kReserved) ++reserved;
      if (p == opt.labels[i]) ++correct;
    }
    return score_accuracy(correct, reserved, n, params.reserved_counts_wrong);
  };

  NtnnRun run;
  double best = evaluate(0, nullptr, nullptr);
  run.initial_accuracy = best;
  std::vector<std::vector<Pattern>> lists(classes);
  std::size_t remaining = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    lists[c] = model.pattern_list(static_cast<int>(c));
    remaining += lists[c].size() - std::min(lists[c].size(), model.classes[c].cursor);
  }
  const std::size_t budget = params.budget ? params.budget : remaining;

  run.stop_reason = "exhausted";
  while (true) {
    if (best >= params.theta_omega) {
      run.stop_reason = "goal";
      break;
    }
    if (run.tested >= budget) {
      run.stop_reason = "budget";
      break;
    }
    std::size_t c = static_cast<std::size_t>(model.next_class) % classes;
    std::size_t probe = 0;
    while (probe < classes && model.classes[c].cursor >= lists[c].size()) {
      c = (c + 1) % classes;
      ++probe;
    }
    if (probe == classes) break;
    model.next_class = static_cast<int>((c + 1) % classes);
    auto& st = model.classes[c];
    const Pattern candidate = lists[c][st.cursor++];
    ++run.tested;
    if (std::find(st.active.begin(), st.active.end(), candidate) != st.active.end()) continue;

    NtnnTable table = build_table(coded_train, candidate, static_cast<int>(c));
    std::vector<std::int64_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = lookup(table, coded_opt.row(i), candidate, crit);

    double round_best = -1;
    std::size_t round_k = 0;
    for (std::size_t k = 0; k < st.active.size(); ++k) {
      const double a = evaluate(c, &contrib[c][k], &s);
      if (a > round_best) {
        round_best = a;
        round_k = k;
      }
    }
    if (round_best > best) {
      for (std::size_t i = 0; i < n; ++i) totals[i * classes + c] += s[i] - contrib[c][round_k][i];
      contrib[c][round_k] = std::move(s);
      st.active[round_k] = candidate;
      st.tables[round_k] = std::move(table);
      best = round_best;
      ++run.accepted;
      run.history.push_back(best);
      assert(run.history.size() < 2 || run.history.back() >= run.history[run.history.size() - 2]);
    }
  }
  run.final_accuracy = best;
  return run;
}

std::pair<NtnnModel, NtnnRun> ntnn_fit(const TrainingSet& train, const TrainingSet& opt, const NtnnParams& params,
                                       const NtnnOptimizeParams& opt_params, std::uint64_t seed) {
  double best_seen = 0;
  for (std::size_t r = 0; r < opt_params.restarts; ++r) {
    NtnnModel m = ntnn_train(train, params, derive_seed(seed, "restart", r));
    const double a = ntnn_accuracy(m, opt, opt_params.reserved_counts_wrong);
    best_seen = std::max(best_seen, a);
    if (a <= opt_params.theta_alpha) continue;
    NtnnRun run = ntnn_optimize(m, train, opt, opt_params);
    run.restarts_used = r + 1;
    return {std::move(m), std::move(run)};
  }
  throw Error(ErrorCode::restart_budget_exceeded,
              "no restart exceeded the starting threshold (best " + std::to_string(best_seen) + ")");
}

}  // namespace cdp
