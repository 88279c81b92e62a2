#include "cdp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "cdp/error.hpp"
#include "cdp/parallel.hpp"
#include "json.hpp"

namespace cdp {

using nlohmann::json;

namespace {

int sign(double x) { return (x > 0) - (x < 0); }

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

}  // namespace

double pooled_accuracy(const LengthSeries& series, std::int64_t lo, std::int64_t hi) {
  std::size_t correct = 0, total = 0;
  for (const auto& p : series)
    if (p.length >= lo && p.length < hi) {
      correct += p.correct;
      total += p.total;
    }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

LengthThreshold length_threshold(const LengthSeries& series) {
  const std::size_t n = series.size();
  if (n < 3) throw Error(ErrorCode::series_too_short, "length threshold needs at least 3 points, got " + std::to_string(n));
  for (std::size_t i = 1; i < n; ++i)
    if (series[i].length <= series[i - 1].length)
      throw Error(ErrorCode::invalid_argument, "series lengths must be strictly increasing");

  std::vector<double> d2(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i)
    d2[i] = series[i + 1].accuracy() - 2 * series[i].accuracy() + series[i - 1].accuracy();

  const std::int64_t lo = series.front().length;
  const std::int64_t end = series.back().length + 1;
  LengthThreshold t;
  double peak = 0;
  for (double v : d2) peak = std::max(peak, std::fabs(v));
  if (peak == 0) {
    t.length = lo;
    t.below = t.above = pooled_accuracy(series, lo, end);
    t.degenerate = true;
    return t;
  }

  std::set<std::size_t> picks;
  std::size_t last = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d2[i] == 0) continue;
    if (last && sign(d2[last]) != sign(d2[i])) {
      picks.insert(last);
      picks.insert(i);
    }
    last = i;
    if (std::fabs(d2[i]) == peak) picks.insert(i);
  }
  // L needs at least one point below it.
  picks.erase(0);
  for (std::size_t i : picks) t.candidates.push_back(series[i].length);

  t.gap = -1;
  for (std::int64_t L : t.candidates) {
    const double below = pooled_accuracy(series, lo, L);
    const double above = pooled_accuracy(series, L, end);
    const double gap = std::fabs(below - above);
    if (gap > t.gap) {
      t.length = L;
      t.below = below;
      t.above = above;
      t.gap = gap;
      t.tie = false;
    } else if (gap == t.gap) {
      t.tie = true;
    }
  }
  return t;
}

double EvalReport::accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }

std::size_t EvalReport::class_size(int cls) const {
  const auto& row = confusion.at(static_cast<std::size_t>(cls));
  return row[0] + row[1] + row[2];
}

double EvalReport::class_accuracy(int cls) const {
  const std::size_t n = class_size(cls);
  return n ? static_cast<double>(confusion[static_cast<std::size_t>(cls)][static_cast<std::size_t>(cls)]) /
                 static_cast<double>(n)
           : 0.0;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (labels.empty()) throw Error(ErrorCode::empty_data, "no samples to score");
  if (predictions.size() != labels.size()) throw Error(ErrorCode::invalid_argument, "prediction count mismatch");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) ok += predictions[i] == labels[i];
  return static_cast<double>(ok) / static_cast<double>(labels.size());
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    const std::vector<std::int64_t>& lengths) {
  if (labels.empty()) throw Error(ErrorCode::empty_data, "no samples to score");
  if (predictions.size() != labels.size() || lengths.size() != labels.size())
    throw Error(ErrorCode::invalid_argument, "prediction, label and length counts differ");
  EvalReport r;
  r.confusion.assign(2, {0, 0, 0});
  std::vector<std::map<std::int64_t, LengthPoint>> buckets(2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i], p = predictions[i];
    if (y < 0 || y > 1) throw Error(ErrorCode::invalid_argument, "labels must be 0 or 1");
    const std::size_t col = p == kReserved ? 2 : static_cast<std::size_t>(p);
    ++r.confusion[static_cast<std::size_t>(y)][col];
    ++r.total;
    r.correct += p == y;
    r.reserved += p == kReserved;
    auto& b = buckets[static_cast<std::size_t>(y)][lengths[i]];
    b.length = lengths[i];
    ++b.total;
    b.correct += p == y;
  }
  for (const auto& b : buckets) {
    LengthSeries s;
    for (const auto& [len, point] : b) s.push_back(point);
    r.thresholds.push_back(s.size() >= 3 ? std::optional(length_threshold(s)) : std::nullopt);
    r.per_length.push_back(std::move(s));
  }
  return r;
}

std::vector<int> predict_all(const Model& model, const std::vector<FeatureVector>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& x : rows) out.push_back(model.predict(x));
  return out;
}

EvalReport evaluate(const Model& model, const FeatureRecipe& recipe, const Dataset& data, unsigned workers) {
  if (!model.group.empty() && model.group != recipe.group().name())
    throw Error(ErrorCode::refusal, "model was trained for group " + model.group + ", not " + recipe.group().name());
  if (!model.recipe.empty() && model.recipe != recipe.name())
    throw Error(ErrorCode::refusal, "model was trained on features " + model.recipe + ", not " + recipe.name());
  if (!data.meta.group.empty() && data.meta.group != recipe.group().name())
    throw Error(ErrorCode::refusal, "dataset belongs to group " + data.meta.group + ", not " + recipe.group().name());
  std::vector<int> predictions(data.pairs.size()), labels(data.pairs.size());
  std::vector<std::int64_t> lengths(data.pairs.size());
  parallel_for(data.pairs.size(), workers, [&](std::size_t i) {
    const auto& p = data.pairs[i];
    predictions[i] = model.predict(recipe.pair_features(p.u, p.v));
    labels[i] = p.label;
    lengths[i] = to_int64(p.u.length);
  });
  return evaluate(predictions, labels, lengths);
}

std::string class_name(int cls) { return cls == kConjugate ? "conjugate" : cls == kNonconjugate ? "non-conjugate" : "reserved"; }

std::string report_text(const EvalReport& r, const std::string& title) {
  std::ostringstream o;
  o << title << "\n";
  o << "samples " << r.total << ", accuracy " << fixed(100 * r.accuracy(), 2) << "%, reserved " << r.reserved << "\n\n";
  o << "confusion (rows actual, columns predicted)\n";
  o << std::left << std::setw(16) << "" << std::right << std::setw(15) << "non-conjugate" << std::setw(12) << "conjugate"
    << std::setw(10) << "reserved" << std::setw(12) << "accuracy" << "\n";
  for (int c = 0; c < 2; ++c) {
    const auto& row = r.confusion[static_cast<std::size_t>(c)];
    o << std::left << std::setw(16) << class_name(c) << std::right << std::setw(15) << row[0] << std::setw(12) << row[1]
      << std::setw(10) << row[2] << std::setw(11) << fixed(100 * r.class_accuracy(c), 2) << "%\n";
  }
  for (int c = 0; c < 2; ++c) {
    o << "\nper-length accuracy, " << class_name(c) << " (|u|: accuracy n)\n";
    for (const auto& p : r.per_length[static_cast<std::size_t>(c)])
      o << "  " << std::setw(6) << p.length << ": " << fixed(p.accuracy()) << " " << p.total << "\n";
    const auto& t = r.thresholds[static_cast<std::size_t>(c)];
    if (!t) {
      o << "  threshold: series too short\n";
    } else {
      o << "  threshold L = " << t->length << ", below " << fixed(t->below) << ", above " << fixed(t->above);
      if (t->degenerate) o << " (degenerate)";
      if (t->tie) o << " (tie)";
      o << "\n";
    }
  }
  return o.str();
}

std::string report_json(const EvalReport& r, const std::string& extra_json) {
  json j = json::parse(extra_json);
  j["samples"] = r.total;
  j["correct"] = r.correct;
  j["reserved"] = r.reserved;
  j["accuracy"] = r.accuracy();
  json classes = json::array();
  for (int c = 0; c < 2; ++c) {
    const auto& row = r.confusion[static_cast<std::size_t>(c)];
    json series = json::array();
    for (const auto& p : r.per_length[static_cast<std::size_t>(c)])
      series.push_back({{"length", p.length}, {"correct", p.correct}, {"total", p.total}, {"accuracy", p.accuracy()}});
    json cj = {{"class", class_name(c)},
               {"label", c},
               {"size", r.class_size(c)},
               {"accuracy", r.class_accuracy(c)},
               {"predicted", {{"non-conjugate", row[0]}, {"conjugate", row[1]}, {"reserved", row[2]}}},
               {"per_length", series}};
    if (const auto& t = r.thresholds[static_cast<std::size_t>(c)])
      cj["threshold"] = {{"length", t->length}, {"below", t->below},           {"above", t->above},
                         {"gap", t->gap},       {"candidates", t->candidates}, {"tie", t->tie},
                         {"degenerate", t->degenerate}};
    else
      cj["threshold"] = nullptr;
    classes.push_back(cj);
  }
  j["classes"] = classes;
  return j.dump(2);
}

}  // namespace cdp
