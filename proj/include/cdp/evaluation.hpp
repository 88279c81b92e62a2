#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdp/datagen.hpp"
#include "cdp/features.hpp"
#include "cdp/learn.hpp"

namespace cdp {

/// Accuracy of one length bucket.
struct LengthPoint {
  std::int64_t length = 0;
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

using LengthSeries = std::vector<LengthPoint>;

struct LengthThreshold {
  std::int64_t length = 0;
  /// Pooled accuracy of points with length < L and >= L.
  double below = 0;
  double above = 0;
  double gap = 0;
  /// Lengths proposed by the second-difference filter.
  std::vector<std::int64_t> candidates;
  /// Several candidates share the largest gap; the smallest L is reported.
  bool tie = false;
  /// Every second difference is zero.
  bool degenerate = false;
};

/// Candidates are lengths where the second difference changes sign (both
/// neighbours) or has maximal magnitude; L maximizes |below - above|.
/// SERIES_TOO_SHORT below three points.
LengthThreshold length_threshold(const LengthSeries& series);

/// Pooled accuracy of the points with length in [lo, hi).
double pooled_accuracy(const LengthSeries& series, std::int64_t lo, std::int64_t hi);

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t reserved = 0;
  /// confusion[actual][predicted], predicted column 2 = reserved.
  std::vector<std::array<std::size_t, 3>> confusion;
  /// Indexed by class.
  std::vector<LengthSeries> per_length;
  std::vector<std::optional<LengthThreshold>> thresholds;

  double accuracy() const;
  double class_accuracy(int cls) const;
  std::size_t class_size(int cls) const;
};

/// Reserved predictions count as wrong. EMPTY_DATA on no samples.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

/// Two-class report; `lengths` keys the per-length series (|u|).
EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    const std::vector<std::int64_t>& lengths);

std::vector<int> predict_all(const Model& model, const std::vector<FeatureVector>& rows);

/// Featurizes the dataset with `recipe`, predicts, and reports.
EvalReport evaluate(const Model& model, const FeatureRecipe& recipe, const Dataset& data, unsigned workers = 1);

std::string class_name(int cls);

/// Plain-text tables: summary, confusion matrix, per-class accuracy,
/// per-length series and thresholds.
std::string report_text(const EvalReport& r, const std::string& title);
std::string report_json(const EvalReport& r, const std::string& extra_json = "{}");

}  // namespace cdp
