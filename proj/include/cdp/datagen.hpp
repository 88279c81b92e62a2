#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdp/group.hpp"
#include "cdp/rng.hpp"

namespace cdp {

inline constexpr int kConjugate = 1;
inline constexpr int kNonconjugate = 0;

struct LabeledPair {
  NormalForm u;
  NormalForm v;
  int label = kNonconjugate;
  /// Conjugator of a conjugate pair (v = t^-1 u t); kept for auditing.
  std::optional<NormalForm> t;
};

enum class CollectionId { D0, D1, D2, D3 };
enum class SplitId { Si, So, Sv };

std::string_view to_string(CollectionId c);
std::string_view to_string(SplitId s);
CollectionId parse_collection(std::string_view s);
SplitId parse_split(std::string_view s);

struct DatasetMeta {
  std::string group;
  CollectionId collection = CollectionId::D0;
  SplitId split = SplitId::Si;
  std::uint64_t seed = 0;
  std::size_t pairs_per_class = 0;
  std::int64_t min_length = 0;
  std::int64_t max_length = 0;
  /// D3 only: the range non-conjugate |v| was drawn from.
  std::int64_t v_min = 0;
  std::int64_t v_max = 0;
  /// D3 only: observed conjugate word-length extremes of the matching D2 split.
  std::string conjugate_min;
  std::string conjugate_max;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<LabeledPair> pairs;

  std::size_t count(int label) const;
};

struct GenLimits {
  std::size_t max_restarts = 1000;
  /// Letters tried per attempt before restarting: factor * n + 64.
  std::size_t steps_per_length = 64;
  std::size_t filter_retries = 10000;
  std::size_t pool_retry_factor = 50;
};

/// Random walk from the identity until the normal form has letter length
/// exactly n; a walk that overshoots restarts. TARGET_UNREACHABLE after
/// `max_restarts` restarts.
NormalForm random_word(const Group& g, std::int64_t n, Rng& rng, const GenLimits& limits = {});

/// Distinct, nonzero abelianization images.
bool passes_abelian_filter(const Group& g, const NormalForm& u, const NormalForm& v);

LabeledPair nonconjugate_pair(const Group& g, std::int64_t len_u, std::int64_t len_v, Rng& rng,
                              const GenLimits& limits = {});
LabeledPair conjugate_pair(const Group& g, std::int64_t len_u, std::int64_t len_t, Rng& rng,
                           const GenLimits& limits = {});
LabeledPair conjugate_pair(const Group& g, const NormalForm& u, const NormalForm& t);

/// Unique normal forms with lengths uniform over [min_len, max_len].
std::vector<NormalForm> build_pool(const Group& g, std::size_t size, std::int64_t min_len, std::int64_t max_len,
                                   std::uint64_t seed, const GenLimits& limits = {}, unsigned workers = 1);

struct CollectionConfig {
  CollectionId collection = CollectionId::D0;
  std::size_t pairs_per_class = 2000;
  std::int64_t min_length = 5;
  std::int64_t max_length = 104;
  std::uint64_t seed = 0;
  /// 0 selects 4 * pairs_per_class.
  std::size_t pool_size = 0;
  /// Upper bound on D3 non-conjugate |v|; 0 selects 2 * max_length.
  std::int64_t d3_length_cap = 0;
  GenLimits limits;
  unsigned workers = 1;
};

/// S_i, S_o, S_v of one collection, in that order.
std::array<Dataset, 3> build_collection(const Group& g, const CollectionConfig& config);

/// Per-collection length rules and label soundness; returns one message per violation.
std::vector<std::string> audit_dataset(const Group& g, const Dataset& d);

/// JSON Lines pairs plus a sidecar `<stem>.meta.json`.
void write_dataset(const Group& g, const Dataset& d, const std::filesystem::path& jsonl,
                   const std::string& extra_meta_json = "{}");
Dataset read_dataset(const Group& g, const std::filesystem::path& jsonl);
std::filesystem::path meta_path(const std::filesystem::path& jsonl);

/// Key identifying a pair by the normal forms of both words.
std::string pair_key(const Group& g, const LabeledPair& p);

}  // namespace cdp
