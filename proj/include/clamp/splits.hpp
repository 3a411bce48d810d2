#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clamp/sql.hpp"

namespace clamp::splits {

struct DatasetExample {
  std::string id;
  std::string dialogue_id;  // empty outside dialogue datasets
  std::size_t turn_index = 0;
  std::string utterance;
  std::string last_user_utt;
  std::string last_agent_utt;
  std::vector<std::string> prior_interactions;
  std::optional<sql::DbSchema> schema;
  std::string gold;
  std::string split = "train";  // portion of the source dataset: train, dev or test
};

// Unique ids; unique, consecutive turn indices within each dialogue; a
// dialogue never straddles source portions. Throws kData.
void validate_dataset(std::span<const DatasetExample> dataset);

struct SplitOptions {
  bool has_public_test = true;
  std::uint64_t seed = 0;
  // Draw the three low-resource train sets without overlap when the pool
  // holds at least three of them.
  bool disjoint_low = true;
};

inline constexpr std::size_t kLowTrainSize = 500;
inline constexpr std::size_t kLowDevSize = 50;
inline constexpr std::size_t kMediumTrainSize = 5000;
inline constexpr std::size_t kMediumDevSize = 500;
inline constexpr std::size_t kTestSize = 2000;
inline constexpr std::size_t kSmallTestSize = 100;
inline constexpr double kCarvedDevFraction = 0.10;

struct SplitSpec {
  std::uint64_t seed = 0;
  bool has_public_test = true;
  bool disjoint_low = true;
  std::array<std::vector<std::string>, 3> low_train;
  std::vector<std::string> low_dev;
  std::optional<std::vector<std::string>> medium_train;  // absent below 5000 train examples
  std::vector<std::string> medium_dev;                   // also the high-resource dev set
  std::vector<std::string> high_train;
  std::vector<std::string> test;        // up to 2000
  std::vector<std::string> test_small;  // 100, drawn from `test`
};

/// Splits are sampled by whole dialogues (a non-dialogue example is its own
/// unit). Units are added in seeded random order until the target is met;
/// the last unit is dropped again when that lands closer to the target.
/// Without a public test set the source dev portion becomes the test pool
/// and 10% of train is carved out as the dev pool.
SplitSpec make_splits(std::span<const DatasetExample> dataset, const SplitOptions& options);

// Stable JSON rendering (ids, sizes, seed).
std::string manifest_json(const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Metrics

enum class Metric { kExact, kLispress };

// "exact" / "lispress". Denotation and test-suite execution names throw
// kNotSupported; anything else kInvalidArgument.
Metric parse_metric(std::string_view name);

struct Prediction {
  std::string id;
  std::string text;
};

struct MetricReport {
  double accuracy = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t missing = 0;
  std::size_t parse_failures = 0;  // lispress only
  std::vector<std::pair<std::string, bool>> per_example;  // gold order
};

// Missing predictions count as incorrect. Throws kData for duplicate
// prediction ids or ids absent from the gold set.
MetricReport evaluate(std::span<const Prediction> predictions, std::span<const DatasetExample> gold,
                      Metric metric);

std::string report_json(const MetricReport& report);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

Aggregate aggregate_low(std::span<const MetricReport, 3> reports);
Aggregate aggregate_low(std::span<const double, 3> accuracies);

}  // namespace clamp::splits
