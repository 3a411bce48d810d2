#include "clamp/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "clamp/error.hpp"
#include "clamp/random.hpp"
#include "clamp/sexp.hpp"

namespace clamp::splits {

void validate_dataset(std::span<const DatasetExample> dataset) {
  std::set<std::string_view> ids;
  std::map<std::string_view, std::vector<const DatasetExample*>> dialogues;
  for (const auto& ex : dataset) {
    if (ex.id.empty()) throw Error(ErrorCode::kData, "example with an empty id");
    if (!ids.insert(ex.id).second) throw Error(ErrorCode::kData, "duplicate example id '" + ex.id + "'");
    if (ex.split != "train" && ex.split != "dev" && ex.split != "test")
      throw Error(ErrorCode::kData, "example '" + ex.id + "' has unknown split '" + ex.split + "'");
    if (!ex.dialogue_id.empty()) dialogues[ex.dialogue_id].push_back(&ex);
  }
  for (auto& [dialogue, turns] : dialogues) {
    std::sort(turns.begin(), turns.end(),
              [](const auto* a, const auto* b) { return a->turn_index < b->turn_index; });
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i]->split != turns.front()->split)
        throw Error(ErrorCode::kData, "dialogue '" + std::string(dialogue) + "' spans several source splits");
      if (i > 0 && turns[i]->turn_index != turns[i - 1]->turn_index + 1)
        throw Error(ErrorCode::kData, "dialogue '" + std::string(dialogue) +
                                          "' has duplicate or non-consecutive turn indices");
    }
  }
}

namespace {

// A dialogue, or a single example outside dialogue datasets.
struct Unit {
  std::vector<std::size_t> members;  // dataset indices
};

using Pool = std::vector<const Unit*>;

std::size_t pool_size(const Pool& pool) {
  std::size_t n = 0;
  for (const Unit* u : pool) n += u->members.size();
  return n;
}

struct Draw {
  Pool chosen;
  Pool rest;
};

Draw sample(const Pool& pool, std::size_t target, std::uint64_t seed) {
  Pool order = pool;
  SplitMix64 rng(seed);
  fisher_yates(std::span<const Unit*>(order), rng);
  Draw d;
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i < order.size() && count < target; ++i) {
    d.chosen.push_back(order[i]);
    count += order[i]->members.size();
  }
  if (count > target && d.chosen.size() > 1) {
    const std::size_t last = d.chosen.back()->members.size();
    if (target - (count - last) < count - target) {
      d.chosen.pop_back();
      --i;
    }
  }
  d.rest.assign(order.begin() + static_cast<std::ptrdiff_t>(i), order.end());
  return d;
}

std::vector<std::string> ids_of(const Pool& pool, std::span<const DatasetExample> dataset) {
  std::vector<std::size_t> idx;
  for (const Unit* u : pool) idx.insert(idx.end(), u->members.begin(), u->members.end());
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(dataset[i].id);
  return out;
}

enum Stream : std::uint64_t {
  kCarveDev = 1,
  kLow0 = 2,
  kLowDev = 5,
  kMedium = 6,
  kMediumDev = 7,
  kTest = 8,
  kSmallTest = 9,
};

}  // namespace

SplitSpec make_splits(std::span<const DatasetExample> dataset, const SplitOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::kData, "empty dataset");
  validate_dataset(dataset);

  std::vector<Unit> units;
  std::unordered_map<std::string, std::size_t> dialogue_unit;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    if (ex.dialogue_id.empty()) {
      units.push_back({{i}});
      continue;
    }
    auto [it, fresh] = dialogue_unit.emplace(ex.dialogue_id, units.size());
    if (fresh) units.emplace_back();
    units[it->second].members.push_back(i);
  }

  Pool train, dev, test;
  for (const Unit& u : units) {
    const std::string& split = dataset[u.members.front()].split;
    if (split == "train") train.push_back(&u);
    else if (split == "dev") dev.push_back(&u);
    else test.push_back(&u);
  }
  const std::uint64_t seed = options.seed;
  if (!options.has_public_test) {
    test = dev;
    const auto target = static_cast<std::size_t>(
        std::llround(kCarvedDevFraction * static_cast<double>(pool_size(train))));
    Draw carve = sample(train, target, derive_seed(seed, kCarveDev));
    dev = carve.chosen;
    train = carve.rest;
  }
  const std::size_t train_n = pool_size(train);
  if (train_n < kLowTrainSize)
    throw Error(ErrorCode::kData, "train portion has " + std::to_string(train_n) +
                                      " examples; a low-resource split needs " + std::to_string(kLowTrainSize));
  if (dev.empty()) throw Error(ErrorCode::kData, "no development examples to sample from");
  if (test.empty()) throw Error(ErrorCode::kData, "no test examples to sample from");

  SplitSpec spec;
  spec.seed = seed;
  spec.has_public_test = options.has_public_test;
  spec.disjoint_low = options.disjoint_low && train_n >= 3 * kLowTrainSize;

  Pool low_pool = train;
  for (std::size_t k = 0; k < 3; ++k) {
    Draw d = sample(low_pool, kLowTrainSize, derive_seed(seed, kLow0 + k));
    spec.low_train[k] = ids_of(d.chosen, dataset);
    if (spec.disjoint_low) low_pool = d.rest;
  }
  spec.low_dev = ids_of(sample(dev, kLowDevSize, derive_seed(seed, kLowDev)).chosen, dataset);
  if (train_n >= kMediumTrainSize)
    spec.medium_train = ids_of(sample(train, kMediumTrainSize, derive_seed(seed, kMedium)).chosen, dataset);
  spec.medium_dev = ids_of(sample(dev, kMediumDevSize, derive_seed(seed, kMediumDev)).chosen, dataset);
  spec.high_train = ids_of(train, dataset);

  Draw t = sample(test, kTestSize, derive_seed(seed, kTest));
  spec.test = ids_of(t.chosen, dataset);
  spec.test_small = ids_of(sample(t.chosen, kSmallTestSize, derive_seed(seed, kSmallTest)).chosen, dataset);
  return spec;
}

std::string manifest_json(const SplitSpec& spec) {
  nlohmann::json splits;
  for (std::size_t k = 0; k < 3; ++k) splits["low_train_" + std::to_string(k + 1)] = spec.low_train[k];
  splits["low_dev"] = spec.low_dev;
  if (spec.medium_train) splits["medium_train"] = *spec.medium_train;
  splits["medium_dev"] = spec.medium_dev;
  splits["high_train"] = spec.high_train;
  splits["high_dev"] = spec.medium_dev;
  splits["test_2000"] = spec.test;
  splits["test_100"] = spec.test_small;

  nlohmann::json sizes;
  for (const auto& [name, ids] : splits.items()) sizes[name] = ids.size();

  nlohmann::json out;
  out["seed"] = spec.seed;
  out["has_public_test"] = spec.has_public_test;
  out["disjoint_low"] = spec.disjoint_low;
  out["splits"] = std::move(splits);
  out["sizes"] = std::move(sizes);
  return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

Metric parse_metric(std::string_view name) {
  if (name == "exact" || name == "exact_match") return Metric::kExact;
  if (name == "lispress" || name == "lispress_match") return Metric::kLispress;
  if (name == "denotation" || name == "denotation_match" || name == "test_suite" ||
      name == "test-suite" || name == "execution")
    throw Error(ErrorCode::kNotSupported,
                "metric '" + std::string(name) + "' needs a domain executor and is not supported");
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

MetricReport evaluate(std::span<const Prediction> predictions, std::span<const DatasetExample> gold,
                      Metric metric) {
  std::unordered_map<std::string_view, std::size_t> gold_index;
  for (std::size_t i = 0; i < gold.size(); ++i) gold_index.emplace(gold[i].id, i);

  std::vector<const Prediction*> by_gold(gold.size(), nullptr);
  for (const auto& p : predictions) {
    auto it = gold_index.find(p.id);
    if (it == gold_index.end()) throw Error(ErrorCode::kData, "prediction for unknown id '" + p.id + "'");
    if (by_gold[it->second]) throw Error(ErrorCode::kData, "duplicate prediction for id '" + p.id + "'");
    by_gold[it->second] = &p;
  }

  MetricReport r;
  r.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    bool ok = false;
    if (!by_gold[i]) {
      ++r.missing;
    } else if (metric == Metric::kExact) {
      ok = by_gold[i]->text == gold[i].gold;
    } else {
      bool failed = false;
      ok = sexp::lispress_equal(by_gold[i]->text, gold[i].gold, &failed);
      if (failed) ++r.parse_failures;
    }
    if (ok) ++r.correct;
    r.per_example.emplace_back(gold[i].id, ok);
  }
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

std::string report_json(const MetricReport& report) {
  nlohmann::json out;
  out["accuracy"] = report.accuracy;
  out["total"] = report.total;
  out["correct"] = report.correct;
  out["missing"] = report.missing;
  out["parse_failures"] = report.parse_failures;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [id, ok] : report.per_example) rows.push_back({{"id", id}, {"correct", ok}});
  out["examples"] = std::move(rows);
  return out.dump(2) + "\n";
}

Aggregate aggregate_low(std::span<const double, 3> acc) {
  Aggregate a;
  a.mean = (acc[0] + acc[1] + acc[2]) / 3.0;
  double ss = 0.0;
  for (double x : acc) ss += (x - a.mean) * (x - a.mean);
  a.stddev = std::sqrt(ss / 3.0);
  return a;
}

Aggregate aggregate_low(std::span<const MetricReport, 3> reports) {
  const std::array<double, 3> acc{reports[0].accuracy, reports[1].accuracy, reports[2].accuracy};
  return aggregate_low(std::span<const double, 3>(acc));
}

}  // namespace clamp::splits
