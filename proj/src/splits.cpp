#include "congfu/splits.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "congfu/errors.h"

namespace congfu::data {
namespace {

// Distinct stream per (seed, purpose, fold) so the val draw of one fold
// never shares a generator with the fold assignment.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t fold) {
  std::uint64_t z = seed ^ (purpose * 0x9E3779B97F4A7C15ULL) ^ (fold * 0xBF58476D1CE4E5B9ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t val_count(std::size_t n) { return static_cast<std::size_t>(std::llround(0.1 * double(n))); }

// Splits a pool into train and val (10%, rounded), both sorted.
void split_train_val(std::vector<std::size_t> pool, std::uint64_t seed, SplitPlan& plan) {
  std::sort(pool.begin(), pool.end());
  seeded_shuffle(pool, seed);
  const auto nv = val_count(pool.size());
  plan.val.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(nv));
  plan.train.assign(pool.begin() + static_cast<std::ptrdiff_t>(nv), pool.end());
  std::sort(plan.val.begin(), plan.val.end());
  std::sort(plan.train.begin(), plan.train.end());
}

// Group of each of n shuffled items: 5 near-equal contiguous blocks.
std::size_t block_of(std::size_t position, std::size_t n) {
  return position * kNumFolds / n;
}

// Shared shape of the two inductive protocols: `keys[i]` lists the group
// keys of sample i, and a sample is tested in fold g when any key is in g.
std::vector<SplitPlan> grouped_splits(const std::string& setup, const std::vector<LabeledTriplet>& samples,
                                      const std::vector<std::vector<std::string>>& keys, std::uint64_t seed) {
  std::set<std::string> distinct;
  for (const auto& ks : keys) distinct.insert(ks.begin(), ks.end());
  std::vector<std::string> ordered(distinct.begin(), distinct.end());
  std::vector<std::size_t> perm(ordered.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  seeded_shuffle(perm, derive_seed(seed, 1, 0));
  std::map<std::string, std::size_t> group;
  for (std::size_t p = 0; p < perm.size(); ++p) group[ordered[perm[p]]] = block_of(p, perm.size());

  std::vector<SplitPlan> plans;
  for (std::size_t g = 0; g < kNumFolds; ++g) {
    SplitPlan plan{setup, g, seed, {}, {}, {}, {}};
    for (const auto& [key, grp] : group)
      if (grp == g) plan.held_out.push_back(key);
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const bool tested = std::any_of(keys[i].begin(), keys[i].end(), [&](const auto& k) { return group[k] == g; });
      (tested ? plan.test : pool).push_back(samples[i].id);
    }
    split_train_val(std::move(pool), derive_seed(seed, 2, g), plan);
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace

void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

nlohmann::json SplitPlan::to_json() const {
  nlohmann::json j = {{"setup", setup}, {"fold", fold}, {"seed", seed}, {"train", train}, {"val", val}, {"test", test}};
  if (!held_out.empty()) j["held_out"] = held_out;
  return j;
}

SplitPlan SplitPlan::from_json(const nlohmann::json& j) {
  try {
    return {j.at("setup").get<std::string>(),           j.at("fold").get<std::size_t>(),
            j.at("seed").get<std::uint64_t>(),          j.at("train").get<std::vector<std::size_t>>(),
            j.at("val").get<std::vector<std::size_t>>(), j.at("test").get<std::vector<std::size_t>>(),
            j.value("held_out", std::vector<std::string>{})};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed split file: ") + e.what());
  }
}

std::string pair_key(const LabeledTriplet& s) {
  const auto& a = s.drug_a_smiles;
  const auto& b = s.drug_b_smiles;
  return a <= b ? a + '\t' + b : b + '\t' + a;
}

std::vector<SplitPlan> make_transductive_splits(const std::vector<LabeledTriplet>& samples, std::uint64_t seed) {
  if (samples.size() < 10) {
    throw ContractError("transductive splits need at least 10 samples, got " + std::to_string(samples.size()));
  }
  std::vector<std::size_t> ids;
  for (const auto& s : samples) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  seeded_shuffle(ids, derive_seed(seed, 0, 0));
  const auto n = ids.size();
  std::vector<SplitPlan> plans;
  for (std::size_t k = 0; k < kNumFolds; ++k) {
    SplitPlan plan{"transductive", k, seed, {}, {}, {}, {}};
    const auto lo = k * n / kNumFolds, hi = (k + 1) * n / kNumFolds;
    std::vector<std::size_t> pool;
    for (std::size_t p = 0; p < n; ++p) (p >= lo && p < hi ? plan.test : pool).push_back(ids[p]);
    std::sort(plan.test.begin(), plan.test.end());
    split_train_val(std::move(pool), derive_seed(seed, 2, k), plan);
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<SplitPlan> make_leave_drug_out_splits(const std::vector<LabeledTriplet>& samples, std::uint64_t seed) {
  std::vector<std::vector<std::string>> keys;
  std::set<std::string> drugs;
  for (const auto& s : samples) {
    keys.push_back({s.drug_a_smiles, s.drug_b_smiles});
    drugs.insert(s.drug_a_smiles);
    drugs.insert(s.drug_b_smiles);
  }
  if (drugs.size() < kNumFolds) {
    throw ContractError("leave-drug-out splits need at least 5 distinct drugs, got " + std::to_string(drugs.size()));
  }
  return grouped_splits("leave-drug-out", samples, keys, seed);
}

std::vector<SplitPlan> make_leave_comb_out_splits(const std::vector<LabeledTriplet>& samples, std::uint64_t seed) {
  std::vector<std::vector<std::string>> keys;
  std::set<std::string> pairs;
  for (const auto& s : samples) {
    keys.push_back({pair_key(s)});
    pairs.insert(keys.back().front());
  }
  if (pairs.size() < kNumFolds) {
    throw ContractError("leave-comb-out splits need at least 5 distinct drug pairs, got " +
                        std::to_string(pairs.size()));
  }
  return grouped_splits("leave-comb-out", samples, keys, seed);
}

std::vector<SplitPlan> make_splits(const std::string& setup, const std::vector<LabeledTriplet>& samples,
                                   std::uint64_t seed) {
  if (setup == "transductive") return make_transductive_splits(samples, seed);
  if (setup == "leave-drug-out") return make_leave_drug_out_splits(samples, seed);
  if (setup == "leave-comb-out") return make_leave_comb_out_splits(samples, seed);
  throw ConfigError("unknown setup '" + setup + "' (transductive|leave-drug-out|leave-comb-out)");
}

std::filesystem::path split_path(const std::filesystem::path& data_dir, const std::string& setup, std::size_t fold) {
  return data_dir / "splits" / (setup + "_fold" + std::to_string(fold) + ".json");
}

void write_split(const std::filesystem::path& path, const SplitPlan& plan) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << plan.to_json().dump() << '\n';
}

SplitPlan read_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read split file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return SplitPlan::from_json(j);
}

}  // namespace congfu::data
