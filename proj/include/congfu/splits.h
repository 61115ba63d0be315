#pragma once

// Five-fold split protocols over preprocessed samples. Ids in every set are
// sample ids in ascending order.
//
//   transductive     samples shuffled, fold k tests on the k-th fifth, the
//                    other 80% is split 90/10 into train/val
//   leave-drug-out   drugs shuffled into 5 groups; test holds every sample
//                    touching group k, train/val hold samples touching none
//   leave-comb-out   unordered drug pairs shuffled into 5 groups; every
//                    sample of a pair lands in the same fold

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "congfu/data.h"

namespace congfu::data {

inline constexpr std::size_t kNumFolds = 5;
inline constexpr const char* kSetups[] = {"transductive", "leave-drug-out", "leave-comb-out"};

struct SplitPlan {
  std::string setup;
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  /// Inductive setups: the held-out drug group (leave-drug-out) or pair
  /// group (leave-comb-out) of this fold, sorted. Empty for transductive.
  std::vector<std::string> held_out;

  nlohmann::json to_json() const;
  static SplitPlan from_json(const nlohmann::json& j);
};

std::vector<SplitPlan> make_transductive_splits(const std::vector<LabeledTriplet>& samples, std::uint64_t seed);
std::vector<SplitPlan> make_leave_drug_out_splits(const std::vector<LabeledTriplet>& samples, std::uint64_t seed);
std::vector<SplitPlan> make_leave_comb_out_splits(const std::vector<LabeledTriplet>& samples, std::uint64_t seed);
/// Dispatch on the setup tag; ConfigError for an unknown tag.
std::vector<SplitPlan> make_splits(const std::string& setup, const std::vector<LabeledTriplet>& samples,
                                   std::uint64_t seed);

/// `splits/<setup>_fold<k>.json` under a dataset directory.
std::filesystem::path split_path(const std::filesystem::path& data_dir, const std::string& setup, std::size_t fold);
void write_split(const std::filesystem::path& path, const SplitPlan& plan);
SplitPlan read_split(const std::filesystem::path& path);

/// Unordered pair key "a\tb" with a <= b.
std::string pair_key(const LabeledTriplet& s);

/// Fisher-Yates with a 64-bit Mersenne Twister; spelled out so the
/// permutation does not depend on the standard library's shuffle.
void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);

}  // namespace congfu::data
