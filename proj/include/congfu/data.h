#pragma once

// Triplet and cell-line ingestion, preprocessing (cell-line filter, SMILES
// parsing, duplicate handling, binarization) and minibatch assembly.
//
// Triplet CSV columns: drug_a_smiles, drug_b_smiles, cell_line_id,
// synergy_score (header required, extra columns ignored). Cell features:
// CSV or TSV, first column the cell-line id, then exactly 908 numbers; a
// header row is detected and skipped.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "congfu/graph_batch.h"
#include "congfu/smiles.h"

namespace congfu::data {

inline constexpr std::size_t kNumLandmarkGenes = 908;
inline constexpr double kPositiveThreshold = 10.0;   // score > 10 -> 1
inline constexpr double kNegativeThreshold = -10.0;  // score < -10 -> 0

struct RawTriplet {
  std::string drug_a_smiles;
  std::string drug_b_smiles;
  std::string cell_line_id;
  double synergy_score = 0.0;
  std::size_t line = 0;  // 1-based line in the source file
};

struct TripletLoad {
  std::vector<RawTriplet> triplets;
  std::size_t rejected = 0;  // malformed rows, logged with line numbers
};

TripletLoad load_triplets(const std::filesystem::path& path);

class CellFeatureTable {
 public:
  /// Inserts or replaces; returns true when the id was already present.
  bool insert(const std::string& id, std::vector<float> features);
  const std::vector<float>* find(const std::string& id) const;
  std::shared_ptr<const std::vector<float>> shared(const std::string& id) const;
  std::size_t size() const { return table_.size(); }
  std::size_t width() const { return kNumLandmarkGenes; }
  /// Ids in sorted order.
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<const std::vector<float>>> table_;
};

/// Duplicate ids keep the last row and log a warning.
CellFeatureTable load_cell_features(const std::filesystem::path& path);
/// Writes `id,f0,...,f907` rows with enough digits to round-trip float32.
void write_cell_features(const std::filesystem::path& path, const CellFeatureTable& table,
                         const std::vector<std::string>& ids);

struct LabeledTriplet {
  std::size_t id = 0;  // position in the preprocessed dataset
  std::string drug_a_smiles;
  std::string drug_b_smiles;
  std::string cell_line_id;
  double score = 0.0;
  int label = 0;
  chem::MolGraph drug_a;
  chem::MolGraph drug_b;
  std::shared_ptr<const std::vector<float>> context;
};

/// Every filter's drop count. Accounting identity:
/// input == samples + dropped_missing_cell + dropped_bad_smiles
///          + dropped_exact_duplicate + merged_conflicting + dropped_unlabeled_band
struct PreprocessReport {
  std::size_t input = 0;
  std::size_t dropped_missing_cell = 0;
  std::size_t dropped_bad_smiles = 0;
  std::size_t dropped_exact_duplicate = 0;
  std::size_t merged_conflicting = 0;
  std::size_t dropped_unlabeled_band = 0;
  std::size_t samples = 0;
  std::size_t positives = 0;
  std::size_t drugs = 0;
  std::size_t cell_lines = 0;
  std::size_t unparseable_smiles = 0;  // distinct strings

  double positive_percent() const { return samples ? 100.0 * double(positives) / double(samples) : 0.0; }
  nlohmann::json to_json() const;
};

struct Preprocessed {
  std::vector<LabeledTriplet> samples;
  PreprocessReport report;
};

/// -1 when the score falls in the unlabeled band [-10, 10].
int binarize(double score);

/// Drug identity: the SMILES string with surrounding whitespace trimmed.
std::string drug_key(std::string_view smiles);

/// Order of the result follows first appearance in the input. `threads`
/// parallelizes SMILES parsing only.
Preprocessed preprocess(const std::vector<RawTriplet>& triplets, const CellFeatureTable& cells,
                        std::size_t threads = 1);

/// Round trip of a preprocessed dataset: `samples.csv` with columns
/// sample_id, drug_a_smiles, drug_b_smiles, cell_line_id, score, label.
void write_samples(const std::filesystem::path& path, const std::vector<LabeledTriplet>& samples);
std::vector<LabeledTriplet> read_samples(const std::filesystem::path& path, const CellFeatureTable& cells);

/// Packs the given samples (in order) into a PairBatch.
PairBatch batch_graphs(const std::vector<const LabeledTriplet*>& samples);
PairBatch batch_graphs(const std::vector<LabeledTriplet>& samples, const std::vector<std::size_t>& indices);

/// Thread count from CONGFU_NUM_THREADS (default 1).
std::size_t env_thread_count();

}  // namespace congfu::data
