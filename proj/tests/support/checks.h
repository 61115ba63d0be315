#pragma once

// Property sweeps shared by the unit tests and the acceptance binary. Each
// returns ok plus a one-line detail for the report.

#include <cstdint>
#include <string>
#include <vector>

#include "congfu/data.h"
#include "congfu/splits.h"

namespace congfu::testing {

struct Check {
  bool ok = true;
  std::string detail;
};

/// Parses every corpus SMILES and compares atom and bond counts with the
/// reference-toolkit columns of the TSV.
Check check_smiles_corpus(const std::string& tsv_path);

/// Random strings and single-character mutations of corpus entries: every
/// input either parses or throws SmilesError with an in-range offset.
Check check_parser_fuzz(const std::string& tsv_path, std::size_t mutations, std::uint64_t seed);

/// Disjointness, coverage and protocol-specific exclusions for the 15 plans.
Check check_split_integrity(const std::vector<data::LabeledTriplet>& samples, const std::vector<data::SplitPlan>& plans);

/// auroc/aucpr against the brute-force oracles on random instances.
Check check_metric_oracles(std::size_t instances, std::uint64_t seed);

std::vector<std::string> corpus_smiles(const std::string& tsv_path);

}  // namespace congfu::testing
