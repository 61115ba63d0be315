#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "congfu/smiles.h"

namespace congfu {

/// Several molecules packed into one node/edge arena. Graph g owns nodes
/// [node_offsets[g], node_offsets[g + 1]); segments[i] is the graph of node i
/// and is therefore non-decreasing.
struct GraphBatch {
  std::vector<std::size_t> node_ids;
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  std::vector<std::size_t> edge_codes;
  std::vector<std::size_t> segments;
  std::vector<std::size_t> node_offsets{0};
  std::vector<std::size_t> edge_offsets{0};

  std::size_t num_graphs() const { return node_offsets.size() - 1; }
  std::size_t num_nodes() const { return node_ids.size(); }
  std::size_t num_edges() const { return src.size(); }
  std::size_t graph_size(std::size_t g) const { return node_offsets[g + 1] - node_offsets[g]; }

  void append(const chem::ModelGraph& g);
  /// Graph g with node indices relative to its own first node.
  chem::ModelGraph unpack(std::size_t g) const;
};

GraphBatch pack_graphs(std::span<const chem::MolGraph* const> graphs);

}  // namespace congfu

namespace congfu {

/// A minibatch of drug pairs: molecule A of every pair packed into one arena,
/// molecule B into another, contexts stacked row-wise.
struct PairBatch {
  GraphBatch a;
  GraphBatch b;
  std::vector<float> contexts;  // [size() x context_width], row-major
  std::size_t context_width = 0;
  std::vector<float> labels;     // empty when unlabeled
  std::vector<std::size_t> ids;  // sample ids, parallel to the rows

  std::size_t size() const { return a.num_graphs(); }
};

}  // namespace congfu
