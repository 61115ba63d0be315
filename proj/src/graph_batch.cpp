#include "congfu/graph_batch.h"

namespace congfu {

void GraphBatch::append(const chem::ModelGraph& g) {
  const std::size_t base = node_ids.size();
  const std::size_t graph = num_graphs();
  node_ids.insert(node_ids.end(), g.node_ids.begin(), g.node_ids.end());
  segments.insert(segments.end(), g.node_ids.size(), graph);
  for (std::size_t e = 0; e < g.src.size(); ++e) {
    src.push_back(base + g.src[e]);
    dst.push_back(base + g.dst[e]);
    edge_codes.push_back(g.edge_codes[e]);
  }
  node_offsets.push_back(node_ids.size());
  edge_offsets.push_back(src.size());
}

chem::ModelGraph GraphBatch::unpack(std::size_t g) const {
  chem::ModelGraph out;
  const auto n0 = node_offsets.at(g), n1 = node_offsets.at(g + 1);
  out.node_ids.assign(node_ids.begin() + n0, node_ids.begin() + n1);
  for (std::size_t e = edge_offsets[g]; e < edge_offsets[g + 1]; ++e) {
    out.src.push_back(src[e] - n0);
    out.dst.push_back(dst[e] - n0);
    out.edge_codes.push_back(edge_codes[e]);
  }
  return out;
}

GraphBatch pack_graphs(std::span<const chem::MolGraph* const> graphs) {
  GraphBatch batch;
  for (const auto* g : graphs) batch.append(chem::mol_to_model_graph(*g));
  return batch;
}

}  // namespace congfu
