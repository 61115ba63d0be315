#include "congfu/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "congfu/errors.h"
#include "congfu/log.h"

namespace congfu::data {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits one delimited line; double-quoted fields may contain the delimiter
// and "" escapes a quote.
std::vector<std::string> split_line(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  const std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<float> parse_float(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  const std::string buf(s);
  char* end = nullptr;
  const float v = std::strtof(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Parses each distinct SMILES once, fanning out over `threads` workers.
// Results are indexed by input position so completion order never matters.
std::vector<std::optional<chem::MolGraph>> parse_all(const std::vector<std::string>& smiles, std::size_t threads) {
  std::vector<std::optional<chem::MolGraph>> out(smiles.size());
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        out[i] = chem::parse_smiles(smiles[i]);
      } catch (const chem::SmilesError&) {
        out[i].reset();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, smiles.size()));
  if (threads == 1) {
    work(0, smiles.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (smiles.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const auto b = std::min(smiles.size(), t * chunk), e = std::min(smiles.size(), (t + 1) * chunk);
    pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace

TripletLoad load_triplets(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file, expected a header row");
  const auto header = split_line(line, ',');
  const auto column = [&](const char* name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return i;
    throw SchemaError(path.string() + ": missing column '" + name + "'");
  };
  const auto ca = column("drug_a_smiles"), cb = column("drug_b_smiles"), cc = column("cell_line_id"),
             cs = column("synergy_score");
  const auto needed = std::max({ca, cb, cc, cs}) + 1;

  TripletLoad load;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_line(line, ',');
    std::string why;
    std::optional<double> score;
    if (f.size() < needed) {
      why = "has " + std::to_string(f.size()) + " fields";
    } else if (trim(f[ca]).empty() || trim(f[cb]).empty() || trim(f[cc]).empty()) {
      why = "has an empty drug or cell-line field";
    } else if (!(score = parse_double(f[cs]))) {
      why = "has a missing or non-numeric synergy score";
    }
    if (!why.empty()) {
      ++load.rejected;
      log_warn(path.string() + ":" + std::to_string(lineno) + ": row rejected, " + why);
      continue;
    }
    load.triplets.push_back(
        {std::string(trim(f[ca])), std::string(trim(f[cb])), std::string(trim(f[cc])), *score, lineno});
  }
  return load;
}

bool CellFeatureTable::insert(const std::string& id, std::vector<float> features) {
  if (features.size() != kNumLandmarkGenes) {
    throw SchemaError("cell line " + id + " has " + std::to_string(features.size()) + " features, expected " +
                      std::to_string(kNumLandmarkGenes));
  }
  auto ptr = std::make_shared<const std::vector<float>>(std::move(features));
  const bool existed = table_.count(id) > 0;
  table_[id] = std::move(ptr);
  return existed;
}

const std::vector<float>* CellFeatureTable::find(const std::string& id) const {
  const auto it = table_.find(id);
  return it == table_.end() ? nullptr : it->second.get();
}

std::shared_ptr<const std::vector<float>> CellFeatureTable::shared(const std::string& id) const {
  const auto it = table_.find(id);
  return it == table_.end() ? nullptr : it->second;
}

std::vector<std::string> CellFeatureTable::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : table_) out.push_back(id);
  return out;
}

CellFeatureTable load_cell_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  CellFeatureTable table;
  std::string line;
  std::size_t lineno = 0;
  std::optional<char> delim;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (!delim) delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto f = split_line(line, *delim);
    if (f.size() != kNumLandmarkGenes + 1) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected an id and " +
                        std::to_string(kNumLandmarkGenes) + " features, got " + std::to_string(f.size() - 1));
    }
    std::vector<float> values;
    values.reserve(kNumLandmarkGenes);
    bool numeric = true;
    for (std::size_t i = 1; i < f.size() && numeric; ++i) {
      const auto v = parse_float(f[i]);
      numeric = v.has_value();
      if (numeric) values.push_back(*v);
    }
    if (!numeric) {
      if (table.size() == 0 && lineno == 1) continue;  // header row
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": non-numeric feature value");
    }
    const std::string id(trim(f[0]));
    if (table.insert(id, std::move(values))) {
      log_warn(path.string() + ":" + std::to_string(lineno) + ": duplicate cell line " + id + ", keeping the last row");
    }
  }
  return table;
}

void write_cell_features(const std::filesystem::path& path, const CellFeatureTable& table,
                         const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "cell_line_id";
  for (std::size_t i = 0; i < kNumLandmarkGenes; ++i) out << ",g" << i;
  out << '\n';
  for (const auto& id : ids) {
    const auto* v = table.find(id);
    if (!v) throw ContractError("write_cell_features: unknown cell line " + id);
    out << id;
    for (float x : *v) out << ',' << format_float(x);
    out << '\n';
  }
}

nlohmann::json PreprocessReport::to_json() const {
  return {{"input", input},
          {"dropped_missing_cell", dropped_missing_cell},
          {"dropped_bad_smiles", dropped_bad_smiles},
          {"dropped_exact_duplicate", dropped_exact_duplicate},
          {"merged_conflicting", merged_conflicting},
          {"dropped_unlabeled_band", dropped_unlabeled_band},
          {"samples", samples},
          {"positives", positives},
          {"positive_percent", std::round(positive_percent() * 10.0) / 10.0},
          {"drugs", drugs},
          {"cell_lines", cell_lines},
          {"unparseable_smiles", unparseable_smiles}};
}

int binarize(double score) {
  if (score > kPositiveThreshold) return 1;
  if (score < kNegativeThreshold) return 0;
  return -1;
}

std::string drug_key(std::string_view smiles) { return std::string(trim(smiles)); }

Preprocessed preprocess(const std::vector<RawTriplet>& triplets, const CellFeatureTable& cells, std::size_t threads) {
  Preprocessed result;
  auto& rep = result.report;
  rep.input = triplets.size();

  // Distinct SMILES of rows that survive the cell-line filter, in first-seen order.
  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> smiles_index;
  std::vector<bool> has_cell(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    has_cell[i] = cells.find(triplets[i].cell_line_id) != nullptr;
    if (!has_cell[i]) continue;
    for (const auto* s : {&triplets[i].drug_a_smiles, &triplets[i].drug_b_smiles}) {
      auto key = drug_key(*s);
      if (smiles_index.emplace(key, distinct.size()).second) distinct.push_back(std::move(key));
    }
  }
  const auto graphs = parse_all(distinct, threads);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    if (!graphs[i]) {
      ++rep.unparseable_smiles;
      log_info("dropping unparseable SMILES " + distinct[i]);
    }
  }

  struct Group {
    std::size_t first;  // index of the first row
    double score_sum = 0.0;
    std::size_t count = 0;
  };
  using PairCell = std::tuple<std::string, std::string, std::string>;
  std::map<PairCell, std::size_t> group_of;
  std::vector<Group> groups;
  std::set<std::tuple<std::string, std::string, std::string, double>> exact;

  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (!has_cell[i]) {
      ++rep.dropped_missing_cell;
      continue;
    }
    const auto ka = drug_key(t.drug_a_smiles), kb = drug_key(t.drug_b_smiles);
    if (!graphs[smiles_index.at(ka)] || !graphs[smiles_index.at(kb)]) {
      ++rep.dropped_bad_smiles;
      continue;
    }
    const auto& lo = std::min(ka, kb);
    const auto& hi = std::max(ka, kb);
    if (!exact.emplace(lo, hi, t.cell_line_id, t.synergy_score).second) {
      ++rep.dropped_exact_duplicate;
      continue;
    }
    const auto [it, fresh] = group_of.emplace(PairCell{lo, hi, t.cell_line_id}, groups.size());
    if (fresh) {
      groups.push_back({i});
    } else {
      ++rep.merged_conflicting;
      log_info("triplet on line " + std::to_string(t.line) + " repeats a pair/cell with a different score; averaging");
    }
    auto& g = groups[it->second];
    g.score_sum += t.synergy_score;
    g.count += 1;
  }

  std::set<std::string> drugs, cell_ids;
  for (const auto& g : groups) {
    const double score = g.score_sum / double(g.count);
    const int label = binarize(score);
    if (label < 0) {
      ++rep.dropped_unlabeled_band;
      continue;
    }
    const auto& t = triplets[g.first];
    LabeledTriplet s;
    s.id = result.samples.size();
    s.drug_a_smiles = drug_key(t.drug_a_smiles);
    s.drug_b_smiles = drug_key(t.drug_b_smiles);
    s.cell_line_id = t.cell_line_id;
    s.score = score;
    s.label = label;
    s.drug_a = *graphs[smiles_index.at(s.drug_a_smiles)];
    s.drug_b = *graphs[smiles_index.at(s.drug_b_smiles)];
    s.context = cells.shared(t.cell_line_id);
    rep.positives += static_cast<std::size_t>(label);
    drugs.insert(s.drug_a_smiles);
    drugs.insert(s.drug_b_smiles);
    cell_ids.insert(s.cell_line_id);
    result.samples.push_back(std::move(s));
  }
  rep.samples = result.samples.size();
  rep.drugs = drugs.size();
  rep.cell_lines = cell_ids.size();

  // Collision audit: distinct SMILES strings that parse to the same graph.
  std::map<std::string, std::size_t> by_graph;
  for (const auto& d : drugs) by_graph[chem::to_edge_list_text(*graphs[smiles_index.at(d)])] += 1;
  std::size_t collisions = 0;
  for (const auto& [_, n] : by_graph) collisions += n - 1;
  if (collisions) {
    log_info(std::to_string(collisions) + " drug SMILES strings share a molecular graph with another string");
  }
  return result;
}

void write_samples(const std::filesystem::path& path, const std::vector<LabeledTriplet>& samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sample_id,drug_a_smiles,drug_b_smiles,cell_line_id,score,label\n";
  for (const auto& s : samples) {
    out << s.id << ',' << s.drug_a_smiles << ',' << s.drug_b_smiles << ',' << s.cell_line_id << ','
        << format_double(s.score) << ',' << s.label << '\n';
  }
}

std::vector<LabeledTriplet> read_samples(const std::filesystem::path& path, const CellFeatureTable& cells) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "sample_id,drug_a_smiles,drug_b_smiles,cell_line_id,score,label") {
    throw SchemaError(path.string() + ": not a preprocessed samples file");
  }
  std::vector<LabeledTriplet> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_line(line, ',');
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 6) throw SchemaError(where + ": expected 6 fields");
    LabeledTriplet s;
    const auto score = parse_double(f[4]);
    if (!score) throw SchemaError(where + ": bad score");
    s.id = std::stoull(f[0]);
    if (s.id != out.size()) throw SchemaError(where + ": sample ids must be 0..n-1 in order");
    s.drug_a_smiles = f[1];
    s.drug_b_smiles = f[2];
    s.cell_line_id = f[3];
    s.score = *score;
    s.label = std::stoi(f[5]);
    if (s.label != 0 && s.label != 1) throw SchemaError(where + ": label must be 0 or 1");
    s.drug_a = chem::parse_smiles(s.drug_a_smiles);
    s.drug_b = chem::parse_smiles(s.drug_b_smiles);
    s.context = cells.shared(s.cell_line_id);
    if (!s.context) throw SchemaError(where + ": unknown cell line " + s.cell_line_id);
    out.push_back(std::move(s));
  }
  return out;
}

PairBatch batch_graphs(const std::vector<const LabeledTriplet*>& samples) {
  if (samples.empty()) throw ContractError("batch_graphs: no samples");
  PairBatch batch;
  batch.context_width = samples.front()->context ? samples.front()->context->size() : 0;
  for (const auto* s : samples) {
    batch.a.append(chem::mol_to_model_graph(s->drug_a));
    batch.b.append(chem::mol_to_model_graph(s->drug_b));
    if (!s->context || s->context->size() != batch.context_width) {
      throw DimensionError("batch_graphs: sample " + std::to_string(s->id) + " has a missing or mis-sized context");
    }
    batch.contexts.insert(batch.contexts.end(), s->context->begin(), s->context->end());
    batch.labels.push_back(static_cast<float>(s->label));
    batch.ids.push_back(s->id);
  }
  return batch;
}

PairBatch batch_graphs(const std::vector<LabeledTriplet>& samples, const std::vector<std::size_t>& indices) {
  std::vector<const LabeledTriplet*> ptrs;
  ptrs.reserve(indices.size());
  for (auto i : indices) ptrs.push_back(&samples.at(i));
  return batch_graphs(ptrs);
}

std::size_t env_thread_count() {
  const char* v = std::getenv("CONGFU_NUM_THREADS");
  if (!v || !*v) return 1;
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(v, v + std::strlen(v), n);
  if (ec != std::errc() || n == 0) return 1;
  return n;
}

}  // namespace congfu::data
