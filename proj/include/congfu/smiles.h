#pragma once

// A practical SMILES subset: organic-subset and aromatic atoms, bracket atoms
// (isotope, chirality, H count, charge and atom class are consumed and
// dropped), bonds - = # $ : / \, ring closures 0-9 and %nn, branches and
// dot-disconnected components. Only atomic numbers and bond types survive.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace congfu::chem {

enum class BondCode : std::uint8_t { Single = 0, Double = 1, Triple = 2, Aromatic = 3, Other = 4 };
inline constexpr std::size_t kNumBondCodes = 5;
inline constexpr std::size_t kNumAtomCodes = 119;  // atomic numbers 0-118

const char* bond_code_name(BondCode code);

/// Lex or parse failure at a byte offset of the input.
class SmilesError : public std::runtime_error {
 public:
  SmilesError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

enum class TokenKind : std::uint8_t { Atom, Bond, BranchOpen, BranchClose, RingClosure, Dot };

struct SmilesToken {
  TokenKind kind;
  std::size_t offset = 0;  // byte span of the input this token was lexed from
  std::size_t length = 0;
  int atomic_number = 0;  // Atom
  bool aromatic = false;  // Atom
  BondCode bond = BondCode::Single;  // Bond
  int ring_number = -1;  // RingClosure

  std::string_view text(std::string_view source) const { return source.substr(offset, length); }
};

std::vector<SmilesToken> tokenize_smiles(std::string_view smiles);

struct BondEdge {
  std::size_t u;  // u < v
  std::size_t v;
  BondCode bond;

  friend bool operator==(const BondEdge&, const BondEdge&) = default;
};

struct MolGraph {
  std::vector<int> atom_nums;
  std::vector<BondEdge> edges;

  std::size_t num_nodes() const { return atom_nums.size(); }
  friend bool operator==(const MolGraph&, const MolGraph&) = default;
};

/// Nodes appear in first-appearance order. Between two atoms the default
/// bond is single, or aromatic when both atoms are aromatic; an explicit bond
/// symbol overrides it. Throws SmilesError with the offending offset.
MolGraph parse_smiles(std::string_view smiles);

/// Directed view consumed by the model: each undirected edge appears in both
/// directions with the same bond code.
struct ModelGraph {
  std::vector<std::size_t> node_ids;  // atomic numbers
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  std::vector<std::size_t> edge_codes;
};

ModelGraph mol_to_model_graph(const MolGraph& g);

/// Debug dump: an "atoms" line followed by one "u v bond" line per edge.
std::string to_edge_list_text(const MolGraph& g);

/// Atomic number for a capitalized element symbol, or 0 if unknown.
int element_number(std::string_view symbol);

}  // namespace congfu::chem
