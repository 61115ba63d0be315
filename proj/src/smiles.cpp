#include "congfu/smiles.h"

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace congfu::chem {
namespace {

constexpr std::array<std::string_view, 119> kElements = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",
    "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho",
    "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
    "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md",
    "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string describe(char c) {
  if (std::isprint(static_cast<unsigned char>(c))) return std::string("'") + c + "'";
  std::ostringstream os;
  os << "byte 0x" << std::hex << (static_cast<unsigned>(c) & 0xffu);
  return os.str();
}

// Aromatic symbols allowed inside brackets.
int bracket_aromatic(std::string_view s, std::size_t& len) {
  static constexpr std::array<std::pair<std::string_view, int>, 9> kAromatic = {{
      {"se", 34}, {"as", 33}, {"te", 52}, {"b", 5}, {"c", 6}, {"n", 7}, {"o", 8}, {"p", 15}, {"s", 16},
  }};
  for (const auto& [sym, z] : kAromatic) {
    if (s.substr(0, sym.size()) == sym) {
      len = sym.size();
      return z;
    }
  }
  return 0;
}

SmilesToken lex_bracket(std::string_view s, std::size_t start) {
  // [ isotope? symbol chirality? hcount? charge? class? ]
  std::size_t i = start + 1;
  const auto at_end = [&] { return i >= s.size(); };
  const auto unterminated = [&] { return SmilesError("unterminated bracket atom", start); };

  while (!at_end() && is_digit(s[i])) ++i;  // isotope
  if (at_end()) throw unterminated();

  SmilesToken tok{TokenKind::Atom};
  tok.offset = start;
  std::size_t sym_len = 0;
  if (std::islower(static_cast<unsigned char>(s[i]))) {
    tok.atomic_number = bracket_aromatic(s.substr(i), sym_len);
    tok.aromatic = tok.atomic_number != 0;
  } else if (std::isupper(static_cast<unsigned char>(s[i]))) {
    if (i + 1 < s.size() && std::islower(static_cast<unsigned char>(s[i + 1]))) {
      if (int z = element_number(s.substr(i, 2)); z) {
        tok.atomic_number = z;
        sym_len = 2;
      }
    }
    if (!sym_len) {
      if (int z = element_number(s.substr(i, 1)); z) {
        tok.atomic_number = z;
        sym_len = 1;
      }
    }
  }
  if (!sym_len) {
    if (s[i] == ']') throw SmilesError("bracket atom without element symbol", i);
    throw SmilesError("unknown element symbol in bracket atom at " + describe(s[i]), i);
  }
  i += sym_len;

  if (!at_end() && s[i] == '@') {  // chirality
    ++i;
    if (!at_end() && s[i] == '@') {
      ++i;
    } else if (i + 1 < s.size()) {
      const auto cls = s.substr(i, 2);
      if (cls == "TH" || cls == "AL" || cls == "SP" || cls == "TB" || cls == "OH") {
        i += 2;
        while (!at_end() && is_digit(s[i])) ++i;
      }
    }
  }
  if (!at_end() && s[i] == 'H') {  // hydrogen count
    ++i;
    while (!at_end() && is_digit(s[i])) ++i;
  }
  if (!at_end() && (s[i] == '+' || s[i] == '-')) {  // charge
    const char sign = s[i++];
    if (!at_end() && is_digit(s[i])) {
      while (!at_end() && is_digit(s[i])) ++i;
    } else {
      while (!at_end() && s[i] == sign) ++i;
    }
  }
  if (!at_end() && s[i] == ':') {  // atom class
    ++i;
    if (at_end() || !is_digit(s[i])) throw SmilesError("atom class needs digits", i);
    while (!at_end() && is_digit(s[i])) ++i;
  }
  if (at_end()) throw unterminated();
  if (s[i] != ']') throw SmilesError("unexpected " + describe(s[i]) + " inside bracket atom", i);
  tok.length = i + 1 - start;
  return tok;
}

BondCode default_bond(bool aromatic_a, bool aromatic_b) {
  return aromatic_a && aromatic_b ? BondCode::Aromatic : BondCode::Single;
}

}  // namespace

SmilesError::SmilesError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at offset " + std::to_string(position)), position_(position) {}

const char* bond_code_name(BondCode code) {
  switch (code) {
    case BondCode::Single: return "single";
    case BondCode::Double: return "double";
    case BondCode::Triple: return "triple";
    case BondCode::Aromatic: return "aromatic";
    case BondCode::Other: return "other";
  }
  return "?";
}

int element_number(std::string_view symbol) {
  for (std::size_t z = 1; z < kElements.size(); ++z)
    if (kElements[z] == symbol) return static_cast<int>(z);
  return 0;
}

std::vector<SmilesToken> tokenize_smiles(std::string_view s) {
  if (s.empty()) throw SmilesError("empty SMILES", 0);
  std::vector<SmilesToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    SmilesToken tok{TokenKind::Atom};
    tok.offset = i;
    tok.length = 1;
    switch (c) {
      case 'B':
      case 'C':
        if (i + 1 < s.size() && s[i + 1] == (c == 'B' ? 'r' : 'l')) {
          tok.atomic_number = c == 'B' ? 35 : 17;
          tok.length = 2;
        } else {
          tok.atomic_number = c == 'B' ? 5 : 6;
        }
        break;
      case 'N': tok.atomic_number = 7; break;
      case 'O': tok.atomic_number = 8; break;
      case 'P': tok.atomic_number = 15; break;
      case 'S': tok.atomic_number = 16; break;
      case 'F': tok.atomic_number = 9; break;
      case 'I': tok.atomic_number = 53; break;
      case 'b': tok.atomic_number = 5; tok.aromatic = true; break;
      case 'c': tok.atomic_number = 6; tok.aromatic = true; break;
      case 'n': tok.atomic_number = 7; tok.aromatic = true; break;
      case 'o': tok.atomic_number = 8; tok.aromatic = true; break;
      case 'p': tok.atomic_number = 15; tok.aromatic = true; break;
      case 's': tok.atomic_number = 16; tok.aromatic = true; break;
      case '[': tok = lex_bracket(s, i); break;
      case '-': case '/': case '\\': tok.kind = TokenKind::Bond; tok.bond = BondCode::Single; break;
      case '=': tok.kind = TokenKind::Bond; tok.bond = BondCode::Double; break;
      case '#': tok.kind = TokenKind::Bond; tok.bond = BondCode::Triple; break;
      case '$': tok.kind = TokenKind::Bond; tok.bond = BondCode::Other; break;
      case ':': tok.kind = TokenKind::Bond; tok.bond = BondCode::Aromatic; break;
      case '(': tok.kind = TokenKind::BranchOpen; break;
      case ')': tok.kind = TokenKind::BranchClose; break;
      case '.': tok.kind = TokenKind::Dot; break;
      case '%':
        if (i + 2 >= s.size() || !is_digit(s[i + 1]) || !is_digit(s[i + 2])) {
          throw SmilesError("'%' ring closure needs two digits", i);
        }
        tok.kind = TokenKind::RingClosure;
        tok.ring_number = (s[i + 1] - '0') * 10 + (s[i + 2] - '0');
        tok.length = 3;
        break;
      default:
        if (is_digit(c)) {
          tok.kind = TokenKind::RingClosure;
          tok.ring_number = c - '0';
        } else {
          throw SmilesError("unexpected character " + describe(c), i);
        }
    }
    i += tok.length;
    out.push_back(tok);
  }
  return out;
}

MolGraph parse_smiles(std::string_view s) {
  const auto tokens = tokenize_smiles(s);

  struct RingOpen {
    std::size_t atom;
    std::optional<BondCode> bond;
    std::size_t offset;
  };
  struct PendingBond {
    BondCode code;
    std::size_t offset;
  };

  MolGraph g;
  std::vector<bool> aromatic;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::optional<std::size_t> prev;
  std::optional<PendingBond> pending;
  std::vector<std::pair<std::size_t, std::size_t>> branches;  // (atom, offset of '(')
  std::map<int, RingOpen> rings;
  const SmilesToken* last = nullptr;

  const auto connect = [&](std::size_t a, std::size_t b, BondCode code, std::size_t offset) {
    if (a == b) throw SmilesError("ring closure bonds an atom to itself", offset);
    const auto key = std::minmax(a, b);
    if (!seen.insert(key).second) throw SmilesError("duplicate bond between the same two atoms", offset);
    g.edges.push_back({key.first, key.second, code});
  };

  for (const auto& tok : tokens) {
    switch (tok.kind) {
      case TokenKind::Atom: {
        const std::size_t idx = g.atom_nums.size();
        g.atom_nums.push_back(tok.atomic_number);
        aromatic.push_back(tok.aromatic);
        if (prev) {
          const auto code = pending ? pending->code : default_bond(aromatic[*prev], tok.aromatic);
          connect(*prev, idx, code, tok.offset);
        }
        pending.reset();
        prev = idx;
        break;
      }
      case TokenKind::Bond:
        if (!prev) throw SmilesError("bond without a preceding atom", tok.offset);
        if (pending) throw SmilesError("two bond symbols in a row", tok.offset);
        pending = PendingBond{tok.bond, tok.offset};
        break;
      case TokenKind::BranchOpen:
        if (!prev) throw SmilesError("branch without a preceding atom", tok.offset);
        if (pending) throw SmilesError("bond symbol before '('", pending->offset);
        branches.emplace_back(*prev, tok.offset);
        break;
      case TokenKind::BranchClose:
        if (branches.empty()) throw SmilesError("unmatched ')'", tok.offset);
        if (pending) throw SmilesError("bond symbol before ')'", pending->offset);
        if (last && last->kind == TokenKind::BranchOpen) throw SmilesError("empty branch", tok.offset);
        prev = branches.back().first;
        branches.pop_back();
        break;
      case TokenKind::RingClosure: {
        if (!prev) throw SmilesError("ring closure without a preceding atom", tok.offset);
        const std::optional<BondCode> here = pending ? std::optional(pending->code) : std::nullopt;
        pending.reset();
        if (auto it = rings.find(tok.ring_number); it != rings.end()) {
          const auto open = it->second;
          if (open.bond && here && *open.bond != *here) {
            throw SmilesError("conflicting bond symbols on ring closure " + std::to_string(tok.ring_number),
                              tok.offset);
          }
          const auto code = here     ? *here
                            : open.bond ? *open.bond
                                        : default_bond(aromatic[open.atom], aromatic[*prev]);
          connect(open.atom, *prev, code, tok.offset);
          rings.erase(it);
        } else {
          rings.emplace(tok.ring_number, RingOpen{*prev, here, tok.offset});
        }
        break;
      }
      case TokenKind::Dot:
        if (pending) throw SmilesError("bond symbol before '.'", pending->offset);
        if (!prev) throw SmilesError("'.' without a preceding atom", tok.offset);
        prev.reset();
        break;
    }
    last = &tok;
  }
  if (pending) throw SmilesError("dangling bond symbol", pending->offset);
  if (!branches.empty()) throw SmilesError("unclosed '('", branches.back().second);
  if (!rings.empty()) {
    const auto& [num, open] = *rings.begin();
    throw SmilesError("unclosed ring " + std::to_string(num), open.offset);
  }
  if (g.atom_nums.empty()) throw SmilesError("no atoms", 0);
  return g;
}

ModelGraph mol_to_model_graph(const MolGraph& g) {
  ModelGraph m;
  m.node_ids.assign(g.atom_nums.begin(), g.atom_nums.end());
  m.src.reserve(2 * g.edges.size());
  m.dst.reserve(2 * g.edges.size());
  m.edge_codes.reserve(2 * g.edges.size());
  for (const auto& e : g.edges) {
    const auto code = static_cast<std::size_t>(e.bond);
    m.src.push_back(e.u);
    m.dst.push_back(e.v);
    m.edge_codes.push_back(code);
    m.src.push_back(e.v);
    m.dst.push_back(e.u);
    m.edge_codes.push_back(code);
  }
  return m;
}

std::string to_edge_list_text(const MolGraph& g) {
  std::ostringstream os;
  os << "atoms";
  for (auto z : g.atom_nums) os << ' ' << z;
  os << '\n';
  for (const auto& e : g.edges) os << e.u << ' ' << e.v << ' ' << bond_code_name(e.bond) << '\n';
  return os.str();
}

}  // namespace congfu::chem
