// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/moldata.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"
#include "pocketscreen/errors.hpp"

namespace pocketscreen {
namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Fixed-column slice, 1-based inclusive columns as in the PDB format spec.
std::string_view field(const std::string& line, std::size_t first, std::size_t last) {
  if (line.size() < first) return {};
  std::size_t a = first - 1;
  std::size_t b = std::min(last, line.size());
  return std::string_view(line).substr(a, b - a);
}

double parse_coord(const std::string& line, std::size_t first, std::size_t last,
                   int lineno, const char* what) {
  std::string t = trim(field(line, first, last));
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ParseError("line " + std::to_string(lineno) + ": bad " + what +
                     " field '" + t + "'");
  return v;
}

int parse_int_field(const std::string& line, std::size_t first, std::size_t last,
                    int lineno, const char* what) {
  std::string t = trim(field(line, first, last));
  int v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ParseError("line " + std::to_string(lineno) + ": bad " + what +
                     " field '" + t + "'");
  return v;
}

std::string normalize_element(std::string e) {
  if (e.empty()) return "X";
  e[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(e[0])));
  for (std::size_t i = 1; i < e.size(); ++i)
    e[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(e[i])));
  return e;
}

}  // namespace

ProteinStructure parse_protein(const std::string& text, const std::string& id) {
  ProteinStructure s;
  s.id = id;
  std::map<std::pair<char, int>, int> residue_of;  // (chain, seq) -> index

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int models_seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string rec = trim(field(line, 1, 6));
    if (rec == "MODEL") {
      if (++models_seen > 1) break;  // only the first model
      continue;
    }
    if (rec == "ENDMDL") break;
    if (rec == "HETATM") continue;
    if (rec != "ATOM") continue;
    if (line.size() < 54)
      throw ParseError("line " + std::to_string(lineno) + ": truncated ATOM record");

    Atom a;
    a.position.x = parse_coord(line, 31, 38, lineno, "x");
    a.position.y = parse_coord(line, 39, 46, lineno, "y");
    a.position.z = parse_coord(line, 47, 54, lineno, "z");

    std::string elem = trim(field(line, 77, 78));
    if (elem.empty()) {
      // Fall back to the first alphabetic character of the atom name.
      for (char c : field(line, 13, 16)) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
          elem = std::string(1, c);
          break;
        }
      }
    }
    a.element = normalize_element(elem);

    char chain = line.size() >= 22 ? line[21] : ' ';
    int seq = parse_int_field(line, 23, 26, lineno, "residue seq");

    auto key = std::make_pair(chain, seq);
    auto it = residue_of.find(key);
    if (it == residue_of.end()) {
      it = residue_of.emplace(key, static_cast<int>(s.residues.size())).first;
      Residue r;
      r.chain_id = chain;
      r.seq_num = seq;
      s.residues.push_back(r);
    }
    a.residue_index = it->second;
    s.residues[it->second].atom_indices.push_back(static_cast<int>(s.atoms.size()));
    s.atoms.push_back(std::move(a));
  }
  if (s.atoms.empty()) throw DataError("no ATOM records in structure '" + id + "'");
  return s;
}

std::string serialize_protein(const ProteinStructure& s) {
  std::string out;
  out.reserve(s.atoms.size() * 81);
  char buf[96];
  int serial = 0;
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    const Atom& a = s.atoms[i];
    const Residue& r = s.residues[static_cast<std::size_t>(a.residue_index)];
    std::string name = a.element;  // atom names carry no extra information here
    std::string elem = a.element;
    if (elem.size() > 2) elem.resize(2);
    std::snprintf(buf, sizeof buf,
                  "ATOM  %5d %-4s %3s %c%4d    %8.3f%8.3f%8.3f  1.00  0.00"
                  "          %2s\n",
                  ++serial, name.c_str(), "UNK", r.chain_id, r.seq_num,
                  a.position.x, a.position.y, a.position.z, elem.c_str());
    out += buf;
  }
  out += "END\n";
  return out;
}

std::vector<LigandConformer> parse_ligands(const std::string& text) {
  std::vector<LigandConformer> out;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("id") || !j.contains("elements") || !j.contains("coords"))
      throw ParseError("line " + std::to_string(lineno) +
                       ": ligand record needs id/elements/coords");
    LigandConformer lig;
    lig.id = j.at("id").get<std::string>();
    if (seen.count(lig.id)) throw DataError("duplicate ligand id: " + lig.id);
    seen[lig.id] = true;

    const auto& elems = j.at("elements");
    const auto& coords = j.at("coords");
    if (elems.size() != coords.size())
      throw DataError(lig.id + ": length mismatch");
    if (elems.empty()) throw DataError(lig.id + ": empty ligand");
    for (std::size_t i = 0; i < elems.size(); ++i) {
      Atom a;
      a.element = normalize_element(elems[i].get<std::string>());
      const auto& c = coords[i];
      if (c.size() != 3) throw DataError(lig.id + ": coords must be 3-vectors");
      a.position = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
      lig.atoms.push_back(std::move(a));
    }
    if (j.contains("label")) {
      std::string l = j.at("label").get<std::string>();
      if (l == "active")
        lig.activity_label = ActivityLabel::active;
      else if (l == "decoy")
        lig.activity_label = ActivityLabel::decoy;
      else
        throw DataError(lig.id + ": unknown label '" + l + "'");
    }
    out.push_back(std::move(lig));
  }
  return out;
}

std::string serialize_ligands(const std::vector<LigandConformer>& ligands) {
  std::string out;
  for (const auto& lig : ligands) {
    nlohmann::json j;
    j["id"] = lig.id;
    auto& elems = j["elements"] = nlohmann::json::array();
    auto& coords = j["coords"] = nlohmann::json::array();
    for (const Atom& a : lig.atoms) {
      elems.push_back(a.element);
      coords.push_back({a.position.x, a.position.y, a.position.z});
    }
    if (lig.activity_label == ActivityLabel::active) j["label"] = "active";
    if (lig.activity_label == ActivityLabel::decoy) j["label"] = "decoy";
    out += j.dump();
    out += '\n';
  }
  return out;
}

Vec3 centroid(std::span<const Atom> atoms) {
  if (atoms.empty()) throw DataError("centroid of empty atom list");
  Vec3 c;
  for (const Atom& a : atoms) c += a.position;
  return c * (1.0 / static_cast<double>(atoms.size()));
}

Coords3 pack_coords(std::span<const Atom> atoms) {
  Coords3 c;
  c.reserve(atoms.size());
  for (const Atom& a : atoms) c.push(a.position);
  return c;
}

}  // namespace pocketscreen
