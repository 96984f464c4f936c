#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace xysim {

// Rectangular site graph. Site ids are row-major: id = x + y*lx.
struct Lattice {
  int lx = 0;
  int ly = 0;
  std::vector<std::array<int, 2>> sites;            // (x, y) per id
  std::vector<std::array<int, 2>> bonds;            // nearest-neighbor pairs, i < j
  std::vector<std::array<int, 4>> plaquettes;       // counterclockwise from lower-left
  std::vector<std::array<int, 3>> triples;          // connected paths (i, j, k), i < k
  std::vector<int> sublattice_parity;               // (-1)^(x+y)

  int n_sites() const { return lx * ly; }
  int n_bonds() const { return static_cast<int>(bonds.size()); }
  int n_plaquettes() const { return static_cast<int>(plaquettes.size()); }
  int site_id(int x, int y) const { return x + y * lx; }
  bool adjacent(int i, int j) const;
};

std::shared_ptr<const Lattice> build_rect_lattice(int lx, int ly);

}  // namespace xysim
