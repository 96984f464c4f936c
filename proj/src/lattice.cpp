#include "xysim/lattice.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace xysim {

bool Lattice::adjacent(int i, int j) const {
  const int dx = std::abs(sites[i][0] - sites[j][0]);
  const int dy = std::abs(sites[i][1] - sites[j][1]);
  return dx + dy == 1;
}

std::shared_ptr<const Lattice> build_rect_lattice(int lx, int ly) {
  if (lx < 1 || ly < 1)
    throw std::invalid_argument("build_rect_lattice: dimensions must be positive, got " +
                                std::to_string(lx) + "x" + std::to_string(ly));
  if (lx * ly > 64)
    throw std::invalid_argument("build_rect_lattice: " + std::to_string(lx * ly) +
                                " sites exceed the 64-site machine-word limit");
  auto lat = std::make_shared<Lattice>();
  lat->lx = lx;
  lat->ly = ly;
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      lat->sites.push_back({x, y});
      lat->sublattice_parity.push_back(((x + y) % 2 == 0) ? 1 : -1);
    }
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      const int id = lat->site_id(x, y);
      if (x + 1 < lx) lat->bonds.push_back({id, lat->site_id(x + 1, y)});
      if (y + 1 < ly) lat->bonds.push_back({id, lat->site_id(x, y + 1)});
    }
  // Counterclockwise from the lower-left corner keeps vorticity signs
  // consistent across plaquettes.
  for (int y = 0; y + 1 < ly; ++y)
    for (int x = 0; x + 1 < lx; ++x)
      lat->plaquettes.push_back({lat->site_id(x, y), lat->site_id(x + 1, y),
                                 lat->site_id(x + 1, y + 1), lat->site_id(x, y + 1)});
  // Connected length-2 paths stored once with endpoints ordered i < k; the
  // reversed path is implied.
  for (int j = 0; j < lat->n_sites(); ++j) {
    std::vector<int> nb;
    const int x = lat->sites[j][0], y = lat->sites[j][1];
    if (x > 0) nb.push_back(lat->site_id(x - 1, y));
    if (x + 1 < lx) nb.push_back(lat->site_id(x + 1, y));
    if (y > 0) nb.push_back(lat->site_id(x, y - 1));
    if (y + 1 < ly) nb.push_back(lat->site_id(x, y + 1));
    for (size_t a = 0; a < nb.size(); ++a)
      for (size_t b = a + 1; b < nb.size(); ++b) {
        const int i = std::min(nb[a], nb[b]);
        const int k = std::max(nb[a], nb[b]);
        lat->triples.push_back({i, j, k});
      }
  }
  return lat;
}

}  // namespace xysim
