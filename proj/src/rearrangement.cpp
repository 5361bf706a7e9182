#include "nlsground/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace nlsground {

RadialField schwartz_rearrange(const RadialField& u) {
  const RadialGrid& g = *u.grid;
  const size_t m = g.points;
  std::vector<double> w(m);
  for (size_t i = 0; i < m; ++i) w[i] = g.surface * std::pow(g.r[i], g.dim - 1) * g.h;

  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(u.values[a]) > std::abs(u.values[b]);
  });

  // Sweep the radius cells and the sorted layers together: cell i reads the
  // layer containing its midpoint cumulative volume.
  RadialField out = make_field(u.grid);
  size_t k = 0;
  double covered = w[order[0]];  // volume covered by layers 0..k
  double below = 0.0;            // volume of cells 0..i-1
  for (size_t i = 0; i < m; ++i) {
    const double sigma = below + 0.5 * w[i];
    while (k + 1 < m && covered < sigma) covered += w[order[++k]];
    out.values[i] = std::abs(u.values[order[k]]);
    below += w[i];
  }
  return out;
}

std::pair<Pair, double> rearrange_and_project(const SystemParams& prm, const Pair& pair) {
  validate_system(prm);
  require_same_grid(pair.u, pair.v);
  Pair star = make_pair(schwartz_rearrange(pair.u), schwartz_rearrange(pair.v));
  const double t = project_fiber(prm, star);  // rejects gradient-free pairs
  return {dilate_pair(star, t), t};
}

}  // namespace nlsground
