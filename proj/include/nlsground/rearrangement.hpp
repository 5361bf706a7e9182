#pragma once
// Radially nonincreasing (Schwartz) rearrangement on the radial grid, and the
// rearrange-then-reproject step used to symmetrize minimizing iterates.

#include <utility>

#include "nlsground/energy.hpp"
#include "nlsground/radial.hpp"

namespace nlsground {

// Equimeasurable radially nonincreasing rearrangement of |u|. Cell i carries
// volume w_i = surface * r_i^{N-1} * h; the sorted values are laid out from
// the origin in cumulative-volume coordinate and each cell reads the layer at
// its midpoint volume. Values of the output are values of |u|; nonincreasing
// inputs (up to sign) are reproduced exactly, so the operator is idempotent.
RadialField schwartz_rearrange(const RadialField& u);

// Rearrange both components and reproject onto the constraint manifold.
// For a pair on the manifold the projection parameter t is at most 1 (up to
// discretization) and the energy does not increase. Returns ([t*u*, t*v*], t).
// A pair without gradient content cannot be projected and is rejected.
std::pair<Pair, double> rearrange_and_project(const SystemParams& prm, const Pair& pair);

}  // namespace nlsground
