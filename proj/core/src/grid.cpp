#include "lodwave/grid.hpp"

#include <algorithm>
#include <string>

#include "lodwave/error.hpp"

namespace lodwave {

MeshLevel::MeshLevel(int exponent) : exponent_(exponent), n_(0) {
  if (exponent < 0 || exponent > kMaxExponent) {
    throw BoundsError("mesh exponent " + std::to_string(exponent) + " outside [0, " +
                      std::to_string(kMaxExponent) + "]");
  }
  n_ = 1 << exponent;
}

std::array<int, 4> MeshLevel::element_nodes(int element) const noexcept {
  const int ex = element % n_;
  const int ey = element / n_;
  const int base = node_id(ex, ey);
  return {base, base + 1, base + n_ + 1, base + n_ + 2};
}

std::vector<int> MeshLevel::interior_nodes() const {
  std::vector<int> nodes;
  nodes.reserve(static_cast<std::size_t>(num_interior()));
  for (int iy = 1; iy < n_; ++iy) {
    for (int ix = 1; ix < n_; ++ix) nodes.push_back(node_id(ix, iy));
  }
  return nodes;
}

MeshLevel build_level(int k) { return MeshLevel(k); }

namespace {

void check_element(const MeshLevel& mesh, int element) {
  if (element < 0 || element >= mesh.num_elements()) {
    throw BoundsError("element " + std::to_string(element) + " outside mesh level " +
                      std::to_string(mesh.exponent()));
  }
}

}  // namespace

PatchIndexSet element_patch(const MeshLevel& mesh, int element, int ell) {
  check_element(mesh, element);
  if (ell < 1) throw BoundsError("patch order must be >= 1, got " + std::to_string(ell));

  const int n = mesh.elems_per_axis();
  const int ex = element % n;
  const int ey = element / n;
  PatchIndexSet patch;
  patch.center = element;
  patch.order = ell;
  // Clamp before adding so that huge ell cannot overflow.
  const int reach = std::min(ell, n);
  patch.box = {std::max(0, ex - reach), std::min(n - 1, ex + reach), std::max(0, ey - reach),
               std::min(n - 1, ey + reach)};
  patch.elements.reserve(static_cast<std::size_t>(patch.box.width() * patch.box.height()));
  for (int y = patch.box.y0; y <= patch.box.y1; ++y) {
    for (int x = patch.box.x0; x <= patch.box.x1; ++x) patch.elements.push_back(mesh.element_id(x, y));
  }
  return patch;
}

std::vector<int> fine_dofs_in_box(const MeshLevel& coarse, const ElementBox& box,
                                  const MeshLevel& fine) {
  if (fine.exponent() < coarse.exponent()) {
    throw NestingError("fine level " + std::to_string(fine.exponent()) +
                       " is coarser than level " + std::to_string(coarse.exponent()));
  }
  const int r = 1 << (fine.exponent() - coarse.exponent());
  std::vector<int> dofs;
  dofs.reserve(static_cast<std::size_t>((box.width() * r - 1) * (box.height() * r - 1)));
  for (int iy = box.y0 * r + 1; iy < (box.y1 + 1) * r; ++iy) {
    for (int ix = box.x0 * r + 1; ix < (box.x1 + 1) * r; ++ix) dofs.push_back(fine.dof(ix, iy));
  }
  return dofs;
}

PatchIndexSet element_patch(const MeshLevel& mesh, int element, int ell, const MeshLevel& fine) {
  PatchIndexSet patch = element_patch(mesh, element, ell);
  patch.fine_dofs = fine_dofs_in_box(mesh, patch.box, fine);
  return patch;
}

std::vector<std::vector<int>> refine_map(const MeshLevel& coarse, const MeshLevel& fine) {
  if (fine.exponent() <= coarse.exponent()) {
    throw NestingError("refine_map needs a strictly finer level (coarse " +
                       std::to_string(coarse.exponent()) + ", fine " +
                       std::to_string(fine.exponent()) + ")");
  }
  const int r = 1 << (fine.exponent() - coarse.exponent());
  const int nc = coarse.elems_per_axis();
  std::vector<std::vector<int>> map(static_cast<std::size_t>(coarse.num_elements()));
  for (int ey = 0; ey < nc; ++ey) {
    for (int ex = 0; ex < nc; ++ex) {
      auto& children = map[static_cast<std::size_t>(coarse.element_id(ex, ey))];
      children.reserve(static_cast<std::size_t>(r * r));
      for (int fy = ey * r; fy < (ey + 1) * r; ++fy) {
        for (int fx = ex * r; fx < (ex + 1) * r; ++fx) children.push_back(fine.element_id(fx, fy));
      }
    }
  }
  return map;
}

}  // namespace lodwave
