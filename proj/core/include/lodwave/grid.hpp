#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace lodwave {

/// Structured dyadic mesh of the unit square with 2^k x 2^k square elements.
///
/// Nodes and elements are numbered row-major from the bottom-left corner:
/// node (ix, iy) has id iy * (n + 1) + ix, element (ex, ey) has id ey * n + ex.
/// Interior nodes additionally carry a dof index (iy - 1) * (n - 1) + (ix - 1),
/// which is the ordering of every vector and matrix in the library.
///
/// Connectivity is computed on the fly; nothing proportional to the mesh size
/// is stored.
class MeshLevel {
 public:
  static constexpr int kMaxExponent = 14;

  explicit MeshLevel(int exponent);

  int exponent() const noexcept { return exponent_; }
  int elems_per_axis() const noexcept { return n_; }
  int nodes_per_axis() const noexcept { return n_ + 1; }
  int interior_per_axis() const noexcept { return n_ - 1; }
  double width() const noexcept { return 1.0 / n_; }

  std::int64_t num_nodes() const noexcept {
    return static_cast<std::int64_t>(n_ + 1) * (n_ + 1);
  }
  std::int64_t num_elements() const noexcept { return static_cast<std::int64_t>(n_) * n_; }
  int num_interior() const noexcept { return (n_ - 1) * (n_ - 1); }

  int node_id(int ix, int iy) const noexcept { return iy * (n_ + 1) + ix; }
  int element_id(int ex, int ey) const noexcept { return ey * n_ + ex; }

  bool is_boundary(int ix, int iy) const noexcept {
    return ix == 0 || iy == 0 || ix == n_ || iy == n_;
  }
  bool is_boundary_node(int node) const noexcept {
    return is_boundary(node % (n_ + 1), node / (n_ + 1));
  }

  /// Interior dof index of node (ix, iy), or -1 on the boundary.
  int dof(int ix, int iy) const noexcept {
    return is_boundary(ix, iy) ? -1 : (iy - 1) * (n_ - 1) + (ix - 1);
  }
  int dof_of_node(int node) const noexcept { return dof(node % (n_ + 1), node / (n_ + 1)); }
  /// Node coordinates (ix, iy) of an interior dof.
  std::array<int, 2> dof_coords(int dof) const noexcept {
    return {dof % (n_ - 1) + 1, dof / (n_ - 1) + 1};
  }
  int node_of_dof(int dof) const noexcept {
    const auto [ix, iy] = dof_coords(dof);
    return node_id(ix, iy);
  }

  /// Vertices of an element in lexicographic order:
  /// (0,0), (1,0), (0,1), (1,1) relative to its lower-left corner.
  std::array<int, 4> element_nodes(int element) const noexcept;

  /// Interior node ids in dof order.
  std::vector<int> interior_nodes() const;

  friend bool operator==(const MeshLevel& a, const MeshLevel& b) noexcept {
    return a.exponent_ == b.exponent_;
  }

 private:
  int exponent_;
  int n_;
};

/// Builds the level-k mesh; throws BoundsError outside [0, 14].
MeshLevel build_level(int k);

/// Closed box of element indices [x0, x1] x [y0, y1].
struct ElementBox {
  int x0 = 0;
  int x1 = 0;
  int y0 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0 + 1; }
  int height() const noexcept { return y1 - y0 + 1; }
  bool contains(int ex, int ey) const noexcept {
    return ex >= x0 && ex <= x1 && ey >= y0 && ey <= y1;
  }
  friend auto operator<=>(const ElementBox&, const ElementBox&) = default;
};

/// Order-ell element neighbourhood N^ell(e).
struct PatchIndexSet {
  int center = 0;
  int order = 1;
  ElementBox box;
  std::vector<int> elements;   ///< row-major
  std::vector<int> fine_dofs;  ///< interior fine dofs strictly inside the patch, if requested
};

/// Patch of order ell >= 1 around element e. On the tensor mesh this is the
/// set of elements within Chebyshev index distance ell, clipped to the domain.
PatchIndexSet element_patch(const MeshLevel& mesh, int element, int ell);

/// Same as element_patch, also listing the fine interior dofs whose support
/// lies inside the patch (i.e. fine nodes strictly inside the patch region).
PatchIndexSet element_patch(const MeshLevel& mesh, int element, int ell, const MeshLevel& fine);

/// Interior fine dofs strictly inside the region covered by a coarse box.
std::vector<int> fine_dofs_in_box(const MeshLevel& coarse, const ElementBox& box,
                                  const MeshLevel& fine);

/// For every coarse element, the 4^(fine.k - coarse.k) fine elements it contains,
/// row-major within the coarse element. Throws NestingError unless fine is strictly finer.
std::vector<std::vector<int>> refine_map(const MeshLevel& coarse, const MeshLevel& fine);

}  // namespace lodwave
