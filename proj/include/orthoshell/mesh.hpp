#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace orthoshell {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

class MeshError : public std::runtime_error {
 public:
  explicit MeshError(const std::string& what, int triangle = -1)
      : std::runtime_error(what), triangle_(triangle) {}
  /// Offending triangle index when the error concerns one, else -1.
  int triangle() const { return triangle_; }

 private:
  int triangle_;
};

struct Edge {
  int a = -1;
  int b = -1;
  bool boundary = false;
};

/// Neighbours of a vertex in counter-clockwise order. For a boundary vertex
/// the list runs from the first to the last boundary neighbour, so it holds
/// one more entry than the vertex has incident triangles.
struct VertexFan {
  std::vector<int> neighbors;
  bool boundary = false;

  int triangle_count() const {
    return boundary ? static_cast<int>(neighbors.size()) - 1 : static_cast<int>(neighbors.size());
  }
};

struct MeshStats {
  std::size_t nodes = 0;
  std::size_t triangles = 0;
  std::size_t edges = 0;
  std::size_t boundary_edges = 0;
  std::size_t boundary_nodes = 0;
  std::size_t dofs = 0;
  /// Histogram of interior vertex valences (index = valence).
  std::vector<std::size_t> interior_valence;
  std::size_t irregular_interior = 0;
};

std::ostream& operator<<(std::ostream& os, const MeshStats& stats);

/// Triangle control mesh of the shell middle surface.
///
/// Construction validates the mesh: node indices in range and distinct per
/// triangle, every edge shared by at most two triangles, consistent winding,
/// and a single fan around every vertex. Violations throw MeshError naming the
/// offending triangle, edge or vertex. Instances are immutable afterwards.
class ControlMesh {
 public:
  ControlMesh() = default;
  ControlMesh(std::vector<Vec3> nodes, std::vector<Triangle> triangles);

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t dof_count() const { return 3 * nodes_.size(); }

  bool is_boundary_node(int node) const { return fans_[node].boundary; }
  const VertexFan& fan(int node) const { return fans_[node]; }
  /// Number of incident edges.
  int valence(int node) const { return static_cast<int>(fans_[node].neighbors.size()); }

  /// Third vertex of the triangle containing the directed edge a->b, or -1.
  int opposite(int a, int b) const;
  /// Triangle containing the directed edge a->b, or -1.
  int triangle_of(int a, int b) const;

  std::size_t boundary_edge_count() const;
  MeshStats stats() const;

 private:
  std::uint64_t key(int a, int b) const {
    return static_cast<std::uint64_t>(a) * nodes_.size() + static_cast<std::uint64_t>(b);
  }
  void validate_and_link();

  std::vector<Vec3> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<VertexFan> fans_;
  std::unordered_map<std::uint64_t, int> directed_;
};

enum class MeshFormat { Off, Obj };

/// Reads an indexed triangle mesh. Parse errors carry the file line number.
ControlMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
ControlMesh load_mesh(const std::filesystem::path& path);  // format from extension
ControlMesh parse_off(std::istream& in, const std::string& origin = "<stream>");
ControlMesh parse_obj(std::istream& in, const std::string& origin = "<stream>");

/// Splits every triangle into four through the edge midpoints of the control
/// polygon. Original nodes keep their indices; edge nodes follow in order of
/// first appearance while scanning triangles.
ControlMesh subdivide_quadrisect(const ControlMesh& mesh);

/// Latitude-longitude hemisphere (z >= 0) from the equator (row 0) up to the
/// rim of a polar hole at `hole_angle_deg` from the pole (row n_meridian).
/// Node (row i, column j) has index i * n_circumference + j; column j sits at
/// azimuth 2*pi*j / n_circumference. Quads are split along the same diagonal.
ControlMesh gen_hemisphere(int n_meridian, int n_circumference, double radius, double hole_angle_deg);

/// Flat structured sheet on [0, lx] x [0, ly] at z = 0. Node (i, j) has index
/// j * (nx + 1) + i.
ControlMesh gen_rect_sheet(int nx, int ny, double lx, double ly);

// ---------------------------------------------------------------------------
// Subdivision patches
// ---------------------------------------------------------------------------

inline constexpr int kGhostNode = -1;

/// Patch slot synthesised by parallelogram completion:
/// x[slot] = x[a] + x[b] - x[c], with a, b, c slots of the same patch.
struct GhostNode {
  int slot = -1;
  int a = -1;
  int b = -1;
  int c = -1;
};

/// Control nodes influencing one element.
///
/// Canonical slot order: the element vertices v1, v2, v3 (counter-clockwise),
/// then the remaining neighbours of v1 counter-clockwise starting after v3,
/// then the three further neighbours of v2, then the two further neighbours of
/// v3. For a regular patch in lattice coordinates with v1 = (0,0),
/// v2 = (1,0), v3 = (1,1) this is
///   (0,0) (1,0) (1,1) (0,1) (-1,0) (-1,-1) (0,-1) (1,-1) (2,0) (2,1) (2,2) (1,2).
/// An irregular patch (one interior vertex of valence n != 6, always placed
/// in slot 0) has n + 6 slots in the same scheme.
struct OneRing {
  int element = -1;
  std::array<int, 3> vertices{};
  std::vector<int> nodes;  // real node per slot or kGhostNode
  int irregular_valence = 0;  // 0 for a regular patch
  std::vector<GhostNode> ghosts;  // in resolution order

  bool regular() const { return irregular_valence == 0; }
  std::size_t size() const { return nodes.size(); }
};

/// Linear map from the distinct real nodes of a patch to its slots.
struct PatchExpansion {
  std::vector<int> real_nodes;
  Eigen::MatrixXd weights;  // slots x real_nodes
};

PatchExpansion expand(const OneRing& ring);

/// Lattice positions of the regular-patch slots (see OneRing).
const std::array<std::array<int, 2>, 12>& regular_slot_lattice();

/// One patch per triangle. Boundary elements receive ghost records. Throws
/// MeshError for an element with more than one irregular vertex, an irregular
/// vertex touching the boundary, or a boundary neighbourhood that does not
/// embed in the triangular lattice.
std::vector<OneRing> build_one_rings(const ControlMesh& mesh);
OneRing build_one_ring(const ControlMesh& mesh, int element);

}  // namespace orthoshell
