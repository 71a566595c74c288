#include "orthoshell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace orthoshell {

namespace {

std::string tri_name(int t) { return "triangle " + std::to_string(t); }

std::string edge_name(int a, int b) {
  return "edge (" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

}  // namespace

ControlMesh::ControlMesh(std::vector<Vec3> nodes, std::vector<Triangle> triangles)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  validate_and_link();
}

void ControlMesh::validate_and_link() {
  const int n = static_cast<int>(nodes_.size());
  if (triangles_.empty()) throw MeshError("mesh has no triangles");

  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= n)
        throw MeshError(tri_name(static_cast<int>(t)) + ": node index " + std::to_string(tri[k]) +
                            " out of range [0, " + std::to_string(n) + ")",
                        static_cast<int>(t));
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError(tri_name(static_cast<int>(t)) + ": repeated node index", static_cast<int>(t));
    for (int k = 0; k < 3; ++k) {
      if (!nodes_[tri[k]].allFinite())
        throw MeshError("node " + std::to_string(tri[k]) + ": non-finite coordinate");
    }
  }

  // Undirected usage first so that a triple edge is reported as such rather
  // than as an orientation clash.
  std::map<std::pair<int, int>, std::vector<int>> undirected;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      undirected[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(t));
    }
  }
  for (const auto& [e, users] : undirected) {
    if (users.size() > 2)
      throw MeshError("non-manifold " + edge_name(e.first, e.second) + ": shared by " +
                          std::to_string(users.size()) + " triangles",
                      users[2]);
  }

  directed_.clear();
  directed_.reserve(triangles_.size() * 3);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      auto [it, fresh] = directed_.emplace(key(a, b), static_cast<int>(t));
      if (!fresh)
        throw MeshError("inconsistent orientation at " + edge_name(a, b) + ": triangles " +
                            std::to_string(it->second) + " and " + std::to_string(t) +
                            " traverse it in the same direction",
                        static_cast<int>(t));
    }
  }

  // Edges in order of first appearance.
  edges_.clear();
  {
    std::map<std::pair<int, int>, bool> seen;
    for (const auto& tri : triangles_) {
      for (int k = 0; k < 3; ++k) {
        int a = tri[k], b = tri[(k + 1) % 3];
        auto id = std::make_pair(std::min(a, b), std::max(a, b));
        if (seen.emplace(id, true).second) {
          bool boundary = undirected[id].size() == 1;
          edges_.push_back({a, b, boundary});
        }
      }
    }
  }

  // Vertex fans. Around vertex v every incident triangle (v, a, b) contributes
  // the counter-clockwise step a -> b.
  std::vector<std::vector<std::pair<int, int>>> steps(n);
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) steps[tri[k]].emplace_back(tri[(k + 1) % 3], tri[(k + 2) % 3]);
  }
  fans_.assign(n, {});
  for (int v = 0; v < n; ++v) {
    const auto& s = steps[v];
    if (s.empty()) throw MeshError("node " + std::to_string(v) + " is not used by any triangle");
    std::unordered_map<int, int> next;
    std::unordered_map<int, int> incoming;
    for (auto [a, b] : s) {
      next[a] = b;
      ++incoming[b];
    }
    std::vector<int> starts;
    for (auto [a, b] : s) {
      if (!incoming.count(a)) starts.push_back(a);
    }
    VertexFan fan;
    int start;
    if (starts.empty()) {
      start = std::min_element(s.begin(), s.end())->first;
    } else if (starts.size() == 1) {
      start = starts.front();
      fan.boundary = true;
    } else {
      throw MeshError("non-manifold vertex " + std::to_string(v) + ": " + std::to_string(starts.size()) +
                      " separate triangle fans");
    }
    int cur = start;
    fan.neighbors.push_back(cur);
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto it = next.find(cur);
      if (it == next.end()) break;
      cur = it->second;
      if (cur == start) break;
      fan.neighbors.push_back(cur);
    }
    if (fan.triangle_count() != static_cast<int>(s.size()))
      throw MeshError("non-manifold vertex " + std::to_string(v) + ": triangles form more than one fan");
    fans_[v] = std::move(fan);
  }
}

int ControlMesh::triangle_of(int a, int b) const {
  if (a < 0 || b < 0 || a >= static_cast<int>(nodes_.size()) || b >= static_cast<int>(nodes_.size())) return -1;
  auto it = directed_.find(key(a, b));
  return it == directed_.end() ? -1 : it->second;
}

int ControlMesh::opposite(int a, int b) const {
  int t = triangle_of(a, b);
  if (t < 0) return -1;
  const auto& tri = triangles_[t];
  for (int k = 0; k < 3; ++k) {
    if (tri[k] != a && tri[k] != b) return tri[k];
  }
  return -1;
}

std::size_t ControlMesh::boundary_edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.boundary; }));
}

MeshStats ControlMesh::stats() const {
  MeshStats st;
  st.nodes = nodes_.size();
  st.triangles = triangles_.size();
  st.edges = edges_.size();
  st.boundary_edges = boundary_edge_count();
  st.dofs = dof_count();
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (fans_[v].boundary) {
      ++st.boundary_nodes;
      continue;
    }
    auto val = static_cast<std::size_t>(valence(static_cast<int>(v)));
    if (st.interior_valence.size() <= val) st.interior_valence.resize(val + 1, 0);
    ++st.interior_valence[val];
    if (val != 6) ++st.irregular_interior;
  }
  return st;
}

std::ostream& operator<<(std::ostream& os, const MeshStats& st) {
  os << "nodes            " << st.nodes << '\n'
     << "triangles        " << st.triangles << '\n'
     << "edges            " << st.edges << '\n'
     << "boundary edges   " << st.boundary_edges << '\n'
     << "boundary nodes   " << st.boundary_nodes << '\n'
     << "dofs             " << st.dofs << '\n'
     << "irregular nodes  " << st.irregular_interior << '\n'
     << "interior valence";
  bool any = false;
  for (std::size_t v = 0; v < st.interior_valence.size(); ++v) {
    if (st.interior_valence[v] == 0) continue;
    os << ' ' << v << ':' << st.interior_valence[v];
    any = true;
  }
  if (!any) os << " -";
  return os << '\n';
}

// ---------------------------------------------------------------------------
// Import
// ---------------------------------------------------------------------------

namespace {

struct RawMesh {
  std::vector<Vec3> nodes;
  std::vector<Triangle> triangles;
  std::vector<int> face_lines;
};

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& msg) {
  throw MeshError(origin + ":" + std::to_string(line) + ": " + msg);
}

ControlMesh finish(RawMesh raw, const std::string& origin) {
  try {
    return ControlMesh(std::move(raw.nodes), std::move(raw.triangles));
  } catch (const MeshError& e) {
    if (e.triangle() >= 0 && e.triangle() < static_cast<int>(raw.face_lines.size()))
      parse_fail(origin, raw.face_lines[e.triangle()], e.what());
    throw MeshError(origin + ": " + e.what());
  }
}

// Strips comments and returns false for blank lines.
bool content(std::string& line) {
  auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  return line.find_first_not_of(" \t\r") != std::string::npos;
}

}  // namespace

ControlMesh parse_off(std::istream& in, const std::string& origin) {
  RawMesh raw;
  std::string line;
  int lineno = 0;
  enum { Header, Counts, Vertices, Faces, Done } stage = Header;
  long nv = 0, nf = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!content(line)) continue;
    std::istringstream ss(line);
    if (stage == Header) {
      std::string tag;
      ss >> tag;
      if (tag != "OFF") parse_fail(origin, lineno, "expected OFF header, got '" + tag + "'");
      stage = Counts;
      // Counts may share the header line.
      if ((ss >> std::ws).eof()) continue;
    }
    if (stage == Counts) {
      long ne = 0;
      if (!(ss >> nv >> nf)) parse_fail(origin, lineno, "expected vertex and face counts");
      ss >> ne;
      if (nv <= 0 || nf <= 0) parse_fail(origin, lineno, "vertex and face counts must be positive");
      stage = Vertices;
      continue;
    }
    if (stage == Vertices) {
      double x, y, z;
      if (!(ss >> x >> y >> z)) parse_fail(origin, lineno, "expected three vertex coordinates");
      raw.nodes.emplace_back(x, y, z);
      if (static_cast<long>(raw.nodes.size()) == nv) stage = Faces;
      continue;
    }
    if (stage == Faces) {
      int k;
      if (!(ss >> k)) parse_fail(origin, lineno, "expected face vertex count");
      if (k != 3) parse_fail(origin, lineno, "only triangular faces are supported (got " + std::to_string(k) + ")");
      Triangle t;
      if (!(ss >> t[0] >> t[1] >> t[2])) parse_fail(origin, lineno, "expected three face indices");
      raw.triangles.push_back(t);
      raw.face_lines.push_back(lineno);
      if (static_cast<long>(raw.triangles.size()) == nf) stage = Done;
      continue;
    }
    parse_fail(origin, lineno, "unexpected data after the last face");
  }
  if (stage != Done) parse_fail(origin, lineno, "unexpected end of file");
  return finish(std::move(raw), origin);
}

ControlMesh parse_obj(std::istream& in, const std::string& origin) {
  RawMesh raw;
  std::string line;
  int lineno = 0;
  std::vector<std::pair<Triangle, int>> pending;
  while (std::getline(in, line)) {
    ++lineno;
    if (!content(line)) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) parse_fail(origin, lineno, "expected three vertex coordinates");
      raw.nodes.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> ids;
      std::string tok;
      while (ss >> tok) {
        auto slash = tok.find('/');
        std::string head = tok.substr(0, slash);
        int id;
        try {
          std::size_t used = 0;
          id = std::stoi(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          parse_fail(origin, lineno, "bad face index '" + tok + "'");
        }
        if (id == 0) parse_fail(origin, lineno, "face index 0 is invalid (indices are 1-based)");
        // Negative indices count back from the most recent vertex.
        ids.push_back(id > 0 ? id - 1 : static_cast<int>(raw.nodes.size()) + id);
      }
      if (ids.size() != 3)
        parse_fail(origin, lineno, "only triangular faces are supported (got " + std::to_string(ids.size()) + ")");
      raw.triangles.push_back({ids[0], ids[1], ids[2]});
      raw.face_lines.push_back(lineno);
    } else if (tag == "vn" || tag == "vt" || tag == "vp" || tag == "o" || tag == "g" || tag == "s" ||
               tag == "usemtl" || tag == "mtllib") {
      continue;
    } else {
      parse_fail(origin, lineno, "unsupported OBJ statement '" + tag + "'");
    }
  }
  if (raw.triangles.empty()) parse_fail(origin, lineno, "no faces");
  return finish(std::move(raw), origin);
}

ControlMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  return format == MeshFormat::Off ? parse_off(in, path.string()) : parse_obj(in, path.string());
}

ControlMesh load_mesh(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return load_mesh(path, MeshFormat::Off);
  if (ext == ".obj") return load_mesh(path, MeshFormat::Obj);
  throw MeshError("unknown mesh format for " + path.string() + " (expected .off or .obj)");
}

// ---------------------------------------------------------------------------
// Refinement and generators
// ---------------------------------------------------------------------------

ControlMesh subdivide_quadrisect(const ControlMesh& mesh) {
  std::vector<Vec3> nodes = mesh.nodes();
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    auto id = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = mid.find(id);
    if (it != mid.end()) return it->second;
    int m = static_cast<int>(nodes.size());
    nodes.push_back(0.5 * (mesh.nodes()[a] + mesh.nodes()[b]));
    mid.emplace(id, m);
    return m;
  };
  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.triangle_count());
  for (const auto& t : mesh.triangles()) {
    int ab = midpoint(t[0], t[1]);
    int bc = midpoint(t[1], t[2]);
    int ca = midpoint(t[2], t[0]);
    tris.push_back({t[0], ab, ca});
    tris.push_back({ab, t[1], bc});
    tris.push_back({ca, bc, t[2]});
    tris.push_back({ab, bc, ca});
  }
  return ControlMesh(std::move(nodes), std::move(tris));
}

ControlMesh gen_hemisphere(int n_meridian, int n_circumference, double radius, double hole_angle_deg) {
  if (n_meridian < 2) throw MeshError("hemisphere needs at least 2 meridional divisions");
  if (n_circumference < 8) throw MeshError("hemisphere needs at least 8 circumferential divisions");
  if (!(radius > 0)) throw MeshError("hemisphere radius must be positive");
  if (!(hole_angle_deg > 0 && hole_angle_deg < 90)) throw MeshError("hole angle must lie in (0, 90) degrees");

  const double deg = std::numbers::pi / 180.0;
  std::vector<Vec3> nodes;
  nodes.reserve(static_cast<std::size_t>(n_meridian + 1) * n_circumference);
  for (int i = 0; i <= n_meridian; ++i) {
    double polar = (hole_angle_deg + (90.0 - hole_angle_deg) * (n_meridian - i) / n_meridian) * deg;
    double r = radius * std::sin(polar);
    double z = i == 0 ? 0.0 : radius * std::cos(polar);
    for (int j = 0; j < n_circumference; ++j) {
      double phi = 2.0 * std::numbers::pi * j / n_circumference;
      nodes.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  auto id = [&](int i, int j) { return i * n_circumference + (j % n_circumference); };
  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(n_meridian) * n_circumference);
  for (int i = 0; i < n_meridian; ++i) {
    for (int j = 0; j < n_circumference; ++j) {
      tris.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
    }
  }
  return ControlMesh(std::move(nodes), std::move(tris));
}

ControlMesh gen_rect_sheet(int nx, int ny, double lx, double ly) {
  if (nx < 2 || ny < 2) throw MeshError("sheet needs at least 2 divisions per direction");
  if (!(lx > 0 && ly > 0)) throw MeshError("sheet dimensions must be positive");
  std::vector<Vec3> nodes;
  nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) nodes.emplace_back(lx * i / nx, ly * j / ny, 0.0);
  }
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return ControlMesh(std::move(nodes), std::move(tris));
}

// ---------------------------------------------------------------------------
// Patches
// ---------------------------------------------------------------------------

namespace {

using Lattice = std::array<int, 2>;

constexpr std::array<Lattice, 6> kDirs{{{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}}};

const std::array<Lattice, 12> kSlots{{{0, 0},
                                      {1, 0},
                                      {1, 1},
                                      {0, 1},
                                      {-1, 0},
                                      {-1, -1},
                                      {0, -1},
                                      {1, -1},
                                      {2, 0},
                                      {2, 1},
                                      {2, 2},
                                      {1, 2}}};

int dir_index(Lattice d) {
  for (int k = 0; k < 6; ++k) {
    if (kDirs[k] == d) return k;
  }
  return -1;
}

int slot_index(Lattice p) {
  for (int s = 0; s < 12; ++s) {
    if (kSlots[s] == p) return s;
  }
  return -1;
}

bool irregular(const ControlMesh& mesh, int v) { return !mesh.is_boundary_node(v) && mesh.valence(v) != 6; }

std::string element_name(int e) { return "element " + std::to_string(e); }

// Places the fan of a vertex at lattice position `at`, anchored by one
// neighbour whose position is already known.
void unfold_fan(const ControlMesh& mesh, int element, int v, Lattice at, std::array<int, 12>& slot_node) {
  const auto& fan = mesh.fan(v);
  if (!fan.boundary && fan.neighbors.size() != 6)
    throw MeshError(element_name(element) + ": interior vertex " + std::to_string(v) + " has valence " +
                    std::to_string(fan.neighbors.size()) + " in a regular patch");
  if (fan.boundary && fan.triangle_count() > 5)
    throw MeshError(element_name(element) + ": boundary vertex " + std::to_string(v) + " has " +
                    std::to_string(fan.triangle_count()) + " triangles and does not embed in the lattice");
  int anchor = -1, anchor_dir = -1;
  for (std::size_t i = 0; i < fan.neighbors.size() && anchor < 0; ++i) {
    for (int s = 0; s < 12; ++s) {
      if (slot_node[s] != fan.neighbors[i]) continue;
      int d = dir_index({kSlots[s][0] - at[0], kSlots[s][1] - at[1]});
      if (d >= 0) {
        anchor = static_cast<int>(i);
        anchor_dir = d;
        break;
      }
    }
  }
  if (anchor < 0) throw MeshError(element_name(element) + ": cannot anchor the fan of vertex " + std::to_string(v));
  for (std::size_t i = 0; i < fan.neighbors.size(); ++i) {
    int d = ((anchor_dir + static_cast<int>(i) - anchor) % 6 + 6) % 6;
    Lattice p{at[0] + kDirs[d][0], at[1] + kDirs[d][1]};
    int s = slot_index(p);
    if (s < 0) throw MeshError(element_name(element) + ": fan leaves the patch");
    int node = fan.neighbors[i];
    if (slot_node[s] == kGhostNode) {
      for (int o = 0; o < 12; ++o) {
        if (slot_node[o] == node)
          throw MeshError(element_name(element) + ": node " + std::to_string(node) +
                          " occupies two patch positions (neighbourhood does not embed in the lattice)");
      }
      slot_node[s] = node;
    } else if (slot_node[s] != node) {
      throw MeshError(element_name(element) + ": conflicting nodes " + std::to_string(slot_node[s]) + " and " +
                      std::to_string(node) + " at one patch position");
    }
  }
}

OneRing regular_ring(const ControlMesh& mesh, int element) {
  const auto& tri = mesh.triangles()[element];
  OneRing ring;
  ring.element = element;
  ring.vertices = tri;
  std::array<int, 12> slot_node;
  slot_node.fill(kGhostNode);
  slot_node[0] = tri[0];
  slot_node[1] = tri[1];
  slot_node[2] = tri[2];
  for (int k = 0; k < 3; ++k) unfold_fan(mesh, element, tri[k], kSlots[k], slot_node);
  ring.nodes.assign(slot_node.begin(), slot_node.end());

  std::array<bool, 12> known{};
  for (int s = 0; s < 12; ++s) known[s] = slot_node[s] != kGhostNode;
  // First pass completes from real nodes only; later passes may chain ghosts
  // (needed at convex corners).
  for (int pass = 0;; ++pass) {
    std::array<bool, 12> real = known;
    bool missing = false, progress = false;
    for (int s = 0; s < 12; ++s) {
      if (known[s]) continue;
      const Lattice p = kSlots[s];
      bool done = false;
      for (int k = 0; k < 6 && !done; ++k) {
        Lattice a{p[0] + kDirs[k][0], p[1] + kDirs[k][1]};
        Lattice b{p[0] + kDirs[(k + 1) % 6][0], p[1] + kDirs[(k + 1) % 6][1]};
        Lattice c{a[0] + b[0] - p[0], a[1] + b[1] - p[1]};
        int sa = slot_index(a), sb = slot_index(b), sc = slot_index(c);
        if (sa < 0 || sb < 0 || sc < 0) continue;
        const auto& pool = pass == 0 ? real : known;
        if (!(pool[sa] && pool[sb] && pool[sc])) continue;
        ring.ghosts.push_back({s, sa, sb, sc});
        known[s] = true;
        done = progress = true;
      }
      if (!done) missing = true;
    }
    if (!missing) break;
    if (!progress && pass > 0)
      throw MeshError(element_name(element) + ": boundary neighbourhood too small to complete the patch");
  }
  return ring;
}

OneRing irregular_ring(const ControlMesh& mesh, int element, int rot) {
  const auto& tri = mesh.triangles()[element];
  const int v1 = tri[rot], v2 = tri[(rot + 1) % 3], v3 = tri[(rot + 2) % 3];
  for (int v : {v2, v3}) {
    if (mesh.is_boundary_node(v))
      throw MeshError(element_name(element) + ": irregular vertex " + std::to_string(v1) +
                      " shares an element with boundary vertex " + std::to_string(v) + "; refine the mesh first");
  }
  const auto& f1 = mesh.fan(v1).neighbors;
  const int n = static_cast<int>(f1.size());
  auto rotated = [](const std::vector<int>& fan, int first) {
    auto it = std::find(fan.begin(), fan.end(), first);
    std::vector<int> out(fan.size());
    std::rotate_copy(fan.begin(), it, fan.end(), out.begin());
    return out;
  };
  auto r1 = rotated(f1, v2);
  auto r2 = rotated(mesh.fan(v2).neighbors, v3);
  auto r3 = rotated(mesh.fan(v3).neighbors, v1);
  if (r1[1] != v3 || r2[1] != v1 || r3[1] != v2)
    throw MeshError(element_name(element) + ": inconsistent vertex fans");

  OneRing ring;
  ring.element = element;
  ring.vertices = {v1, v2, v3};
  ring.irregular_valence = n;
  ring.nodes = {v1, v2, v3};
  for (int k = 2; k < n; ++k) ring.nodes.push_back(r1[k]);
  for (int k = 3; k < 6; ++k) ring.nodes.push_back(r2[k]);
  ring.nodes.push_back(r3[3]);
  ring.nodes.push_back(r3[4]);
  if (r2[2] != r1[n - 1] || r3[2] != r2[5] || r3[5] != r1[2])
    throw MeshError(element_name(element) + ": patch around irregular vertex " + std::to_string(v1) +
                    " is not closed");
  auto sorted = ring.nodes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw MeshError(element_name(element) + ": patch around irregular vertex " + std::to_string(v1) +
                    " repeats a node; refine the mesh first");
  return ring;
}

}  // namespace

const std::array<std::array<int, 2>, 12>& regular_slot_lattice() { return kSlots; }

OneRing build_one_ring(const ControlMesh& mesh, int element) {
  if (element < 0 || element >= static_cast<int>(mesh.triangle_count()))
    throw MeshError(element_name(element) + " out of range");
  const auto& tri = mesh.triangles()[element];
  int count = 0, rot = -1;
  for (int k = 0; k < 3; ++k) {
    if (irregular(mesh, tri[k])) {
      ++count;
      rot = k;
    }
  }
  if (count > 1)
    throw MeshError(element_name(element) + ": more than one irregular vertex; refine the mesh first");
  if (count == 1) return irregular_ring(mesh, element, rot);
  return regular_ring(mesh, element);
}

std::vector<OneRing> build_one_rings(const ControlMesh& mesh) {
  std::vector<OneRing> rings;
  rings.reserve(mesh.triangle_count());
  for (int e = 0; e < static_cast<int>(mesh.triangle_count()); ++e) rings.push_back(build_one_ring(mesh, e));
  return rings;
}

PatchExpansion expand(const OneRing& ring) {
  PatchExpansion out;
  std::vector<int> column(ring.size(), -1);
  for (std::size_t s = 0; s < ring.size(); ++s) {
    int node = ring.nodes[s];
    if (node == kGhostNode) continue;
    auto it = std::find(out.real_nodes.begin(), out.real_nodes.end(), node);
    if (it == out.real_nodes.end()) {
      column[s] = static_cast<int>(out.real_nodes.size());
      out.real_nodes.push_back(node);
    } else {
      column[s] = static_cast<int>(it - out.real_nodes.begin());
    }
  }
  out.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ring.size()),
                                      static_cast<Eigen::Index>(out.real_nodes.size()));
  for (std::size_t s = 0; s < ring.size(); ++s) {
    if (column[s] >= 0) out.weights(static_cast<Eigen::Index>(s), column[s]) = 1.0;
  }
  for (const auto& g : ring.ghosts) {
    out.weights.row(g.slot) = out.weights.row(g.a) + out.weights.row(g.b) - out.weights.row(g.c);
  }
  return out;
}

}  // namespace orthoshell
