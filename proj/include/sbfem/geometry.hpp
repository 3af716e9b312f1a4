#ifndef SBFEM_GEOMETRY_HPP
#define SBFEM_GEOMETRY_HPP

// Triangular meshes of the fluid and poroelastic subdomains, boundary
// classification, and the (possibly non-matching) interface trace meshes
// together with their 1D intersection.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sbfem/common.hpp"

namespace sbfem {

inline constexpr double kGeomTol = 1e-10;

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------
//
// Edges are stored with the lower global vertex index first.  The global edge
// normal is the 90-degree clockwise rotation of the oriented edge vector;
// a triangle incidence sign of +1 means the triangle's outward normal on that
// edge coincides with the global edge normal.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> tris;        // counterclockwise
  std::vector<std::array<int, 2>> edges;       // (vmin, vmax)
  std::vector<std::string> edge_tag;           // "interior", "interface", or side label
  std::vector<std::array<int, 3>> tri_edge;    // k-th entry: edge (v_k, v_{k+1})
  std::vector<std::array<int, 3>> tri_edge_sign;
  std::vector<std::array<int, 2>> edge_tri;    // adjacent triangles, -1 if absent
  std::vector<double> tri_area;
  std::vector<double> edge_len;
  std::vector<Vec2> edge_normal;               // unit
  std::vector<std::vector<int>> vertex_edges;
  std::vector<std::vector<int>> vertex_tris;
  double hmax = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_tris() const { return static_cast<int>(tris.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  Vec2 centroid(int t) const {
    return (vertices[tris[t][0]] + vertices[tris[t][1]] + vertices[tris[t][2]]) / 3.0;
  }
  Vec2 edge_midpoint(int e) const { return 0.5 * (vertices[edges[e][0]] + vertices[edges[e][1]]); }
  // Outward normal of edge e as seen from triangle t.
  Vec2 outward_normal(int t, int e) const {
    for (int k = 0; k < 3; ++k)
      if (tri_edge[t][k] == e) return tri_edge_sign[t][k] * edge_normal[e];
    throw InternalError("edge not on triangle");
  }
};

// Derive all incidence/metric data from vertices + triangles + (optional)
// pre-tagged edges.  Used by every mesh constructor below.
inline void finalize_mesh(Mesh& m) {
  const int nv = m.n_vertices();
  std::map<std::array<int, 2>, int> edge_id;
  if (m.edges.empty()) {
    for (const auto& t : m.tris)
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        if (!edge_id.count(key)) {
          edge_id[key] = static_cast<int>(m.edges.size());
          m.edges.push_back(key);
        }
      }
  } else {
    for (int e = 0; e < m.n_edges(); ++e) edge_id[m.edges[e]] = e;
  }
  const int ne = m.n_edges();
  if (m.edge_tag.empty()) m.edge_tag.assign(ne, "interior");

  m.tri_edge.assign(m.n_tris(), {});
  m.tri_edge_sign.assign(m.n_tris(), {});
  m.edge_tri.assign(ne, {-1, -1});
  m.tri_area.assign(m.n_tris(), 0.0);
  m.edge_len.assign(ne, 0.0);
  m.edge_normal.assign(ne, Vec2::Zero());
  m.vertex_edges.assign(nv, {});
  m.vertex_tris.assign(nv, {});
  m.hmax = 0.0;

  for (int e = 0; e < ne; ++e) {
    const Vec2 d = m.vertices[m.edges[e][1]] - m.vertices[m.edges[e][0]];
    m.edge_len[e] = d.norm();
    if (m.edge_len[e] <= 0.0) throw GeometryError("zero-length edge");
    const Vec2 t = d / m.edge_len[e];
    m.edge_normal[e] = Vec2(t.y(), -t.x());  // clockwise rotation
    m.hmax = std::max(m.hmax, m.edge_len[e]);
    m.vertex_edges[m.edges[e][0]].push_back(e);
    m.vertex_edges[m.edges[e][1]].push_back(e);
  }
  for (int t = 0; t < m.n_tris(); ++t) {
    const auto& tri = m.tris[t];
    const Vec2 a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
    const double area2 = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    if (area2 <= 0.0) throw GeometryError("triangle with non-positive area");
    m.tri_area[t] = 0.5 * area2;
    for (int k = 0; k < 3; ++k) {
      int u = tri[k], v = tri[(k + 1) % 3];
      auto it = edge_id.find({std::min(u, v), std::max(u, v)});
      if (it == edge_id.end()) throw GeometryError("triangle references unknown edge");
      m.tri_edge[t][k] = it->second;
      // The triangle traverses u->v; the outward normal of a CCW triangle is
      // the clockwise rotation of (v - u), so the sign is +1 iff u < v.
      m.tri_edge_sign[t][k] = (u < v) ? 1 : -1;
      auto& adj = m.edge_tri[it->second];
      if (adj[0] < 0)
        adj[0] = t;
      else if (adj[1] < 0)
        adj[1] = t;
      else
        throw GeometryError("edge shared by more than two triangles");
      m.vertex_tris[tri[k]].push_back(t);
    }
  }
  for (int v = 0; v < nv; ++v) {
    std::sort(m.vertex_tris[v].begin(), m.vertex_tris[v].end());
    m.vertex_tris[v].erase(std::unique(m.vertex_tris[v].begin(), m.vertex_tris[v].end()),
                           m.vertex_tris[v].end());
  }
}

enum class Diag { left, right, alternating };

// Structured triangulation of [x0,x1] x [y0,y1] with nx*ny cells, each split
// into two triangles.  Boundary edges are tagged left/right/bottom/top.
inline Mesh build_rect_mesh(double x0, double y0, double x1, double y1, int nx, int ny,
                            Diag diag = Diag::left) {
  if (nx < 1 || ny < 1) throw ConfigError("build_rect_mesh: counts must be >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw ConfigError("build_rect_mesh: invalid bounds");
  Mesh m;
  const double hx = (x1 - x0) / nx, hy = (y1 - y0) / ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.vertices.push_back(Vec2(x0 + i * hx, y0 + j * hy));
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      bool left = (diag == Diag::left) || (diag == Diag::alternating && ((i + j) % 2 == 0));
      if (left) {
        m.tris.push_back({v00, v10, v01});
        m.tris.push_back({v10, v11, v01});
      } else {
        m.tris.push_back({v00, v10, v11});
        m.tris.push_back({v00, v11, v01});
      }
    }
  finalize_mesh(m);
  // Tag boundary edges by side of the bounding box.
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_tri[e][1] >= 0) continue;
    const Vec2 a = m.vertices[m.edges[e][0]], b = m.vertices[m.edges[e][1]];
    const double tol = kGeomTol * (1.0 + std::max(x1 - x0, y1 - y0));
    if (std::abs(a.x() - x0) < tol && std::abs(b.x() - x0) < tol)
      m.edge_tag[e] = "left";
    else if (std::abs(a.x() - x1) < tol && std::abs(b.x() - x1) < tol)
      m.edge_tag[e] = "right";
    else if (std::abs(a.y() - y0) < tol && std::abs(b.y() - y0) < tol)
      m.edge_tag[e] = "bottom";
    else if (std::abs(a.y() - y1) < tol && std::abs(b.y() - y1) < tol)
      m.edge_tag[e] = "top";
    else
      throw GeometryError("boundary edge not on bounding box");
  }
  return m;
}

// Re-tag one boundary side as the interface.
inline void mark_interface(Mesh& m, const std::string& side) {
  int count = 0;
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edge_tag[e] == side) {
      m.edge_tag[e] = "interface";
      ++count;
    }
  if (count == 0) throw ConfigError("mark_interface: no boundary edges tagged '" + side + "'");
}

// Relabel boundary sides, e.g. {"left", "inflow"}.  Interface edges are never
// reclassified; every boundary edge must carry a known side label.
inline void classify_boundary(Mesh& m, const std::map<std::string, std::string>& spec) {
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_tri[e][1] >= 0 || m.edge_tag[e] == "interface") continue;
    auto it = spec.find(m.edge_tag[e]);
    if (it != spec.end()) m.edge_tag[e] = it->second;
  }
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edge_tri[e][1] < 0 && m.edge_tag[e] == "interior")
      throw ConfigError("classify_boundary: untagged boundary edge");
}

// Partition one structured grid into a fluid part (cells where inside() is
// true) and a poroelastic part; edges between the two parts become interface
// edges of both meshes.  Used for the cavity geometry of Example 3.
inline std::pair<Mesh, Mesh> build_partitioned_mesh(
    double x0, double y0, double x1, double y1, int nx, int ny,
    const std::function<bool(const Vec2&)>& inside, Diag diag = Diag::left) {
  Mesh full = build_rect_mesh(x0, y0, x1, y1, nx, ny, diag);
  std::vector<int> region(full.n_tris());
  for (int t = 0; t < full.n_tris(); ++t) region[t] = inside(full.centroid(t)) ? 0 : 1;

  auto extract = [&](int reg) {
    Mesh s;
    std::vector<int> vmap(full.n_vertices(), -1);
    std::vector<int> tmap;
    for (int t = 0; t < full.n_tris(); ++t) {
      if (region[t] != reg) continue;
      std::array<int, 3> tri;
      for (int k = 0; k < 3; ++k) {
        int v = full.tris[t][k];
        if (vmap[v] < 0) {
          vmap[v] = s.n_vertices();
          s.vertices.push_back(full.vertices[v]);
        }
        tri[k] = vmap[v];
      }
      s.tris.push_back(tri);
      tmap.push_back(t);
    }
    if (s.tris.empty()) throw ConfigError("build_partitioned_mesh: empty region");
    finalize_mesh(s);
    // Tag: interface where the full-mesh edge separates the regions,
    // otherwise inherit the outer boundary side label.
    std::map<std::array<int, 2>, int> full_edge;
    for (int e = 0; e < full.n_edges(); ++e) full_edge[full.edges[e]] = e;
    std::vector<int> vinv(s.n_vertices());
    for (int v = 0; v < full.n_vertices(); ++v)
      if (vmap[v] >= 0) vinv[vmap[v]] = v;
    for (int e = 0; e < s.n_edges(); ++e) {
      if (s.edge_tri[e][1] >= 0) continue;
      int a = vinv[s.edges[e][0]], b = vinv[s.edges[e][1]];
      int fe = full_edge.at({std::min(a, b), std::max(a, b)});
      const auto& adj = full.edge_tri[fe];
      if (adj[1] >= 0 && region[adj[0]] != region[adj[1]])
        s.edge_tag[e] = "interface";
      else if (adj[1] < 0)
        s.edge_tag[e] = full.edge_tag[fe];
      else
        throw InternalError("exposed edge inside one region");
    }
    return s;
  };
  return {extract(0), extract(1)};
}

// Minimal ASCII mesh reader:
//   vertices N
//   x y                (N lines)
//   triangles M
//   i j k [tag]        (M lines; tag ignored)
//   edges K            (optional)
//   a b label          (K lines; labels boundary/interface edges)
inline Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_mesh: cannot open " + path);
  std::string kw;
  int n = 0;
  Mesh m;
  if (!(in >> kw >> n) || kw != "vertices") throw ConfigError("read_mesh: expected 'vertices N'");
  m.vertices.resize(n);
  for (auto& v : m.vertices)
    if (!(in >> v.x() >> v.y())) throw ConfigError("read_mesh: bad vertex line");
  if (!(in >> kw >> n) || kw != "triangles") throw ConfigError("read_mesh: expected 'triangles M'");
  m.tris.resize(n);
  {
    std::string rest;
    std::getline(in, rest);
    for (auto& t : m.tris) {
      std::string line;
      if (!std::getline(in, line)) throw ConfigError("read_mesh: bad triangle line");
      std::istringstream ls(line);
      if (!(ls >> t[0] >> t[1] >> t[2])) throw ConfigError("read_mesh: bad triangle line");
    }
  }
  finalize_mesh(m);
  std::map<std::array<int, 2>, std::string> labels;
  if (in >> kw >> n) {
    if (kw != "edges") throw ConfigError("read_mesh: expected 'edges K'");
    for (int i = 0; i < n; ++i) {
      int a, b;
      std::string lab;
      if (!(in >> a >> b >> lab)) throw ConfigError("read_mesh: bad edge line");
      labels[{std::min(a, b), std::max(a, b)}] = lab;
    }
  }
  for (int e = 0; e < m.n_edges(); ++e) {
    auto it = labels.find(m.edges[e]);
    if (it != labels.end()) m.edge_tag[e] = it->second;
  }
  return m;
}

// ---------------------------------------------------------------------------
// InterfaceMesh
// ---------------------------------------------------------------------------
//
// The interface is a union of straight axis-aligned groups (one group for the
// flat interfaces of Examples 1-2, several for a rectilinear cavity).  Each
// group carries sorted fluid/poro traces and their merged 1D intersection.
struct IfaceSegment {
  double a = 0.0, b = 0.0;  // interval in the group's running coordinate
  int fluid_edge = -1, poro_edge = -1;
  int group = -1;
  double len() const { return b - a; }
};

struct IfaceGroup {
  int axis = 0;       // 0: runs along x (y = coord); 1: runs along y (x = coord)
  double coord = 0.0;
  Vec2 n_f = Vec2::Zero(), n_p = Vec2::Zero(), t_f = Vec2::Zero();
  std::vector<int> fluid_edges, poro_edges;   // sorted along the run
  std::vector<double> fluid_cuts, poro_cuts;  // breakpoints, size = edges + 1
  std::vector<int> segments;                  // indices into InterfaceMesh::segments
};

struct InterfaceMesh {
  std::vector<IfaceGroup> groups;
  std::vector<IfaceSegment> segments;
  double total_length = 0.0;

  Vec2 point(int seg, double s) const {
    const IfaceGroup& g = groups[segments[seg].group];
    return g.axis == 0 ? Vec2(s, g.coord) : Vec2(g.coord, s);
  }
  double run_coord(const IfaceGroup& g, const Vec2& p) const {
    return g.axis == 0 ? p.x() : p.y();
  }
};

inline InterfaceMesh build_interface(const Mesh& mf, const Mesh& mp) {
  struct Key {
    int axis;
    long long coord_q;
    bool operator<(const Key& o) const {
      return std::tie(axis, coord_q) < std::tie(o.axis, o.coord_q);
    }
  };
  auto quantize = [](double c) { return static_cast<long long>(std::llround(c / kGeomTol)); };

  // Collect interface edges of both meshes into axis-aligned groups.
  std::map<Key, IfaceGroup> groups;
  auto collect = [&](const Mesh& m, bool fluid) {
    for (int e = 0; e < m.n_edges(); ++e) {
      if (m.edge_tag[e] != "interface") continue;
      const Vec2 a = m.vertices[m.edges[e][0]], b = m.vertices[m.edges[e][1]];
      int axis;
      double coord;
      if (std::abs(a.y() - b.y()) < kGeomTol) {
        axis = 0;
        coord = 0.5 * (a.y() + b.y());
      } else if (std::abs(a.x() - b.x()) < kGeomTol) {
        axis = 1;
        coord = 0.5 * (a.x() + b.x());
      } else {
        throw GeometryError("interface edge is not axis-aligned");
      }
      IfaceGroup& g = groups[{axis, quantize(coord)}];
      g.axis = axis;
      g.coord = coord;
      (fluid ? g.fluid_edges : g.poro_edges).push_back(e);
      if (fluid && g.n_f.isZero()) {
        int t = m.edge_tri[e][0];
        g.n_f = m.outward_normal(t, e);
        g.n_p = -g.n_f;
        g.t_f = Vec2(-g.n_f.y(), g.n_f.x());
      }
    }
  };
  collect(mf, true);
  collect(mp, false);

  InterfaceMesh im;
  std::vector<IfaceGroup> runs;
  for (auto& [key, lg] : groups) {
    if (lg.fluid_edges.empty() || lg.poro_edges.empty())
      throw GeometryError("interface group present on only one subdomain");
    // A line may carry several disjoint contiguous runs (cavity geometries);
    // split each trace into runs, then pair fluid and poro runs by interval.
    auto split_runs = [&](const Mesh& m, std::vector<int>& edges) {
      auto lo = [&](int e) {
        return std::min(im.run_coord(lg, m.vertices[m.edges[e][0]]),
                        im.run_coord(lg, m.vertices[m.edges[e][1]]));
      };
      auto hi = [&](int e) {
        return std::max(im.run_coord(lg, m.vertices[m.edges[e][0]]),
                        im.run_coord(lg, m.vertices[m.edges[e][1]]));
      };
      std::sort(edges.begin(), edges.end(), [&](int a, int b) { return lo(a) < lo(b); });
      std::vector<std::pair<std::vector<int>, std::vector<double>>> out;
      for (int e : edges) {
        if (out.empty() || lo(e) > out.back().second.back() + kGeomTol) {
          out.push_back({{}, {lo(e)}});
        } else if (std::abs(lo(e) - out.back().second.back()) > kGeomTol) {
          throw GeometryError("interface trace has a gap or overlap");
        }
        out.back().first.push_back(e);
        out.back().second.push_back(hi(e));
      }
      return out;
    };
    auto fruns = split_runs(mf, lg.fluid_edges);
    auto pruns = split_runs(mp, lg.poro_edges);
    if (fruns.size() != pruns.size())
      throw GeometryError("fluid and poro traces do not coincide");
    for (size_t r = 0; r < fruns.size(); ++r) {
      IfaceGroup g = lg;
      g.fluid_edges = std::move(fruns[r].first);
      g.fluid_cuts = std::move(fruns[r].second);
      g.poro_edges = std::move(pruns[r].first);
      g.poro_cuts = std::move(pruns[r].second);
      g.segments.clear();
      // Orientation is a per-run property: the fluid side may differ between
      // runs on the same grid line.
      const int e0 = g.fluid_edges.front();
      g.n_f = mf.outward_normal(mf.edge_tri[e0][0], e0);
      g.n_p = -g.n_f;
      g.t_f = Vec2(-g.n_f.y(), g.n_f.x());
      runs.push_back(std::move(g));
    }
  }
  for (auto& g : runs) {
    if (std::abs(g.fluid_cuts.front() - g.poro_cuts.front()) > kGeomTol ||
        std::abs(g.fluid_cuts.back() - g.poro_cuts.back()) > kGeomTol)
      throw GeometryError("fluid and poro traces do not coincide");

    // Merge breakpoints of both traces into intersection segments.
    std::vector<double> cuts;
    cuts.insert(cuts.end(), g.fluid_cuts.begin(), g.fluid_cuts.end());
    cuts.insert(cuts.end(), g.poro_cuts.begin(), g.poro_cuts.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < kGeomTol; }),
               cuts.end());
    auto locate = [&](const std::vector<double>& trace_cuts, double mid) {
      for (size_t i = 0; i + 1 < trace_cuts.size(); ++i)
        if (mid > trace_cuts[i] - kGeomTol && mid < trace_cuts[i + 1] + kGeomTol)
          return static_cast<int>(i);
      throw GeometryError("intersection segment outside trace");
    };
    const int gid = static_cast<int>(im.groups.size());
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      IfaceSegment s;
      s.a = cuts[i];
      s.b = cuts[i + 1];
      s.group = gid;
      const double mid = 0.5 * (s.a + s.b);
      s.fluid_edge = g.fluid_edges[locate(g.fluid_cuts, mid)];
      s.poro_edge = g.poro_edges[locate(g.poro_cuts, mid)];
      g.segments.push_back(static_cast<int>(im.segments.size()));
      im.segments.push_back(s);
      im.total_length += s.len();
    }
    im.groups.push_back(std::move(g));
  }
  if (im.groups.empty()) throw GeometryError("no interface edges tagged");
  return im;
}

}  // namespace sbfem

#endif  // SBFEM_GEOMETRY_HPP
