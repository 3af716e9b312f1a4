#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sbfem/geometry.hpp"

using namespace sbfem;

TEST_CASE("smallest structured mesh") {
  Mesh m = build_rect_mesh(0, 0, 1, 1, 1, 1, Diag::left);
  CHECK(m.n_tris() == 2);
  CHECK(m.n_edges() == 5);
  int nb = 0;
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edge_tri[e][1] < 0) ++nb;
  CHECK(nb == 4);
}

TEST_CASE("4x4 mesh counts and h") {
  Mesh m = build_rect_mesh(0, 0, 1, 1, 4, 4);
  CHECK(m.n_tris() == 32);
  CHECK(m.hmax == Catch::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
}

TEST_CASE("poro 5x5 top trace matches Example-1 coarsest h_tp") {
  Mesh m = build_rect_mesh(0, -1, 1, 0, 5, 5);
  int count = 0;
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edge_tag[e] == "top") {
      CHECK(m.edge_len[e] == Catch::Approx(0.2).epsilon(1e-14));
      ++count;
    }
  CHECK(count == 5);
}

TEST_CASE("signed areas sum to domain area; interior signs opposite") {
  Mesh m = build_rect_mesh(0.25, -1.5, 2.25, 0.5, 7, 5, Diag::alternating);
  double area = 0;
  for (double a : m.tri_area) area += a;
  CHECK(area == Catch::Approx(2.0 * 2.0).epsilon(1e-12));

  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_tri[e][1] < 0) continue;
    int s[2];
    for (int j = 0; j < 2; ++j) {
      int t = m.edge_tri[e][j];
      for (int k = 0; k < 3; ++k)
        if (m.tri_edge[t][k] == e) s[j] = m.tri_edge_sign[t][k];
    }
    CHECK(s[0] * s[1] == -1);
  }
}

TEST_CASE("normals are unit clockwise rotations shared by both triangles") {
  Mesh m = build_rect_mesh(0, 0, 1, 1, 3, 3);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Vec2 t = (m.vertices[m.edges[e][1]] - m.vertices[m.edges[e][0]]).normalized();
    CHECK((m.edge_normal[e] - Vec2(t.y(), -t.x())).norm() < 1e-14);
    CHECK(m.edge_normal[e].norm() == Catch::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("invalid mesh parameters rejected") {
  CHECK_THROWS_AS(build_rect_mesh(0, 0, 1, 1, 0, 1), ConfigError);
  CHECK_THROWS_AS(build_rect_mesh(1, 0, 0, 1, 2, 2), ConfigError);
}

TEST_CASE("matching traces intersect as themselves") {
  Mesh mf = build_rect_mesh(0, 0, 1, 1, 4, 4);
  Mesh mp = build_rect_mesh(0, -1, 1, 0, 4, 4);
  mark_interface(mf, "bottom");
  mark_interface(mp, "top");
  InterfaceMesh im = build_interface(mf, mp);
  REQUIRE(im.groups.size() == 1);
  CHECK(im.segments.size() == 4);
  CHECK(im.total_length == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(im.groups[0].n_f.dot(im.groups[0].n_p) == Catch::Approx(-1.0));
  // Fluid sits above y=0, so its outward normal points down.
  CHECK(im.groups[0].n_f.y() == Catch::Approx(-1.0));
}

TEST_CASE("non-matching 8/5 traces merge into 12 segments") {
  Mesh mf = build_rect_mesh(0, 0, 1, 1, 8, 8);
  Mesh mp = build_rect_mesh(0, -1, 1, 0, 5, 5);
  mark_interface(mf, "bottom");
  mark_interface(mp, "top");
  InterfaceMesh im = build_interface(mf, mp);
  CHECK(im.segments.size() == 12);
  CHECK(im.total_length == Catch::Approx(1.0).epsilon(1e-12));

  // Each parent edge's children lengths sum to the parent length.
  std::map<int, double> flen, plen;
  for (const auto& s : im.segments) {
    flen[s.fluid_edge] += s.len();
    plen[s.poro_edge] += s.len();
  }
  for (auto& [e, l] : flen) CHECK(l == Catch::Approx(mf.edge_len[e]).epsilon(1e-12));
  for (auto& [e, l] : plen) CHECK(l == Catch::Approx(mp.edge_len[e]).epsilon(1e-12));
}

TEST_CASE("interface traces must coincide") {
  Mesh mf = build_rect_mesh(0, 0, 1, 1, 4, 4);
  Mesh mp = build_rect_mesh(0.1, -1, 1.1, 0, 4, 4);  // shifted: gap/overlap
  mark_interface(mf, "bottom");
  mark_interface(mp, "top");
  CHECK_THROWS_AS(build_interface(mf, mp), GeometryError);
}

TEST_CASE("classify_boundary relabels sides and rejects leftovers") {
  Mesh m = build_rect_mesh(0, 0, 2, 1, 4, 2);
  classify_boundary(m, {{"left", "inflow"}, {"top", "noslip"}, {"right", "outflow"},
                        {"bottom", "wall"}});
  int n_inflow = 0;
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edge_tag[e] == "inflow") ++n_inflow;
  CHECK(n_inflow == 2);
}

TEST_CASE("partitioned mesh produces a rectilinear cavity interface") {
  // Cavity (0.25,0.375)-(1,0.625) inside the unit square, touching x=1.
  auto inside = [](const Vec2& p) {
    return p.x() > 0.25 && p.y() > 0.375 && p.y() < 0.625;
  };
  auto [mf, mp] = build_partitioned_mesh(0, 0, 1, 1, 8, 8, inside);
  CHECK(mf.n_tris() == 2 * 6 * 2);
  CHECK(mf.n_tris() + mp.n_tris() == 2 * 64);
  InterfaceMesh im = build_interface(mf, mp);
  CHECK(im.groups.size() == 3);  // top, bottom, left walls of the cavity
  CHECK(im.total_length == Catch::Approx(6.0 / 8.0 + 6.0 / 8.0 + 2.0 / 8.0).epsilon(1e-12));
  // Fluid boundary edges on the outer right side remain available for BCs.
  int n_right = 0;
  for (int e = 0; e < mf.n_edges(); ++e)
    if (mf.edge_tag[e] == "right") ++n_right;
  CHECK(n_right == 2);
}

TEST_CASE("ASCII mesh round trip") {
  const char* path = "test_mesh_tmp.txt";
  {
    std::ofstream out(path);
    out << "vertices 4\n0 0\n1 0\n1 1\n0 1\n";
    out << "triangles 2\n0 1 2\n0 2 3\n";
    out << "edges 1\n0 1 interface\n";
  }
  Mesh m = read_mesh(path);
  std::remove(path);
  CHECK(m.n_tris() == 2);
  CHECK(m.n_edges() == 5);
  int n_iface = 0;
  for (auto& t : m.edge_tag)
    if (t == "interface") ++n_iface;
  CHECK(n_iface == 1);
}
