// Interface geometry: extraction from spin configurations, the wall/ceiling
// decomposition, standard wall representations and their reconstruction.
//
// Everything works on doubled-coordinate midpoints (see lattice.hpp). Where
// connectivity or floors depend on the flat plane outside the region, a small
// collar of flat faces is re-attached internally and trimmed before returning.

#include "iflab/interface.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "json.hpp"

namespace iflab {

namespace {

// key of the vertical column through a face or edge
Key col_key(const P3& p) { return key_of(P3{p.x, p.y, 0}); }

// `rings` extra columns of flat faces around the region's footprint
void append_collar(const Region& r, int rings, std::vector<P3>& out) {
  int x0 = 2 * r.lo.x + 1 - 2 * rings, x1 = 2 * r.hi.x - 1 + 2 * rings;
  int y0 = 2 * r.lo.y + 1 - 2 * rings, y1 = 2 * r.hi.y - 1 + 2 * rings;
  for (int x = x0; x <= x1; x += 2)
    for (int y = y0; y <= y1; y += 2) {
      bool inside = x > 2 * r.lo.x && x < 2 * r.hi.x && y > 2 * r.lo.y &&
                    y < 2 * r.hi.y;
      if (!inside) out.push_back(P3{x, y, 0});
    }
}

// Projection of one wall to the flat plane, plus the components of the
// complement under face/edge incidence. Component 0 is the infinite one,
// reached from the padded corner; the rest are the enclosed patches the wall
// can lift.
struct WallGeom {
  int fx0 = 0, fx1 = 0, fy0 = 0, fy1 = 0;  // tight footprint box of the faces
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;      // padded scan box (odd bounds)
  std::unordered_set<Key> proj_f, proj_e;  // projected faces / edges
  std::unordered_map<Key, int> comp;       // complement element -> component
  std::vector<char> comp_has_face;
  int ncomp = 0;
};

WallGeom wall_geometry(const std::vector<P3>& faces) {
  assert(!faces.empty());
  WallGeom g;
  g.fx0 = g.fx1 = faces[0].x;
  g.fy0 = g.fy1 = faces[0].y;
  for (const P3& f : faces) {
    assert(is_face(f));
    (is_horizontal(f) ? g.proj_f : g.proj_e).insert(col_key(f));
    g.fx0 = std::min(g.fx0, f.x);
    g.fx1 = std::max(g.fx1, f.x);
    g.fy0 = std::min(g.fy0, f.y);
    g.fy1 = std::max(g.fy1, f.y);
  }
  // two free columns of padding all around, bounds snapped to odd so the
  // corners are faces
  g.x0 = g.fx0 - 4;
  g.x1 = g.fx1 + 4;
  g.y0 = g.fy0 - 4;
  g.y1 = g.fy1 + 4;
  if (!(g.x0 & 1)) g.x0 -= 1;
  if (!(g.x1 & 1)) g.x1 += 1;
  if (!(g.y0 & 1)) g.y0 -= 1;
  if (!(g.y1 & 1)) g.y1 += 1;

  auto in_box = [&](const P3& p) {
    return p.x >= g.x0 && p.x <= g.x1 && p.y >= g.y0 && p.y <= g.y1;
  };
  auto blocked = [&](Key k) { return g.proj_f.count(k) || g.proj_e.count(k); };

  auto flood = [&](P3 start, int id) {
    std::vector<P3> stack{start};
    g.comp.emplace(key_of(start), id);
    bool face_seen = false;
    while (!stack.empty()) {
      P3 p = stack.back();
      stack.pop_back();
      if ((p.x & 1) && (p.y & 1)) face_seen = true;
      P3 nb[4];
      int n = 0;
      if ((p.x & 1) && (p.y & 1)) {  // face: its four in-plane edges
        nb[n++] = P3{p.x - 1, p.y, 0};
        nb[n++] = P3{p.x + 1, p.y, 0};
        nb[n++] = P3{p.x, p.y - 1, 0};
        nb[n++] = P3{p.x, p.y + 1, 0};
      } else if (p.x & 1) {  // edge with even y: faces either side in y
        nb[n++] = P3{p.x, p.y - 1, 0};
        nb[n++] = P3{p.x, p.y + 1, 0};
      } else {  // edge with even x
        nb[n++] = P3{p.x - 1, p.y, 0};
        nb[n++] = P3{p.x + 1, p.y, 0};
      }
      for (int i = 0; i < n; ++i) {
        if (!in_box(nb[i])) continue;
        Key k = key_of(nb[i]);
        if (blocked(k) || g.comp.count(k)) continue;
        g.comp.emplace(k, id);
        stack.push_back(nb[i]);
      }
    }
    g.comp_has_face.push_back(face_seen ? 1 : 0);
  };

  flood(P3{g.x0, g.y0, 0}, g.ncomp++);  // the infinite component
  for (int x = g.x0; x <= g.x1; ++x)
    for (int y = g.y0; y <= g.y1; ++y) {
      if (!(x & 1) && !(y & 1)) continue;  // vertex, not an element
      P3 p{x, y, 0};
      Key k = key_of(p);
      if (blocked(k) || g.comp.count(k)) continue;
      flood(p, g.ncomp++);
    }
  return g;
}

int component_of(const WallGeom& g, const P3& u) {
  auto it = g.comp.find(key_of(u));
  return it == g.comp.end() ? 0 : it->second;  // outside the box = infinite
}

// minimal flat face that shares an edge with the projection and is either a
// projected face itself or enclosed by the wall
P3 index_from_geometry(const WallGeom& g) {
  std::vector<P3> cand;
  for (Key k : g.proj_e) {
    P3 e = point_of(k);
    if (e.x & 1) {
      cand.push_back(P3{e.x, e.y - 1, 0});
      cand.push_back(P3{e.x, e.y + 1, 0});
    } else {
      cand.push_back(P3{e.x - 1, e.y, 0});
      cand.push_back(P3{e.x + 1, e.y, 0});
    }
  }
  for (Key k : g.proj_f) {
    P3 u = point_of(k);
    cand.push_back(u);
    cand.push_back(P3{u.x - 2, u.y, 0});
    cand.push_back(P3{u.x + 2, u.y, 0});
    cand.push_back(P3{u.x, u.y - 2, 0});
    cand.push_back(P3{u.x, u.y + 2, 0});
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (const P3& u : cand) {
    bool touches = false;
    for (const P3& e : face_edges(u)) {
      P3 across = u + (e - u) + (e - u);
      if (g.proj_e.count(key_of(e)) || g.proj_f.count(key_of(across))) {
        touches = true;
        break;
      }
    }
    if (!touches) continue;
    if (g.proj_f.count(key_of(u)) || component_of(g, u) != 0) return u;
  }
  throw std::runtime_error("wall has no index face");
}

// Ceiling heights of the standalone interface a standard wall delimits, found
// by propagating face parity around each column edge. A horizontal face
// toggles its own height at its four edges; a vertical face over an edge
// toggles the two heights it separates. Around any column edge the surviving
// heights must match the jump between the two flanking ceilings.
struct WallHeights {
  std::vector<long long> h;
  std::vector<char> known;
};

WallHeights standalone_heights(const WallGeom& g, const std::vector<P3>& faces,
                               const std::string& label) {
  auto fail = [&](const char* why) {
    throw std::runtime_error("standard wall at " + label + ": " + why);
  };

  std::unordered_map<Key, std::vector<long long>> tog;
  std::unordered_map<Key, int> vert_edges;
  for (const P3& f : faces) {
    if (is_horizontal(f)) {
      long long t = f.z / 2;
      for (const P3& e : face_edges(f)) tog[col_key(e)].push_back(t);
    } else {
      tog[col_key(f)].push_back((f.z - 1) / 2);
      tog[col_key(f)].push_back((f.z + 1) / 2);
      P3 e1 = f, e2 = f;  // the two vertical edges of f
      if (face_axis(f) == 0) {
        e1.y -= 1;
        e2.y += 1;
      } else {
        e1.x -= 1;
        e2.x += 1;
      }
      ++vert_edges[key_of(e1)];
      ++vert_edges[key_of(e2)];
    }
  }
  for (auto& [k, c] : vert_edges)
    if (c & 1) fail("a vertical edge borders an odd number of wall faces");

  struct PairCon {
    int cu, cv;
    long long a, b;
  };
  std::vector<PairCon> pairs;
  std::vector<std::pair<int, long long>> direct;
  std::vector<std::pair<int, int>> same;

  std::unordered_set<Key> edges;
  for (auto& [k, v] : tog) edges.insert(k);
  for (Key k : g.proj_e) edges.insert(k);

  for (Key ek : edges) {
    P3 e = point_of(ek);
    std::vector<long long> S;
    if (auto it = tog.find(ek); it != tog.end()) {
      auto& v = it->second;
      std::sort(v.begin(), v.end());
      for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        if ((j - i) & 1) S.push_back(v[i]);
        i = j;
      }
    }
    P3 u = e, v = e;
    if (e.x & 1) {
      u.y -= 1;
      v.y += 1;
    } else {
      u.x -= 1;
      v.x += 1;
    }
    bool pu = g.proj_f.count(key_of(u)) > 0, pv = g.proj_f.count(key_of(v)) > 0;
    if (pu && pv) {
      if (!S.empty()) fail("leftover parity between two wall columns");
    } else if (pu || pv) {
      if (S.size() != 1)
        fail("parity around a wall column does not single out a ceiling height");
      direct.emplace_back(component_of(g, pu ? v : u), S[0]);
    } else {
      int cu = component_of(g, u), cv = component_of(g, v);
      if (cu == cv) {
        if (!S.empty()) fail("leftover parity inside one ceiling patch");
      } else if (S.empty()) {
        same.emplace_back(cu, cv);
      } else if (S.size() == 2) {
        pairs.push_back({cu, cv, S[0], S[1]});
      } else {
        fail("parity across a wall edge must flip between exactly two heights");
      }
    }
  }

  WallHeights out;
  out.h.assign(std::size_t(g.ncomp), 0);
  out.known.assign(std::size_t(g.ncomp), 0);
  out.known[0] = 1;  // the surrounding plane sits at height 0 by standardization
  auto anchor = [&](int c, long long h) {
    if (out.known[std::size_t(c)]) {
      if (out.h[std::size_t(c)] != h) {
        if (c == 0) fail("floor is not at height zero");
        fail("ceiling heights are inconsistent");
      }
      return false;
    }
    out.known[std::size_t(c)] = 1;
    out.h[std::size_t(c)] = h;
    return true;
  };
  for (auto& [c, h] : direct) anchor(c, h);
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& [c1, c2] : same) {
      if (out.known[std::size_t(c1)])
        progress |= anchor(c2, out.h[std::size_t(c1)]);
      else if (out.known[std::size_t(c2)])
        progress |= anchor(c1, out.h[std::size_t(c2)]);
    }
    for (auto& p : pairs) {
      bool ku = out.known[std::size_t(p.cu)], kv = out.known[std::size_t(p.cv)];
      if (ku && kv) {
        long long hu = out.h[std::size_t(p.cu)], hv = out.h[std::size_t(p.cv)];
        if (!((hu == p.a && hv == p.b) || (hu == p.b && hv == p.a)))
          fail("ceiling heights are inconsistent");
      } else if (ku) {
        long long hu = out.h[std::size_t(p.cu)];
        if (hu != p.a && hu != p.b) fail("a ceiling height misses its parity step");
        progress |= anchor(p.cv, hu == p.a ? p.b : p.a);
      } else if (kv) {
        long long hv = out.h[std::size_t(p.cv)];
        if (hv != p.a && hv != p.b) fail("a ceiling height misses its parity step");
        progress |= anchor(p.cu, hv == p.a ? p.b : p.a);
      }
    }
  }
  for (int c = 0; c < g.ncomp; ++c)
    if (!out.known[std::size_t(c)] && g.comp_has_face[std::size_t(c)])
      fail("a ceiling height stays undetermined");
  return out;
}

bool touches_boundary(const Region& r, const P3& f) {
  return f.x <= 2 * r.lo.x || f.x >= 2 * r.hi.x || f.y <= 2 * r.lo.y ||
         f.y >= 2 * r.hi.y || f.z <= 2 * r.lo.z || f.z >= 2 * r.hi.z;
}

long long footprint_area(const std::vector<P3>& faces) {
  int x0 = faces[0].x, x1 = faces[0].x, y0 = faces[0].y, y1 = faces[0].y;
  for (const P3& f : faces) {
    x0 = std::min(x0, f.x);
    x1 = std::max(x1, f.x);
    y0 = std::min(y0, f.y);
    y1 = std::max(y1, f.y);
  }
  return (long long)(x1 - x0 + 1) * (long long)(y1 - y0 + 1);
}

}  // namespace

Interface flat_interface(const Region& r) {
  Interface I;
  I.region = r;
  for (int x = 2 * r.lo.x + 1; x < 2 * r.hi.x; x += 2)
    for (int y = 2 * r.lo.y + 1; y < 2 * r.hi.y; y += 2)
      I.faces.push_back(P3{x, y, 0});
  return I;  // loop order is lexicographic
}

Interface extract_interface(const SpinConfig& cfg) {
  const Region& r = cfg.region;
  assert(r.lo.z <= 0 && r.hi.z >= 0);

  // separating faces of the extended configuration, over the region padded by
  // one frozen cell on every side (outside the pad the separating set is the
  // flat plane and never re-enters)
  int cx1 = 2 * r.hi.x + 1, cy1 = 2 * r.hi.y + 1, cz1 = 2 * r.hi.z + 1;
  std::vector<P3> sep;
  for (int cx = 2 * r.lo.x - 1; cx <= cx1; cx += 2)
    for (int cy = 2 * r.lo.y - 1; cy <= cy1; cy += 2)
      for (int cz = 2 * r.lo.z - 1; cz <= cz1; cz += 2) {
        P3 c{cx, cy, cz};
        std::int8_t sc = cfg.at(c);
        for (int a = 0; a < 3; ++a) {
          P3 d = c + unit2(a);
          if (d.x > cx1 || d.y > cy1 || d.z > cz1) continue;
          if (cfg.at(d) != sc) {
            P3 f = c;
            (a == 0 ? f.x : a == 1 ? f.y : f.z) += 1;
            sep.push_back(f);
          }
        }
      }

  // flood along shared corners, seeded from the flat ring in the pad
  std::unordered_map<Key, std::vector<std::int32_t>> at_corner;
  for (std::size_t i = 0; i < sep.size(); ++i)
    for (const P3& v : face_corners(sep[i]))
      at_corner[key_of(v)].push_back(std::int32_t(i));
  std::vector<char> vis(sep.size(), 0);
  std::vector<std::int32_t> stack;
  for (std::size_t i = 0; i < sep.size(); ++i) {
    const P3& f = sep[i];
    if (f.z != 0 || !is_horizontal(f)) continue;
    bool inside = f.x > 2 * r.lo.x && f.x < 2 * r.hi.x && f.y > 2 * r.lo.y &&
                  f.y < 2 * r.hi.y;
    if (!inside) {
      vis[i] = 1;
      stack.push_back(std::int32_t(i));
    }
  }
  while (!stack.empty()) {
    std::int32_t i = stack.back();
    stack.pop_back();
    for (const P3& v : face_corners(sep[std::size_t(i)]))
      for (std::int32_t j : at_corner[key_of(v)])
        if (!vis[std::size_t(j)]) {
          vis[std::size_t(j)] = 1;
          stack.push_back(j);
        }
  }

  Interface I;
  I.region = r;
  for (std::size_t i = 0; i < sep.size(); ++i)
    if (vis[i] && r.contains_face(sep[i])) I.faces.push_back(sep[i]);
  std::sort(I.faces.begin(), I.faces.end());
  return I;
}

SpinConfig two_phase_config(const Interface& I, double beta) {
  const Region& r = I.region;
  SpinConfig cfg;
  cfg.region = r;
  cfg.beta = beta;
  cfg.s.assign(std::size_t(r.cell_count()), -1);

  std::unordered_map<Key, std::vector<int>> hcols;
  for (const P3& f : I.faces)
    if (is_horizontal(f)) hcols[col_key(f)].push_back(f.z);
  for (auto& [k, zs] : hcols) std::sort(zs.begin(), zs.end());

  for (int x = 2 * r.lo.x + 1; x < 2 * r.hi.x; x += 2)
    for (int y = 2 * r.lo.y + 1; y < 2 * r.hi.y; y += 2) {
      const std::vector<int>* zs = nullptr;
      if (auto it = hcols.find(key_of(P3{x, y, 0})); it != hcols.end())
        zs = &it->second;
      for (int z = 2 * r.lo.z + 1; z < 2 * r.hi.z; z += 2) {
        int above = 0;
        if (zs)
          above = int(zs->end() - std::upper_bound(zs->begin(), zs->end(), z));
        if (above & 1) cfg.set(P3{x, y, z}, +1);
      }
    }
  return cfg;
}

Classification classify(const Interface& I) {
  const Region& r = I.region;
  std::vector<P3> ext = I.faces;
  append_collar(r, 2, ext);

  std::unordered_map<Key, int> hmult;
  for (const P3& f : ext)
    if (is_horizontal(f)) ++hmult[col_key(f)];

  std::vector<P3> wall_faces, ceil_faces;
  for (const P3& f : ext) {
    if (is_horizontal(f) && hmult[col_key(f)] == 1)
      ceil_faces.push_back(f);
    else
      wall_faces.push_back(f);
  }

  auto ccomp = star_components(ceil_faces);
  std::unordered_map<Key, int> ceil_id;
  std::vector<int> cheight(ccomp.size(), 0);
  for (std::size_t i = 0; i < ccomp.size(); ++i) {
    for (const P3& f : ccomp[i]) {
      assert(f.z == ccomp[i][0].z);  // ceilings are flat
      ceil_id[key_of(f)] = int(i);
    }
    cheight[i] = ccomp[i][0].z / 2;
  }

  Classification out;
  for (auto& comp : star_components(wall_faces)) {
    WallGeom g = wall_geometry(comp);
    Wall w;
    w.index = index_from_geometry(g);
    // floor: any adjacent ceiling whose column the wall does not enclose
    bool have = false;
    for (const P3& f : comp) {
      for (const P3& v : face_corners(f)) {
        for (const P3& nb : faces_at_vertex(v)) {
          auto it = ceil_id.find(key_of(nb));
          if (it == ceil_id.end()) continue;
          P3 u{nb.x, nb.y, 0};
          if (g.proj_f.count(key_of(u)) || component_of(g, u) != 0) continue;
          assert(!have || w.floor_height == cheight[std::size_t(it->second)]);
          w.floor_height = cheight[std::size_t(it->second)];
          have = true;
        }
      }
    }
    assert(have);
    for (const P3& f : comp)
      if (touches_boundary(r, f)) {
        w.clipped = true;
        break;
      }
    w.faces = std::move(comp);
    out.walls.push_back(std::move(w));
  }
  std::sort(out.walls.begin(), out.walls.end(),
            [](const Wall& a, const Wall& b) {
              return key_of(a.index) < key_of(b.index);
            });

  for (std::size_t i = 0; i < ccomp.size(); ++i) {
    Ceiling c;
    c.height = cheight[i];
    for (const P3& f : ccomp[i])
      if (r.contains_face(f)) c.faces.push_back(f);
    if (!c.faces.empty()) out.ceilings.push_back(std::move(c));
  }
  std::sort(out.ceilings.begin(), out.ceilings.end(),
            [](const Ceiling& a, const Ceiling& b) {
              return key_of(a.faces[0]) < key_of(b.faces[0]);
            });
  return out;
}

P3 wall_index_face(const std::vector<P3>& wall_faces) {
  return index_from_geometry(wall_geometry(wall_faces));
}

bool interior_to(const P3& u, const std::vector<P3>& wall_faces) {
  assert((is_face(u) || is_edge(u)) && u.z == 0);
  WallGeom g = wall_geometry(wall_faces);
  Key k = key_of(u);
  if (g.proj_f.count(k) || g.proj_e.count(k)) return true;
  auto it = g.comp.find(k);
  return it != g.comp.end() && it->second != 0;
}

WallCollection standard_wall_representation(const Interface& I) {
  WallCollection coll;
  coll.region = I.region;
  for (Wall& w : classify(I).walls) {  // already ordered by index
    StandardWall sw;
    sw.index = w.index;
    sw.clipped = w.clipped;
    P3 down{0, 0, -2 * w.floor_height};
    sw.faces.reserve(w.faces.size());
    for (const P3& f : w.faces) sw.faces.push_back(f + down);
    coll.walls.push_back(std::move(sw));
  }
  return coll;
}

Interface reconstruct(const WallCollection& coll) {
  const Region& r = coll.region;
  assert(r.lo.z <= 0 && r.hi.z >= 0);

  for (std::size_t i = 0; i + 1 < coll.walls.size(); ++i)
    if (key_of(coll.walls[i].index) >= key_of(coll.walls[i + 1].index))
      throw std::runtime_error("collection is not sorted by wall index");

  // validate each wall and check that projections never overlap
  std::unordered_map<Key, std::size_t> owner;
  std::vector<WallGeom> geoms;
  std::vector<WallHeights> heights;
  geoms.reserve(coll.walls.size());
  heights.reserve(coll.walls.size());
  for (std::size_t i = 0; i < coll.walls.size(); ++i) {
    const StandardWall& w = coll.walls[i];
    std::string label = to_string(w.index);
    if (w.faces.empty())
      throw std::runtime_error("standard wall at " + label + " is empty");
    for (const P3& f : w.faces)
      if (!is_face(f))
        throw std::runtime_error("standard wall at " + label +
                                 " contains a non-face element");
    std::vector<P3> sorted = w.faces;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::runtime_error("standard wall at " + label + " repeats a face");
    if (star_components(w.faces).size() != 1)
      throw std::runtime_error("standard wall at " + label +
                               " is not *-connected");
    WallGeom g = wall_geometry(w.faces);
    for (Key k : g.proj_f)
      if (auto [it, fresh] = owner.emplace(k, i); !fresh)
        throw std::runtime_error(
            "standard walls at " + to_string(coll.walls[it->second].index) +
            " and " + label + " have overlapping projections");
    for (Key k : g.proj_e)
      if (auto [it, fresh] = owner.emplace(k, i); !fresh)
        throw std::runtime_error(
            "standard walls at " + to_string(coll.walls[it->second].index) +
            " and " + label + " have overlapping projections");
    if (index_from_geometry(g) != w.index)
      throw std::runtime_error("standard wall at " + label + " is mis-indexed");
    heights.push_back(standalone_heights(g, w.faces, label));
    geoms.push_back(std::move(g));
  }

  // lay the walls in innermost outward; a nested wall has a strictly smaller
  // footprint box, so ascending box area is a valid order
  std::vector<std::size_t> order(coll.walls.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    long long aa = footprint_area(coll.walls[a].faces);
    long long ab = footprint_area(coll.walls[b].faces);
    if (aa != ab) return aa < ab;
    return key_of(coll.walls[a].index) < key_of(coll.walls[b].index);
  });

  // the working surface: every column's face heights, starting from flat
  std::unordered_map<Key, std::vector<int>> cols;
  for (int x = 2 * r.lo.x + 1; x < 2 * r.hi.x; x += 2)
    for (int y = 2 * r.lo.y + 1; y < 2 * r.hi.y; y += 2)
      cols[key_of(P3{x, y, 0})].push_back(0);

  for (std::size_t oi : order) {
    const StandardWall& w = coll.walls[oi];
    const WallGeom& g = geoms[oi];
    const WallHeights& hh = heights[oi];
    std::string label = to_string(w.index);
    // 1. the wall replaces the single horizontal face over each projected face
    for (Key k : g.proj_f) {
      auto it = cols.find(k);
      if (it == cols.end())
        throw std::runtime_error("standard wall at " + label +
                                 " leaves the region's footprint");
      assert(it->second.size() == 1);
      cols.erase(it);
    }
    // 2. lift everything over the enclosed patches by their ceiling heights
    for (auto& [k, cid] : g.comp) {
      if (cid == 0) continue;
      auto it = cols.find(k);
      if (it == cols.end() || it->second.empty()) continue;
      if (!hh.known[std::size_t(cid)])
        throw std::runtime_error(
            "standard wall at " + label +
            " lifts a column whose ceiling height is undetermined");
      int dz = 2 * int(hh.h[std::size_t(cid)]);
      if (dz) for (int& z : it->second) z += dz;
    }
    // 3. add the wall's own faces
    for (const P3& f : w.faces) cols[col_key(f)].push_back(f.z);
  }

  Interface out;
  out.region = r;
  for (auto& [k, zs] : cols) {
    P3 base = point_of(k);
    for (int z : zs) {
      if (z < 2 * r.lo.z || z > 2 * r.hi.z)
        throw std::runtime_error(
            "reconstructed interface leaves the region's height range");
      P3 f{base.x, base.y, z};
      if (r.contains_face(f)) out.faces.push_back(f);
    }
  }
  std::sort(out.faces.begin(), out.faces.end());

  // the result must be a genuine interface that reproduces itself
  if (!(extract_interface(two_phase_config(out)) == out))
    throw std::runtime_error("collection does not assemble into an interface");
  return out;
}

std::vector<GroupOfWalls> groups_of_walls(const WallCollection& coll) {
  std::size_t n = coll.walls.size();

  struct Proj {
    std::vector<std::pair<P3, long long>> elems;  // element, multiplicity
    long long nmax = 0;
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  };
  std::vector<Proj> pr(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::unordered_map<Key, long long> cnt;
    for (const P3& f : coll.walls[i].faces) ++cnt[key_of(project(f))];
    Proj& p = pr[i];
    p.x0 = p.x1 = coll.walls[i].faces[0].x;
    p.y0 = p.y1 = coll.walls[i].faces[0].y;
    for (auto& [k, c] : cnt) {
      P3 u = point_of(k);
      p.elems.emplace_back(u, c);
      p.nmax = std::max(p.nmax, c);
      p.x0 = std::min(p.x0, u.x);
      p.x1 = std::max(p.x1, u.x);
      p.y0 = std::min(p.y0, u.y);
      p.y1 = std::max(p.y1, u.y);
    }
  }

  // exact closeness test |u1-u2| <= sqrt(n1) + sqrt(n2), same integer algebra
  // as within_sqrt_sum but starting from a squared distance
  auto within = [](std::int64_t d2, std::int64_t n1, std::int64_t n2) {
    std::int64_t lhs = d2 - 4 * (n1 + n2);
    if (lhs <= 0) return true;
    return lhs * lhs <= 64 * n1 * n2;
  };

  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = i;
  auto find = [&](std::size_t a) {
    while (root[a] != a) a = root[a] = root[root[a]];
    return a;
  };

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (find(i) == find(j)) continue;
      // box distance rules most pairs out before the element scan
      std::int64_t gx = std::max({0, pr[i].x0 - pr[j].x1, pr[j].x0 - pr[i].x1});
      std::int64_t gy = std::max({0, pr[i].y0 - pr[j].y1, pr[j].y0 - pr[i].y1});
      if (!within(gx * gx + gy * gy, pr[i].nmax, pr[j].nmax)) continue;
      bool close = false;
      for (auto& [u1, n1] : pr[i].elems) {
        for (auto& [u2, n2] : pr[j].elems)
          if (within_sqrt_sum(u1, u2, n1, n2)) {
            close = true;
            break;
          }
        if (close) break;
      }
      if (close) root[find(i)] = find(j);
    }

  std::unordered_map<std::size_t, GroupOfWalls> by_root;
  for (std::size_t i = 0; i < n; ++i)
    by_root[find(i)].wall_ids.push_back(int(i));
  std::vector<GroupOfWalls> out;
  for (auto& [rt, grp] : by_root) {
    std::sort(grp.wall_ids.begin(), grp.wall_ids.end());
    grp.index = coll.walls[std::size_t(grp.wall_ids[0])].index;
    out.push_back(std::move(grp));
  }
  std::sort(out.begin(), out.end(), [](const GroupOfWalls& a, const GroupOfWalls& b) {
    return key_of(a.index) < key_of(b.index);
  });
  return out;
}

std::vector<int> nested_walls(const P3& u, const WallCollection& coll) {
  std::vector<std::pair<long long, int>> hits;
  for (std::size_t i = 0; i < coll.walls.size(); ++i)
    if (interior_to(u, coll.walls[i].faces))
      hits.emplace_back(footprint_area(coll.walls[i].faces), int(i));
  std::sort(hits.begin(), hits.end(), [&](auto& a, auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return key_of(coll.walls[std::size_t(a.second)].index) <
           key_of(coll.walls[std::size_t(b.second)].index);
  });
  std::vector<int> out;
  out.reserve(hits.size());
  for (auto& [area, i] : hits) out.push_back(i);
  return out;
}

int projection_face_count(const std::vector<P3>& wall_faces) {
  std::unordered_set<Key> s;
  for (const P3& f : wall_faces)
    if (is_horizontal(f)) s.insert(col_key(f));
  return int(s.size());
}

int projection_edge_count(const std::vector<P3>& wall_faces) {
  std::unordered_set<Key> s;
  for (const P3& f : wall_faces)
    if (!is_horizontal(f)) s.insert(col_key(f));
  return int(s.size());
}

int wall_excess(const std::vector<P3>& wall_faces) {
  return int(wall_faces.size()) - projection_face_count(wall_faces);
}

int top_height2(const std::vector<P3>& faces) {
  int top = 0;
  for (const P3& f : faces)
    top = std::max(top, f.z + (is_horizontal(f) ? 0 : 1));
  return top;
}

std::string interface_json(const Interface& I, const Classification& cls) {
  using json = nlohmann::ordered_json;
  auto face_arr = [](const std::vector<P3>& fs) {
    json a = json::array();
    for (const P3& f : fs) a.push_back({f.x, f.y, f.z});
    return a;
  };
  json j;
  j["region"] = {{"lo", {I.region.lo.x, I.region.lo.y, I.region.lo.z}},
                 {"hi", {I.region.hi.x, I.region.hi.y, I.region.hi.z}}};
  j["faces"] = face_arr(I.faces);
  j["walls"] = json::array();
  for (const Wall& w : cls.walls)
    j["walls"].push_back({{"index", {w.index.x, w.index.y, w.index.z}},
                          {"floor", w.floor_height},
                          {"clipped", w.clipped},
                          {"faces", face_arr(w.faces)}});
  j["ceilings"] = json::array();
  for (const Ceiling& c : cls.ceilings)
    j["ceilings"].push_back({{"height", c.height}, {"faces", face_arr(c.faces)}});
  return j.dump();
}

}  // namespace iflab
