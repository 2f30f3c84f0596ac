#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

namespace iflab {

// Midpoints of the cells, faces, edges and vertices of the unit cube lattice,
// stored with DOUBLED coordinates so that every midpoint is an integer triple:
//   cell   : all three coordinates odd
//   face   : exactly one even coordinate (the even axis is the normal)
//   edge   : exactly two even
//   vertex : all even
// e.g. the cell (1/2,1/2,1/2) is {1,1,1}; its top face (1/2,1/2,1) is {1,1,2}.
struct P3 {
  int x = 0, y = 0, z = 0;
  friend bool operator==(const P3&, const P3&) = default;
  friend auto operator<=>(const P3&, const P3&) = default;  // lexicographic
  P3 operator+(const P3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  P3 operator-(const P3& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

// 21 bits per coordinate, offset to keep packing order == lexicographic order.
using Key = std::uint64_t;
inline Key key_of(const P3& p) {
  constexpr int B = 1 << 20;
  assert(std::abs(p.x) < B && std::abs(p.y) < B && std::abs(p.z) < B);
  return (Key(p.x + B) << 42) | (Key(p.y + B) << 21) | Key(p.z + B);
}
inline P3 point_of(Key k) {
  constexpr int B = 1 << 20;
  constexpr Key M = (1u << 21) - 1;
  return {int((k >> 42) & M) - B, int((k >> 21) & M) - B, int(k & M) - B};
}

struct KeyHash {
  std::size_t operator()(Key k) const {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return std::size_t(k);
  }
};
struct P3Hash {
  std::size_t operator()(const P3& p) const { return KeyHash{}(key_of(p)); }
};

inline int even_count(const P3& p) {
  return int(~p.x & 1) + int(~p.y & 1) + int(~p.z & 1);
}
inline bool is_cell(const P3& p) { return even_count(p) == 0; }
inline bool is_face(const P3& p) { return even_count(p) == 1; }
inline bool is_edge(const P3& p) { return even_count(p) == 2; }
inline bool is_vertex(const P3& p) { return even_count(p) == 3; }

// normal axis of a face: 0,1,2 for x,y,z
inline int face_axis(const P3& f) {
  assert(is_face(f));
  if (~f.x & 1) return 0;
  if (~f.y & 1) return 1;
  return 2;
}
inline bool is_horizontal(const P3& f) { return is_face(f) && (~f.z & 1); }

inline P3 unit2(int axis) {  // one lattice step, doubled coordinates
  P3 u;
  (axis == 0 ? u.x : axis == 1 ? u.y : u.z) = 2;
  return u;
}

// ---- cells -----------------------------------------------------------------

inline std::array<P3, 6> adj_cells(const P3& c) {
  assert(is_cell(c));
  return {P3{c.x - 2, c.y, c.z}, P3{c.x + 2, c.y, c.z}, P3{c.x, c.y - 2, c.z},
          P3{c.x, c.y + 2, c.z}, P3{c.x, c.y, c.z - 2}, P3{c.x, c.y, c.z + 2}};
}

// the 26 cells sharing at least a bounding vertex with c
inline std::array<P3, 26> star_cells(const P3& c) {
  assert(is_cell(c));
  std::array<P3, 26> out;
  int k = 0;
  for (int dx = -2; dx <= 2; dx += 2)
    for (int dy = -2; dy <= 2; dy += 2)
      for (int dz = -2; dz <= 2; dz += 2) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        out[k++] = P3{c.x + dx, c.y + dy, c.z + dz};
      }
  return out;
}

inline bool cells_adjacent(const P3& a, const P3& b) {
  int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y), dz = std::abs(a.z - b.z);
  return dx + dy + dz == 2;  // coordinates differ by even amounts
}
inline bool cells_star_adjacent(const P3& a, const P3& b) {
  if (a == b) return false;
  return std::abs(a.x - b.x) <= 2 && std::abs(a.y - b.y) <= 2 &&
         std::abs(a.z - b.z) <= 2;
}

inline std::array<P3, 6> cell_faces(const P3& c) {
  assert(is_cell(c));
  return {P3{c.x - 1, c.y, c.z}, P3{c.x + 1, c.y, c.z}, P3{c.x, c.y - 1, c.z},
          P3{c.x, c.y + 1, c.z}, P3{c.x, c.y, c.z - 1}, P3{c.x, c.y, c.z + 1}};
}

inline std::array<P3, 8> cell_corners(const P3& c) {
  assert(is_cell(c));
  std::array<P3, 8> out;
  int k = 0;
  for (int dx = -1; dx <= 1; dx += 2)
    for (int dy = -1; dy <= 1; dy += 2)
      for (int dz = -1; dz <= 1; dz += 2) out[k++] = P3{c.x + dx, c.y + dy, c.z + dz};
  return out;
}

// ---- faces -----------------------------------------------------------------

inline std::array<P3, 2> face_cells(const P3& f) {
  int a = face_axis(f);
  P3 u = unit2(a);
  return {P3{f.x - u.x / 2, f.y - u.y / 2, f.z - u.z / 2},
          P3{f.x + u.x / 2, f.y + u.y / 2, f.z + u.z / 2}};
}

inline std::array<P3, 4> face_corners(const P3& f) {
  int a = face_axis(f);
  int b = (a + 1) % 3, c = (a + 2) % 3;
  auto get = [&](const P3& p, int ax) { return ax == 0 ? p.x : ax == 1 ? p.y : p.z; };
  auto set = [&](P3& p, int ax, int v) { (ax == 0 ? p.x : ax == 1 ? p.y : p.z) = v; };
  std::array<P3, 4> out;
  int k = 0;
  for (int db = -1; db <= 1; db += 2)
    for (int dc = -1; dc <= 1; dc += 2) {
      P3 v = f;
      set(v, b, get(f, b) + db);
      set(v, c, get(f, c) + dc);
      out[k++] = v;
    }
  return out;
}

inline std::array<P3, 4> face_edges(const P3& f) {
  int a = face_axis(f);
  int b = (a + 1) % 3, c = (a + 2) % 3;
  auto set = [&](P3& p, int ax, int dv) {
    (ax == 0 ? p.x : ax == 1 ? p.y : p.z) += dv;
  };
  std::array<P3, 4> out{f, f, f, f};
  set(out[0], b, -1);
  set(out[1], b, +1);
  set(out[2], c, -1);
  set(out[3], c, +1);
  return out;
}

// the 12 faces having the vertex v as a corner
inline std::array<P3, 12> faces_at_vertex(const P3& v) {
  assert(is_vertex(v));
  std::array<P3, 12> out;
  int k = 0;
  for (int a = 0; a < 3; ++a) {  // normal axis of the face
    int b = (a + 1) % 3, c = (a + 2) % 3;
    auto set = [&](P3& p, int ax, int dv) {
      (ax == 0 ? p.x : ax == 1 ? p.y : p.z) += dv;
    };
    for (int db = -1; db <= 1; db += 2)
      for (int dc = -1; dc <= 1; dc += 2) {
        P3 f = v;
        set(f, b, db);
        set(f, c, dc);
        out[k++] = f;
      }
  }
  return out;
}

inline bool faces_share_corner(const P3& f, const P3& g) {
  if (f == g) return false;
  for (const P3& u : face_corners(f))
    for (const P3& v : face_corners(g))
      if (u == v) return true;
  return false;
}
inline bool faces_share_edge(const P3& f, const P3& g) {
  if (f == g) return false;
  for (const P3& u : face_edges(f))
    for (const P3& v : face_edges(g))
      if (u == v) return true;
  return false;
}

// vertical projection onto the plane of the flat interface: a horizontal face
// maps to the height-0 face below it, a vertical face to a height-0 edge.
// Idempotent on height-0 faces and edges.
inline P3 project(const P3& p) {
  assert(is_face(p) || is_edge(p));
  return {p.x, p.y, 0};
}

// squared Euclidean distance between midpoints, in doubled units
// (i.e. 4x the true squared distance)
inline std::int64_t dist2_doubled(const P3& a, const P3& b) {
  std::int64_t dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

// exact integer test for  |u1-u2| <= sqrt(n1) + sqrt(n2)  (true Euclidean distance)
inline bool within_sqrt_sum(const P3& u1, const P3& u2, std::int64_t n1,
                            std::int64_t n2) {
  std::int64_t d2 = dist2_doubled(u1, u2);  // = 4 |u1-u2|^2
  std::int64_t lhs = d2 - 4 * (n1 + n2);    // <= 8 sqrt(n1 n2) ?
  if (lhs <= 0) return true;
  return lhs * lhs <= 64 * n1 * n2;
}

// ---- region ----------------------------------------------------------------

// An axis-aligned box of unit cells with integer corners [lo, hi] (true
// coordinates, not doubled). The documented region Lambda_{n,m,h} is
// Region::centered(n,m,h) = [-n,n] x [-m,m] x [-h,h]; general boxes exist for
// the small exact-enumeration slabs. Cells are enumerated lexicographically by
// midpoint, x slowest / z fastest.
struct Region {
  P3 lo{0, 0, 0}, hi{0, 0, 0};

  static Region centered(int n, int m, int h) {
    assert(n > 0 && m > 0 && h > 0);
    return Region{{-n, -m, -h}, {n, m, h}};
  }
  static Region box(P3 lo_, P3 hi_) {
    assert(lo_.x < hi_.x && lo_.y < hi_.y && lo_.z < hi_.z);
    return Region{lo_, hi_};
  }

  int nx() const { return hi.x - lo.x; }
  int ny() const { return hi.y - lo.y; }
  int nz() const { return hi.z - lo.z; }
  std::size_t cell_count() const {
    return std::size_t(nx()) * std::size_t(ny()) * std::size_t(nz());
  }

  bool centered_nmh(int& n, int& m, int& h) const {
    if (lo.x != -hi.x || lo.y != -hi.y || lo.z != -hi.z) return false;
    n = hi.x;
    m = hi.y;
    h = hi.z;
    return true;
  }

  bool contains_cell(const P3& c) const {
    return c.x > 2 * lo.x && c.x < 2 * hi.x && c.y > 2 * lo.y && c.y < 2 * hi.y &&
           c.z > 2 * lo.z && c.z < 2 * hi.z;
  }
  // faces of the closed box, boundary planes included
  bool contains_face(const P3& f) const {
    return f.x >= 2 * lo.x && f.x <= 2 * hi.x && f.y >= 2 * lo.y &&
           f.y <= 2 * hi.y && f.z >= 2 * lo.z && f.z <= 2 * hi.z;
  }

  std::size_t cell_index(const P3& c) const {
    assert(contains_cell(c));
    std::size_t ix = std::size_t((c.x - 2 * lo.x - 1) / 2);
    std::size_t iy = std::size_t((c.y - 2 * lo.y - 1) / 2);
    std::size_t iz = std::size_t((c.z - 2 * lo.z - 1) / 2);
    return (ix * std::size_t(ny()) + iy) * std::size_t(nz()) + iz;
  }
  P3 cell_at(std::size_t i) const {
    std::size_t nzz = std::size_t(nz()), nyy = std::size_t(ny());
    int iz = int(i % nzz);
    int iy = int((i / nzz) % nyy);
    int ix = int(i / (nzz * nyy));
    return {2 * lo.x + 2 * ix + 1, 2 * lo.y + 2 * iy + 1, 2 * lo.z + 2 * iz + 1};
  }

  friend bool operator==(const Region&, const Region&) = default;
};

inline std::string to_string(const P3& p) {
  return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + "," +
         std::to_string(p.z) + ")/2";
}

// canonical representation of element sets: lexicographically sorted key vectors
std::vector<Key> sorted_keys(const std::vector<P3>& ps);
bool sorted_contains(const std::vector<Key>& keys, const P3& p);

// maximal components of a face set under the share-a-corner relation,
// each component sorted, components ordered by their minimal face
std::vector<std::vector<P3>> star_components(const std::vector<P3>& faces);

}  // namespace iflab
