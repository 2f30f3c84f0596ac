#include "oracles.hpp"

#include <cassert>
#include <cmath>
#include <map>
#include <stdexcept>

namespace oracle {

using iflab::P3;
using iflab::Region;
using iflab::SpinConfig;

namespace {

bool is_face_tri(const Tri& f) {
  int even = !(f[0] & 1) + !(f[1] & 1) + !(f[2] & 1);
  return even == 1;
}

// the four lattice vertices of a face, found arithmetically: vary the two
// odd coordinates by one
std::vector<Tri> corners_of(const Tri& f) {
  std::vector<Tri> out;
  int a = -1, b = -1;
  for (int i = 0; i < 3; ++i)
    if (f[std::size_t(i)] & 1) (a < 0 ? a : b) = i;
  for (int da = -1; da <= 1; da += 2)
    for (int db = -1; db <= 1; db += 2) {
      Tri v = f;
      v[std::size_t(a)] += da;
      v[std::size_t(b)] += db;
      out.push_back(v);
    }
  return out;
}

}  // namespace

std::set<Tri> reference_interface(const SpinConfig& cfg) {
  const Region& r = cfg.region;
  // all separating faces over the box padded by one frozen cell
  std::set<Tri> sep;
  for (int cx = 2 * r.lo.x - 1; cx <= 2 * r.hi.x + 1; cx += 2)
    for (int cy = 2 * r.lo.y - 1; cy <= 2 * r.hi.y + 1; cy += 2)
      for (int cz = 2 * r.lo.z - 1; cz <= 2 * r.hi.z + 1; cz += 2) {
        P3 c{cx, cy, cz};
        int sc = cfg.at(c);
        const P3 nb[3] = {P3{cx + 2, cy, cz}, P3{cx, cy + 2, cz},
                          P3{cx, cy, cz + 2}};
        for (int a = 0; a < 3; ++a) {
          if (nb[a].x > 2 * r.hi.x + 1 || nb[a].y > 2 * r.hi.y + 1 ||
              nb[a].z > 2 * r.hi.z + 1)
            continue;
          if (cfg.at(nb[a]) != sc) {
            Tri f = {cx, cy, cz};
            f[std::size_t(a)] += 1;
            sep.insert(f);
          }
        }
      }

  // grow the component of the flat ring, faces touching at corners
  std::map<Tri, std::vector<Tri>> at_corner;
  for (const Tri& f : sep)
    for (const Tri& v : corners_of(f)) at_corner[v].push_back(f);
  std::set<Tri> seen;
  std::vector<Tri> stack;
  for (const Tri& f : sep) {
    if (f[2] != 0 || (f[0] & 1) == 0 || (f[1] & 1) == 0) continue;
    bool inside = f[0] > 2 * r.lo.x && f[0] < 2 * r.hi.x && f[1] > 2 * r.lo.y &&
                  f[1] < 2 * r.hi.y;
    if (!inside && seen.insert(f).second) stack.push_back(f);
  }
  while (!stack.empty()) {
    Tri f = stack.back();
    stack.pop_back();
    for (const Tri& v : corners_of(f))
      for (const Tri& g : at_corner[v])
        if (seen.insert(g).second) stack.push_back(g);
  }

  std::set<Tri> out;
  for (const Tri& f : seen) {
    assert(is_face_tri(f));
    P3 p{f[0], f[1], f[2]};
    if (r.contains_face(p)) out.insert(f);
  }
  return out;
}

std::set<Tri> reference_plus_cells(const SpinConfig& cfg) {
  const Region& r = cfg.region;
  std::set<Tri> ifc = reference_interface(cfg);
  std::set<Tri> out;
  for (int cx = 2 * r.lo.x + 1; cx < 2 * r.hi.x; cx += 2)
    for (int cy = 2 * r.lo.y + 1; cy < 2 * r.hi.y; cy += 2)
      for (int cz = 2 * r.lo.z + 1; cz < 2 * r.hi.z; cz += 2) {
        int above = 0;
        for (int z = cz + 1; z <= 2 * r.hi.z; z += 2)
          if (ifc.count(Tri{cx, cy, z})) ++above;
        if (above & 1) out.insert(Tri{cx, cy, cz});
      }
  return out;
}

std::set<Tri> reference_pillar_cells(const SpinConfig& cfg, const P3& x) {
  std::set<Tri> plus = reference_plus_cells(cfg);
  Tri start = {x.x, x.y, 1};
  std::set<Tri> out;
  if (!plus.count(start)) return out;
  std::vector<Tri> stack{start};
  out.insert(start);
  while (!stack.empty()) {
    Tri c = stack.back();
    stack.pop_back();
    for (int dx = -2; dx <= 2; dx += 2)
      for (int dy = -2; dy <= 2; dy += 2)
        for (int dz = -2; dz <= 2; dz += 2) {
          if (!dx && !dy && !dz) continue;
          Tri d = {c[0] + dx, c[1] + dy, c[2] + dz};
          if (d[2] < 1 || !plus.count(d)) continue;
          if (out.insert(d).second) stack.push_back(d);
        }
  }
  return out;
}

std::vector<int> reference_cut_levels(const std::set<Tri>& pillar_cells) {
  std::map<int, int> per_level;
  for (const Tri& c : pillar_cells) ++per_level[c[2]];
  std::vector<int> out;
  for (const auto& [z, n] : per_level)
    if (n == 1) out.push_back(z);
  return out;
}

int reference_top2(const std::set<Tri>& faces) {
  int top = 0;
  for (const Tri& f : faces) {
    int t = (f[2] & 1) ? f[2] + 1 : f[2];  // vertical faces close one higher
    if (t > top) top = t;
  }
  return top;
}

// ---- exact enumeration -------------------------------------------------------------

namespace {

// cells listed in a fixed lexicographic order of our own
std::vector<P3> cells_of(const Region& r) {
  std::vector<P3> out;
  for (int cx = 2 * r.lo.x + 1; cx < 2 * r.hi.x; cx += 2)
    for (int cy = 2 * r.lo.y + 1; cy < 2 * r.hi.y; cy += 2)
      for (int cz = 2 * r.lo.z + 1; cz < 2 * r.hi.z; cz += 2)
        out.push_back(P3{cx, cy, cz});
  return out;
}

int disagreements(const SpinConfig& cfg) {
  const Region& r = cfg.region;
  int h = 0;
  for (int cx = 2 * r.lo.x + 1; cx < 2 * r.hi.x; cx += 2)
    for (int cy = 2 * r.lo.y + 1; cy < 2 * r.hi.y; cy += 2)
      for (int cz = 2 * r.lo.z + 1; cz < 2 * r.hi.z; cz += 2) {
        P3 c{cx, cy, cz};
        int sc = cfg.at(c);
        const P3 nb[6] = {P3{cx + 2, cy, cz}, P3{cx - 2, cy, cz},
                          P3{cx, cy + 2, cz}, P3{cx, cy - 2, cz},
                          P3{cx, cy, cz + 2}, P3{cx, cy, cz - 2}};
        for (const P3& d : nb) {
          if (r.contains_cell(d)) {
            if (d.x < cx || (d.x == cx && d.y < cy) ||
                (d.x == cx && d.y == cy && d.z < cz))
              continue;  // each internal pair once
            if (cfg.at(d) != sc) ++h;
          } else {
            if (cfg.at(d) != sc) ++h;
          }
        }
      }
  return h;
}

template <typename Fn>
void enumerate(const Region& r, double beta, const Fn& visit) {
  std::vector<P3> cells = cells_of(r);
  if (cells.size() > 24) throw std::runtime_error("oracle enumeration too large");
  SpinConfig cfg;
  cfg.region = r;
  cfg.beta = beta;
  cfg.s.assign(cells.size(), -1);
  for (std::uint64_t bits = 0; bits < (1ull << cells.size()); ++bits) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      cfg.set(cells[i], (bits >> i) & 1 ? +1 : -1);
    visit(cfg, std::exp(-beta * double(disagreements(cfg))));
  }
}

}  // namespace

double reference_log_z(const Region& r, double beta) {
  long double z = 0;
  enumerate(r, beta, [&](const SpinConfig&, double w) { z += w; });
  return double(std::log(z));
}

double reference_expect(const Region& r, double beta,
                        const std::function<double(const SpinConfig&)>& f) {
  long double z = 0, acc = 0;
  enumerate(r, beta, [&](const SpinConfig& cfg, double w) {
    z += w;
    acc += (long double)(f(cfg)) * w;
  });
  return double(acc / z);
}

double reference_prob(const Region& r, double beta,
                      const std::function<bool(const SpinConfig&)>& ev) {
  return reference_expect(r, beta,
                          [&](const SpinConfig& c) { return ev(c) ? 1.0 : 0.0; });
}

// ---- fixtures --------------------------------------------------------------------

namespace {

SpinConfig base_box(int n) {
  return iflab::ground_state(Region::centered(n, n, iflab::default_hbox(n)), 1.0);
}

}  // namespace

SpinConfig fixture_flat(int n) { return base_box(n); }

SpinConfig fixture_single_bump(int n) {
  SpinConfig cfg = base_box(n);
  cfg.set(P3{1, 1, 1}, +1);
  return cfg;
}

SpinConfig fixture_column(int n, int h) {
  SpinConfig cfg = base_box(n);
  for (int k = 0; k < h; ++k) cfg.set(P3{1, 1, 2 * k + 1}, +1);
  return cfg;
}

SpinConfig fixture_nested(int n) {
  SpinConfig cfg = base_box(n);
  for (int cx = -1; cx <= 3; cx += 2)
    for (int cy = -1; cy <= 3; cy += 2) cfg.set(P3{cx, cy, 1}, +1);
  cfg.set(P3{1, 1, 3}, +1);
  return cfg;
}

SpinConfig fixture_mushroom(int n) {
  SpinConfig cfg = base_box(n);
  cfg.set(P3{1, 1, 1}, +1);
  cfg.set(P3{1, 1, 3}, +1);
  cfg.set(P3{3, 1, 3}, +1);  // overhangs the minus cell at (3,1,1)
  return cfg;
}

SpinConfig fixture_diagonal(int n) {
  SpinConfig cfg = base_box(n);
  cfg.set(P3{1, 1, 1}, +1);
  cfg.set(P3{3, 3, 3}, +1);
  return cfg;
}

SpinConfig fixture_soup(int n, std::uint64_t seed, double flip_prob, int band) {
  SpinConfig cfg = base_box(n);
  const Region& r = cfg.region;
  // self-contained xorshift so the fixture stays frozen even if the library
  // rng ever changes
  std::uint64_t s = seed ? seed : 0x9e3779b97f4a7c15ull;
  auto unit = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return double(s >> 11) * 0x1.0p-53;
  };
  for (int cx = 2 * r.lo.x + 1; cx < 2 * r.hi.x; cx += 2)
    for (int cy = 2 * r.lo.y + 1; cy < 2 * r.hi.y; cy += 2)
      for (int cz = -2 * band + 1; cz <= 2 * band - 1; cz += 2) {
        P3 c{cx, cy, cz};
        if (unit() < flip_prob)
          cfg.set(c, std::int8_t(-SpinConfig::boundary_spin(c)));
      }
  return cfg;
}

}  // namespace oracle
