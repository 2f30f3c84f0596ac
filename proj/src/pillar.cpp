// Pillars: extraction, cut points, the rooted increment decomposition,
// source-point search, base/spine split, truncation, and the flat-grid probe
// used inside conditional dynamics.

#include "iflab/pillar.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <unordered_set>

namespace iflab {

namespace {

constexpr P3 kRootCell{1, 1, 1};

// bounding faces of a standalone cell set
std::vector<P3> bounding_faces(const std::vector<P3>& cells) {
  std::unordered_set<Key> in;
  in.reserve(cells.size() * 2);
  for (const P3& c : cells) in.insert(key_of(c));
  std::vector<P3> out;
  for (const P3& c : cells)
    for (int a = 0; a < 3; ++a)
      for (int s = -1; s <= 1; s += 2) {
        P3 d = c, f = c;
        (a == 0 ? d.x : a == 1 ? d.y : d.z) += 2 * s;
        (a == 0 ? f.x : a == 1 ? f.y : f.z) += s;
        if (!in.count(key_of(d))) out.push_back(f);
      }
  std::sort(out.begin(), out.end());
  return out;
}

void erase_one(std::vector<P3>& v, const P3& p) {
  auto it = std::lower_bound(v.begin(), v.end(), p);
  assert(it != v.end() && *it == p);
  v.erase(it);
}

std::vector<P3> side_faces(const P3& cell) {
  return {P3{cell.x - 1, cell.y, cell.z}, P3{cell.x + 1, cell.y, cell.z},
          P3{cell.x, cell.y - 1, cell.z}, P3{cell.x, cell.y + 1, cell.z}};
}

// walls of the interface with the pillar's faces removed: components, their
// top heights (doubled), and projected elements
struct RestWall {
  std::vector<P3> proj;
  int top2 = 0;
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // projection bounding box
};

std::vector<RestWall> rest_walls(const Interface& I, const Pillar& P) {
  std::unordered_set<Key> pillar_faces;
  for (const P3& f : P.faces) pillar_faces.insert(key_of(f));
  std::vector<P3> rest;
  for (const Wall& w : classify(I).walls)
    for (const P3& f : w.faces)
      if (!pillar_faces.count(key_of(f))) rest.push_back(f);

  std::vector<RestWall> out;
  for (const auto& comp : star_components(rest)) {
    RestWall rw;
    rw.top2 = top_height2(comp);
    std::unordered_set<Key> seen;
    for (const P3& f : comp) {
      P3 u = project(f);
      if (seen.insert(key_of(u)).second) rw.proj.push_back(u);
    }
    rw.x0 = rw.x1 = rw.proj[0].x;
    rw.y0 = rw.y1 = rw.proj[0].y;
    for (const P3& u : rw.proj) {
      rw.x0 = std::min(rw.x0, u.x);
      rw.x1 = std::max(rw.x1, u.x);
      rw.y0 = std::min(rw.y0, u.y);
      rw.y1 = std::max(rw.y1, u.y);
    }
    out.push_back(std::move(rw));
  }
  return out;
}

SourcePoint source_impl(const Interface& I, const Pillar& P,
                        const std::vector<P3>& cuts, const P3& x, int T,
                        const PillarParams& par) {
  SourcePoint sp;
  if (cuts.empty()) return sp;
  std::vector<RestWall> walls = rest_walls(I, P);
  const Region& r = I.region;
  long long rad = (long long)par.R0 * T;
  long long rad2_4 = 4 * rad * rad;

  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const P3& v = cuts[i];
    std::vector<P3> path = staircase_path(x, P3{v.x, v.y, 0});
    int px0 = x.x, px1 = x.x, py0 = x.y, py1 = x.y;
    for (const P3& p : path) {
      px0 = std::min(px0, p.x);
      px1 = std::max(px1, p.x);
      py0 = std::min(py0, p.y);
      py1 = std::max(py1, p.y);
    }
    // walls can only live inside the region (the boundary condition is flat
    // past it), so a cylinder reaching beyond the box has nothing to miss;
    // only a path running into the boundary truncates the search
    bool clipped = px0 <= 2 * r.lo.x + 1 || px1 >= 2 * r.hi.x - 1 ||
                   py0 <= 2 * r.lo.y + 1 || py1 >= 2 * r.hi.y - 1;
    bool good = true;
    for (const RestWall& w : walls) {
      if (v.z > w.top2) continue;  // too short to block this cut point
      // box gap test before scanning elements
      long long gx = std::max({0, w.x0 - px1, px0 - w.x1});
      long long gy = std::max({0, w.y0 - py1, py0 - w.y1});
      if (gx * gx + gy * gy > rad2_4) continue;
      bool blocks = false;
      for (const P3& u : w.proj)
        if (in_cylinder(u, path, rad)) {
          blocks = true;
          break;
        }
      if (blocks) {
        good = false;
        break;
      }
    }
    sp.clipped = sp.clipped || clipped;
    if (good) {
      sp.tau = int(i) + 1;
      sp.cell = v;
      sp.found = true;
      return sp;
    }
  }
  return sp;
}

}  // namespace

int Pillar::height() const {
  if (cells.empty()) return negative ? -1 : 0;
  return (top_height2(faces)) / 2;
}

Pillar extract_pillar(const Interface& I, const P3& x) {
  const Region& r = I.region;
  assert(is_face(x) && is_horizontal(x) && x.z == 0);
  assert(x.x > 2 * r.lo.x && x.x < 2 * r.hi.x && x.y > 2 * r.lo.y &&
         x.y < 2 * r.hi.y);
  SpinConfig cfg = two_phase_config(I);

  Pillar P;
  P.root = x;
  P3 start{x.x, x.y, 1};
  if (cfg.at(start) != +1) {
    P.negative = cfg.at(P3{x.x, x.y, -1}) != +1;
    return P;
  }

  std::unordered_set<Key> in;
  std::vector<P3> stack{start};
  in.insert(key_of(start));
  while (!stack.empty()) {
    P3 c = stack.back();
    stack.pop_back();
    P.cells.push_back(c);
    for (const P3& d : star_cells(c)) {
      if (d.z < 1 || !r.contains_cell(d)) continue;
      if (cfg.at(d) != +1) continue;
      if (in.insert(key_of(d)).second) stack.push_back(d);
    }
  }
  std::sort(P.cells.begin(), P.cells.end());

  for (const P3& c : P.cells) {
    for (int a = 0; a < 3; ++a)
      for (int s = -1; s <= 1; s += 2) {
        P3 d = c, f = c;
        (a == 0 ? d.x : a == 1 ? d.y : d.z) += 2 * s;
        (a == 0 ? f.x : a == 1 ? f.y : f.z) += s;
        if (f.z <= 0) continue;
        if (!in.count(key_of(d))) P.faces.push_back(f);
      }
    if (c.x == 2 * r.lo.x + 1 || c.x == 2 * r.hi.x - 1 ||
        c.y == 2 * r.lo.y + 1 || c.y == 2 * r.hi.y - 1 ||
        c.z == 2 * r.hi.z - 1)
      P.clipped = true;
  }
  std::sort(P.faces.begin(), P.faces.end());
  return P;
}

std::vector<P3> cut_points(const Pillar& P) {
  assert(!P.cells.empty());
  std::map<int, std::pair<int, P3>> levels;  // z -> (count, cell)
  for (const P3& c : P.cells) {
    auto& e = levels[c.z];
    ++e.first;
    e.second = c;
  }
  std::vector<P3> cuts;
  for (auto& [z, e] : levels)
    if (e.first == 1) cuts.push_back(e.second);
  return cuts;  // map iteration is height order
}

Increment trivial_increment() {
  Increment X;
  X.cells = {P3{1, 1, 1}, P3{1, 1, 3}};
  X.top = P3{1, 1, 3};
  X.faces = bounding_faces(X.cells);
  erase_one(X.faces, P3{1, 1, 0});
  erase_one(X.faces, P3{1, 1, 4});
  return X;
}

Remainder trivial_remainder() {
  Remainder R;
  R.cells = {P3{1, 1, 1}};
  R.faces = bounding_faces(R.cells);
  erase_one(R.faces, P3{1, 1, 0});
  return R;
}

bool Increment::trivial() const {
  static const Increment t = trivial_increment();
  return *this == t;
}

int Remainder::height() const {
  int top = 1;
  for (const P3& c : cells) top = std::max(top, c.z);
  return (top - 1) / 2;
}

IncrementDecomposition increments(const Pillar& P) {
  std::vector<P3> cuts = cut_points(P);
  assert(!cuts.empty());
  IncrementDecomposition out;

  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const P3 &v = cuts[k], &w = cuts[k + 1];
    Increment X;
    for (const P3& c : P.cells)
      if (c.z >= v.z && c.z <= w.z) X.cells.push_back(c);
    X.faces = bounding_faces(X.cells);
    erase_one(X.faces, P3{v.x, v.y, v.z - 1});
    erase_one(X.faces, P3{w.x, w.y, w.z + 1});
    P3 t = kRootCell - v;
    for (P3& c : X.cells) c = c + t;
    for (P3& f : X.faces) f = f + t;
    X.top = w + t;
    out.incs.push_back(std::move(X));
  }

  const P3& v = cuts.back();
  for (const P3& c : P.cells)
    if (c.z >= v.z) out.rem.cells.push_back(c);
  out.rem.faces = bounding_faces(out.rem.cells);
  erase_one(out.rem.faces, P3{v.x, v.y, v.z - 1});
  P3 t = kRootCell - v;
  for (P3& c : out.rem.cells) c = c + t;
  for (P3& f : out.rem.faces) f = f + t;
  return out;
}

SpinePart recompose_spine(const P3& v, const std::vector<Increment>& incs,
                          const Remainder& rem) {
  SpinePart S;
  P3 cur = v;
  for (const Increment& X : incs) {
    P3 t = cur - kRootCell;
    for (const P3& c : X.cells) S.cells.push_back(c + t);
    for (const P3& f : X.faces) S.faces.push_back(f + t);
    cur = X.top + t;
  }
  P3 t = cur - kRootCell;
  for (const P3& c : rem.cells) S.cells.push_back(c + t);
  for (const P3& f : rem.faces) S.faces.push_back(f + t);
  // consecutive pieces share their cut cell and its side faces
  std::sort(S.cells.begin(), S.cells.end());
  S.cells.erase(std::unique(S.cells.begin(), S.cells.end()), S.cells.end());
  std::sort(S.faces.begin(), S.faces.end());
  S.faces.erase(std::unique(S.faces.begin(), S.faces.end()), S.faces.end());
  return S;
}

std::vector<P3> staircase_path(const P3& a, const P3& b) {
  assert(is_face(a) && a.z == 0 && is_face(b) && b.z == 0);
  std::vector<P3> path{a};
  P3 p = a;
  while (p.x != b.x) {
    p.x += p.x < b.x ? 2 : -2;
    path.push_back(p);
  }
  while (p.y != b.y) {
    p.y += p.y < b.y ? 2 : -2;
    path.push_back(p);
  }
  return path;
}

bool in_cylinder(const P3& u, const std::vector<P3>& path, long long radius) {
  long long r2_4 = 4 * radius * radius;
  for (const P3& p : path)
    if (dist2_doubled(u, p) <= r2_4) return true;
  return false;
}

SourcePoint source_point(const Interface& I, const P3& x, int T,
                         const PillarParams& par) {
  Pillar P = extract_pillar(I, x);
  if (P.empty()) return {};
  return source_impl(I, P, cut_points(P), x, T, par);
}

SpineDecomposition base_spine_split(const Interface& I, const P3& x, int T,
                                    const PillarParams& par) {
  SpineDecomposition dec;
  dec.T = T;
  Pillar P = extract_pillar(I, x);
  if (P.empty()) return dec;
  std::vector<P3> cuts = cut_points(P);
  IncrementDecomposition all = increments(P);
  dec.script_T = all.script_T();

  SourcePoint sp = source_impl(I, P, cuts, x, T, par);
  dec.clipped = sp.clipped || P.clipped;
  if (!sp.found) return dec;
  dec.ok = true;
  dec.tau = sp.tau;
  dec.source = sp.cell;
  dec.incs.assign(all.incs.begin() + (sp.tau - 1), all.incs.end());
  dec.rem = std::move(all.rem);

  SpinePart S = recompose_spine(dec.source, dec.incs, dec.rem);
  dec.spine_cells = std::move(S.cells);
  dec.spine_faces = std::move(S.faces);

  for (const P3& c : P.cells)
    if (c.z < dec.source.z) dec.base_cells.push_back(c);  // the source is spine
  {
    std::unordered_set<Key> spine(dec.spine_faces.size() * 2);
    for (const P3& f : dec.spine_faces) spine.insert(key_of(f));
    for (const P3& f : P.faces)
      if (!spine.count(key_of(f))) dec.base_faces.push_back(f);
    for (const P3& f : side_faces(dec.source)) dec.base_faces.push_back(f);
    std::sort(dec.base_faces.begin(), dec.base_faces.end());
    dec.base_faces.erase(
        std::unique(dec.base_faces.begin(), dec.base_faces.end()),
        dec.base_faces.end());
  }
  for (std::size_t i = 0; i < dec.base_cells.size(); ++i)
    for (std::size_t j = i + 1; j < dec.base_cells.size(); ++j) {
      P3 a = dec.base_cells[i], b = dec.base_cells[j];
      a.z = b.z = 0;
      dec.base_diam2 = std::max(dec.base_diam2, dist2_doubled(a, b));
    }

  int top_z = P.cells.back().z;
  for (const P3& c : P.cells) top_z = std::max(top_z, c.z);
  dec.spine_height = (top_z - dec.source.z) / 2;
  dec.spine_excess = dec.rem.excess();
  for (const Increment& X : dec.incs) dec.spine_excess += X.excess();
  return dec;
}

int spine_excess_at(const SpineDecomposition& dec, int t) {
  assert(dec.ok && t >= dec.tau);
  if (t >= dec.script_T) return dec.spine_excess;
  // bundling increments t+1..scriptT into the remainder costs 4 faces per
  // swallowed junction
  return dec.spine_excess + 4 * (dec.script_T - t);
}

bool is_tame(const SpineDecomposition& dec, const PillarParams& par) {
  if (!dec.ok) return false;
  long long budget = (long long)par.r0 * dec.T;
  return dec.spine_excess <= budget && dec.spine_height <= budget;
}

Interface truncate_interface(const Interface& I,
                             const SpineDecomposition& dec) {
  assert(dec.ok);
  SpinConfig cfg = two_phase_config(I);
  for (const P3& c : dec.spine_cells)
    if (!(c == dec.source)) cfg.set(c, -1);
  return extract_interface(cfg);
}

bool is_T_admissible(const Interface& I_tr, const P3& x,
                     const SpineDecomposition& dec, const PillarParams& par) {
  Pillar P = extract_pillar(I_tr, x);
  if (P.empty()) return false;
  if (P.height() > (dec.source.z + 1) / 2) return false;
  SourcePoint sp = source_impl(I_tr, P, cut_points(P), x, dec.T, par);
  return sp.found && sp.cell == dec.source;
}

IncrementObservables observables(const Increment& X) {
  IncrementObservables o;
  o.f1 = (X.top.x - 1) / 2;
  o.f2 = (X.top.y - 1) / 2;
  o.f3 = (X.top.z - 1) / 2;
  o.fV = int(X.cells.size()) - 1;
  o.fA = int(X.faces.size()) - 4;
  o.m = int(X.faces.size()) - 8;
  return o;
}

bool event_A_h(const SpinConfig& cfg, const P3& x, int h) {
  assert(h >= 1);
  P3 start{x.x, x.y, 1};
  if (cfg.at(start) != +1) return false;
  if (h == 1) return true;
  std::unordered_set<Key> seen{key_of(start)};
  std::vector<P3> stack{start};
  while (!stack.empty()) {
    P3 c = stack.back();
    stack.pop_back();
    if (c.z == 2 * h - 1) return true;
    for (const P3& d : star_cells(c)) {
      if (d.z < 1 || d.z > 2 * h - 1) continue;
      if (cfg.at(d) != +1) continue;
      if (seen.insert(key_of(d)).second) stack.push_back(d);
    }
  }
  return false;
}

// ---- PillarProbe -----------------------------------------------------------

PillarProbe::PillarProbe(const Region& r, const P3& x) : region_(r), x_(x) {
  ox_ = 2 * r.lo.x - 2;
  oy_ = 2 * r.lo.y - 2;
  oz_ = 2 * r.lo.z - 2;
  dx_ = 2 * r.hi.x + 2 - ox_ + 1;
  dy_ = 2 * r.hi.y + 2 - oy_ + 1;
  dz_ = 2 * r.hi.z + 2 - oz_ + 1;
  std::size_t n = std::size_t(dx_) * std::size_t(dy_) * std::size_t(dz_);
  sep_.assign(n, 0);
  ifc_.assign(n, 0);
  plus_.assign(n, 0);
  minus_.assign(n, 0);
  vis_.assign(n, 0);
  level_count_.assign(std::size_t(r.nz()) + 1, 0);
}

std::size_t PillarProbe::idx(int x, int y, int z) const {
  return (std::size_t(x - ox_) * std::size_t(dy_) + std::size_t(y - oy_)) *
             std::size_t(dz_) +
         std::size_t(z - oz_);
}

// column parity of interface faces strictly above the cell
bool PillarProbe::plus_cell(const P3& c) {
  std::size_t k = idx(c.x, c.y, c.z);
  if (plus_[k] == epoch_) return true;
  if (minus_[k] == epoch_) return false;
  int above = 0;
  int ztop = 2 * region_.hi.z;
  for (int z = c.z + 1; z <= ztop; z += 2)
    if (ifc_[idx(c.x, c.y, z)] == epoch_) ++above;
  ((above & 1) ? plus_ : minus_)[k] = epoch_;
  return above & 1;
}

PillarProbe::ProbeStats PillarProbe::stats(const SpinConfig& cfg) {
  const Region& r = region_;
  ++epoch_;
  if (epoch_ == 0) {  // stamp wrap: wipe and restart
    std::fill(sep_.begin(), sep_.end(), 0);
    std::fill(ifc_.begin(), ifc_.end(), 0);
    std::fill(plus_.begin(), plus_.end(), 0);
    std::fill(minus_.begin(), minus_.end(), 0);
    std::fill(vis_.begin(), vis_.end(), 0);
    epoch_ = 1;
  }

  // separating faces over the region padded by one frozen cell
  int cx1 = 2 * r.hi.x + 1, cy1 = 2 * r.hi.y + 1, cz1 = 2 * r.hi.z + 1;
  stack_.clear();
  for (int cx = 2 * r.lo.x - 1; cx <= cx1; cx += 2)
    for (int cy = 2 * r.lo.y - 1; cy <= cy1; cy += 2)
      for (int cz = 2 * r.lo.z - 1; cz <= cz1; cz += 2) {
        P3 c{cx, cy, cz};
        std::int8_t sc = cfg.at(c);
        if (cx + 2 <= cx1 && cfg.at(P3{cx + 2, cy, cz}) != sc)
          sep_[idx(cx + 1, cy, cz)] = epoch_;
        if (cy + 2 <= cy1 && cfg.at(P3{cx, cy + 2, cz}) != sc)
          sep_[idx(cx, cy + 1, cz)] = epoch_;
        if (cz + 2 <= cz1 && cfg.at(P3{cx, cy, cz + 2}) != sc)
          sep_[idx(cx, cy, cz + 1)] = epoch_;
      }

  // spanning component, seeded from the flat ring in the pad
  for (int cx = 2 * r.lo.x - 1; cx <= cx1; cx += 2)
    for (int cy = 2 * r.lo.y - 1; cy <= cy1; cy += 2) {
      bool inside = cx > 2 * r.lo.x && cx < 2 * r.hi.x && cy > 2 * r.lo.y &&
                    cy < 2 * r.hi.y;
      if (inside) continue;
      std::size_t k = idx(cx, cy, 0);
      if (sep_[k] == epoch_ && ifc_[k] != epoch_) {
        ifc_[k] = epoch_;
        stack_.push_back(P3{cx, cy, 0});
      }
    }
  int glo_x = ox_, ghi_x = ox_ + dx_ - 1;
  int glo_y = oy_, ghi_y = oy_ + dy_ - 1;
  int glo_z = oz_, ghi_z = oz_ + dz_ - 1;
  while (!stack_.empty()) {
    P3 f = stack_.back();
    stack_.pop_back();
    for (const P3& v : face_corners(f))
      for (const P3& g : faces_at_vertex(v)) {
        if (g.x < glo_x || g.x > ghi_x || g.y < glo_y || g.y > ghi_y ||
            g.z < glo_z || g.z > ghi_z)
          continue;
        std::size_t k = idx(g.x, g.y, g.z);
        if (sep_[k] == epoch_ && ifc_[k] != epoch_) {
          ifc_[k] = epoch_;
          stack_.push_back(g);
        }
      }
  }

  // pillar walk over the bubble-free spins
  ProbeStats out;
  P3 start{x_.x, x_.y, 1};
  if (!plus_cell(start)) {
    out.height = plus_cell(P3{x_.x, x_.y, -1}) ? 0 : -1;
    return out;
  }
  std::fill(level_count_.begin(), level_count_.end(), 0);
  int top_z = 1;
  std::vector<P3>& st = stack_;
  st.clear();
  st.push_back(start);
  vis_[idx(start.x, start.y, start.z)] = epoch_;
  while (!st.empty()) {
    P3 c = st.back();
    st.pop_back();
    ++out.cells;
    ++level_count_[std::size_t((c.z - 1) / 2)];
    top_z = std::max(top_z, c.z);
    for (const P3& d : star_cells(c)) {
      if (d.z < 1 || !r.contains_cell(d)) continue;
      std::size_t k = idx(d.x, d.y, d.z);
      if (vis_[k] == epoch_) continue;
      if (!plus_cell(d)) continue;
      vis_[k] = epoch_;
      st.push_back(d);
    }
  }
  out.height = (top_z + 1) / 2;
  for (int lvl = 0; lvl <= (top_z - 1) / 2; ++lvl)
    if (level_count_[std::size_t(lvl)] == 1) ++out.cuts;
  return out;
}

}  // namespace iflab
