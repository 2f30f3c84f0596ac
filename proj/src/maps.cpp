// The four interface-rewriting maps: increment straightening, base
// flattening, and the two window-swap maps on pairs, plus exhaustive
// preimage scans over small spine spaces.
//
// Each map re-derives its guarantees from the output it produced (heights,
// counts, excess deltas are measured on the rebuilt interface, never taken
// from the transform's own bookkeeping); MapReport carries the verdicts.

#include "iflab/maps.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace iflab {

namespace {

constexpr P3 kRoot{1, 1, 1};

// ---- sequence plumbing -------------------------------------------------------

// stack the pieces from `first` on into one rooted remainder
Remainder bundle_tail(const std::vector<Increment>& incs, std::size_t first,
                      const Remainder& rem) {
  std::vector<Increment> tail(incs.begin() + std::ptrdiff_t(first), incs.end());
  SpinePart sp = recompose_spine(kRoot, tail, rem);
  return Remainder{std::move(sp.cells), std::move(sp.faces)};
}

struct SeqRewrite {
  std::vector<Increment> incs;
  Remainder rem;
  bool identity = true;
  std::vector<int> marked;  // absolute positions; T+1 stands for the tail
  int marked_excess = 0;
};

// Marking rule of the increment map on a bare sequence. tau is the absolute
// position of incs[0]; positions above T count as one bundle. The target at
// j0, every later individual position whose excess reaches the target's
// times e^{c_bar/2 (j-j0)}, and possibly the bundle are replaced by straight
// stacks of their own height.
SeqRewrite psi_sequence(const std::vector<Increment>& incs, const Remainder& rem,
                        int tau, int j0, int T, double c_bar) {
  const int script_T = tau + int(incs.size()) - 1;
  assert(j0 >= tau && j0 <= T && T <= script_T);
  SeqRewrite out;
  if (incs[std::size_t(j0 - tau)].trivial()) {
    out.incs = incs;
    out.rem = rem;
    return out;
  }
  out.identity = false;
  const int m0 = incs[std::size_t(j0 - tau)].excess();
  auto threshold = [&](int j) {
    return double(m0) * std::exp(0.5 * c_bar * double(j - j0));
  };
  for (int j = tau; j <= T; ++j) {
    const Increment& X = incs[std::size_t(j - tau)];
    const bool hit = j == j0 || (j > j0 && double(X.excess()) >= threshold(j));
    if (!hit) {
      out.incs.push_back(X);
      continue;
    }
    out.marked.push_back(j);
    out.marked_excess += X.excess();
    out.incs.insert(out.incs.end(), std::size_t(X.height()), trivial_increment());
  }
  // the bundle's straightenable excess is what its own pieces carry; the
  // merged remainder's face count would bill a straight stack 4 per cell
  int tail_m = rem.excess();
  for (std::size_t k = std::size_t(T + 1 - tau); k < incs.size(); ++k)
    tail_m += incs[k].excess();
  if (tail_m > 0 && double(tail_m) >= threshold(T + 1)) {
    Remainder tail = bundle_tail(incs, std::size_t(T + 1 - tau), rem);
    out.marked.push_back(T + 1);
    out.marked_excess += tail_m;
    out.incs.insert(out.incs.end(), std::size_t(tail.height()), trivial_increment());
    out.rem = trivial_remainder();
  } else {
    out.incs.insert(out.incs.end(), incs.begin() + std::ptrdiff_t(T + 1 - tau),
                    incs.end());
    out.rem = rem;
  }
  return out;
}

bool wall_set_roundtrips(const Interface& I) {
  try {
    return reconstruct(standard_wall_representation(I)) == I;
  } catch (const std::exception&) {
    return false;
  }
}

int pillar_height(const Interface& I, const P3& x) {
  return extract_pillar(I, x).height();
}

// leading run of trivial increments of the full decomposition at x
int leading_trivials(const Interface& I, const P3& x) {
  Pillar P = extract_pillar(I, x);
  if (P.empty()) return 0;
  IncrementDecomposition full = increments(P);
  int lead = 0;
  while (lead < full.script_T() && full.incs[std::size_t(lead)].trivial()) ++lead;
  return lead;
}

void fill_identity_report(MapReport& r) {
  r.identity = true;
  r.valid = true;
  r.height_preserved = true;
  r.count_ok = true;
  r.gain_ok = true;
  r.prefix_preserved = true;
  r.excess_monotone_ok = true;
  r.excess_identity_ok = true;
}

}  // namespace

Interface graft_spine(const Interface& I_tr, const P3& source,
                      const std::vector<Increment>& incs, const Remainder& rem) {
  SpinConfig cfg = two_phase_config(I_tr);
  SpinePart sp = recompose_spine(source, incs, rem);
  for (const P3& c : sp.cells) {
    if (!cfg.region.contains_cell(c))
      throw std::runtime_error("graft_spine: spine leaves the region at " +
                               to_string(c));
    cfg.set(c, +1);
  }
  return extract_interface(cfg);
}

// ---- increment map -------------------------------------------------------------

Interface psi_i(const Interface& I, const P3& x, int i, const MapParams& par,
                MapReport* rep) {
  MapReport r;
  r.map = "psi";
  SpineDecomposition dec = base_spine_split(I, x, par.T, par.pillar);
  if (!dec.ok) throw std::invalid_argument("psi_i: no source point at x");
  if (dec.script_T < par.T)
    throw std::invalid_argument("psi_i: pillar has fewer increments than T");
  if (i < 0 || dec.tau + i > par.T)
    throw std::out_of_range("psi_i: target position out of range");
  const int j0 = dec.tau + i;
  r.j0 = j0;

  SeqRewrite rw = psi_sequence(dec.incs, dec.rem, dec.tau, j0, par.T, par.c_bar);
  r.identity = rw.identity;
  r.marked = rw.marked;
  r.marked_excess = rw.marked_excess;
  if (rw.identity) {
    fill_identity_report(r);
    if (rep) *rep = r;
    return I;
  }

  Interface J =
      graft_spine(truncate_interface(I, dec), dec.source, rw.incs, rw.rem);

  r.excess_delta = I.size() - J.size();
  r.gain_ok = 3 * r.excess_delta >= r.marked_excess;
  r.height_preserved = pillar_height(I, x) == pillar_height(J, x);
  SpineDecomposition out = base_spine_split(J, x, par.T, par.pillar);
  r.valid = out.ok && out.script_T >= par.T && wall_set_roundtrips(J);
  r.count_ok = out.ok && out.script_T >= dec.script_T;
  r.excess_monotone_ok = out.ok && out.spine_excess <= dec.spine_excess;
  const std::size_t keep = std::size_t(j0 - dec.tau);
  r.prefix_preserved =
      out.ok && out.tau == dec.tau && out.source == dec.source &&
      out.incs.size() >= keep &&
      std::equal(dec.incs.begin(), dec.incs.begin() + std::ptrdiff_t(keep),
                 out.incs.begin()) &&
      truncate_interface(J, out).faces == truncate_interface(I, dec).faces;
  if (rep) *rep = r;
  return J;
}

// ---- base map ------------------------------------------------------------------

Interface phi_base(const Interface& I, const P3& x, const MapParams& par,
                   MapReport* rep) {
  MapReport r;
  r.map = "phi_base";
  SpineDecomposition dec = base_spine_split(I, x, par.T, par.pillar);
  if (!dec.ok) throw std::invalid_argument("phi_base: no source point at x");
  r.threshold = par.K * std::log(double(par.T));
  r.source_height = double(dec.source.z) / 2.0;
  r.base_diam = std::sqrt(double(dec.base_diam2)) / 2.0;
  if (r.source_height <= r.threshold && r.base_diam <= r.threshold) {
    fill_identity_report(r);
    if (rep) *rep = r;
    return I;
  }
  r.identity = false;

  Interface Itr = truncate_interface(I, dec);
  WallCollection coll = standard_wall_representation(Itr);
  std::vector<GroupOfWalls> groups = groups_of_walls(coll);
  std::vector<int> group_of(coll.walls.size(), -1);
  for (int g = 0; g < int(groups.size()); ++g)
    for (int w : groups[g].wall_ids) group_of[std::size_t(w)] = g;

  std::vector<char> in_nested(coll.walls.size(), 0);
  std::vector<char> marked(groups.size(), 0);
  auto mark_nested = [&](const P3& u) {
    for (int w : nested_walls(u, coll)) {
      in_nested[std::size_t(w)] = 1;
      marked[std::size_t(group_of[std::size_t(w)])] = 1;
    }
  };
  const P3 rho_v{dec.source.x, dec.source.y, 0};
  mark_nested(rho_v);
  const P3 plaq[5] = {x,
                      {x.x + 2, x.y, 0},
                      {x.x - 2, x.y, 0},
                      {x.x, x.y + 2, 0},
                      {x.x, x.y - 2, 0}};
  for (const P3& f : plaq) mark_nested(f);

  // Walls pressed flat against x: their projection owns one of x's edges,
  // exactly where the new column wall will sit. They are not nested around x
  // but have to go with the rest.
  const P3 xedge[4] = {{x.x + 1, x.y, 0},
                       {x.x - 1, x.y, 0},
                       {x.x, x.y + 1, 0},
                       {x.x, x.y - 1, 0}};
  for (std::size_t w = 0; w < coll.walls.size(); ++w) {
    if (marked[std::size_t(group_of[w])]) continue;
    for (const P3& f : coll.walls[w].faces) {
      const P3 p{f.x, f.y, 0};
      if (p == xedge[0] || p == xedge[1] || p == xedge[2] || p == xedge[3]) {
        marked[std::size_t(group_of[w])] = 1;
        break;
      }
    }
  }

  // Pinch level: the highest level below the source where the nested walls
  // alone squeeze the lifted region down to a single cell.
  {
    WallCollection aux;
    aux.region = coll.region;
    for (std::size_t w = 0; w < coll.walls.size(); ++w)
      if (in_nested[w]) aux.walls.push_back(coll.walls[w]);
    SpinConfig sig = two_phase_config(reconstruct(aux));
    const Region& rg = sig.region;
    for (int z2 = dec.source.z - 2; z2 >= 1 && r.h_dagger2 == 0; z2 -= 2) {
      int plus = 0;
      for (int cy = 2 * rg.lo.y + 1; cy < 2 * rg.hi.y && plus < 2; cy += 2)
        for (int cx = 2 * rg.lo.x + 1; cx < 2 * rg.hi.x && plus < 2; cx += 2)
          if (sig.at(P3{cx, cy, z2}) > 0) ++plus;
      if (plus == 1) r.h_dagger2 = z2;
    }
  }

  const std::vector<P3> path = staircase_path(x, rho_v);
  const long long rad = (long long)par.pillar.R0 * par.T;

  // witness wall: the first one in the cylinder, outside the nested sets,
  // reaching the pinch level in place
  if (r.h_dagger2 > 0) {
    Classification ctr = classify(Itr);
    assert(ctr.walls.size() == coll.walls.size());
    for (std::size_t w = 0; w < coll.walls.size(); ++w) {
      if (in_nested[w]) continue;
      assert(ctr.walls[w].index == coll.walls[w].index);
      if (!in_cylinder(coll.walls[w].index, path, rad)) continue;
      if (top_height2(ctr.walls[w].faces) >= r.h_dagger2 + 1) {
        r.has_y_dagger = true;
        r.y_dagger = coll.walls[w].index;
        marked[std::size_t(group_of[w])] = 1;
        break;
      }
    }
  }

  WallCollection kept;
  kept.region = coll.region;
  for (std::size_t w = 0; w < coll.walls.size(); ++w) {
    if (marked[std::size_t(group_of[w])])
      r.removed_excess += wall_excess(coll.walls[w].faces);
    else
      kept.walls.push_back(coll.walls[w]);
  }

  // tallest leftover wall in the cylinder decides the column height
  Interface flattened = reconstruct(kept);
  int bold_h = 1;
  for (const Wall& w : classify(flattened).walls)
    if (in_cylinder(w.index, path, rad))
      bold_h = std::max(bold_h, 1 + top_height2(w.faces) / 2);
  const int h_star = std::max(bold_h, (dec.source.z + 1) / 2);
  r.h_star = h_star;

  StandardWall column;
  column.index = x;
  for (int l = 0; l < h_star; ++l) {
    column.faces.push_back(P3{x.x - 1, x.y, 2 * l + 1});
    column.faces.push_back(P3{x.x + 1, x.y, 2 * l + 1});
    column.faces.push_back(P3{x.x, x.y - 1, 2 * l + 1});
    column.faces.push_back(P3{x.x, x.y + 1, 2 * l + 1});
  }
  std::sort(column.faces.begin(), column.faces.end());
  auto at = std::lower_bound(
      kept.walls.begin(), kept.walls.end(), column,
      [](const StandardWall& a, const StandardWall& b) { return a.index < b.index; });
  kept.walls.insert(at, column);

  const P3 new_source{x.x, x.y, 2 * h_star - 1};
  Interface J = graft_spine(reconstruct(kept), new_source, dec.incs, dec.rem);

  r.excess_delta = I.size() - J.size();
  r.excess_identity_ok = r.excess_delta == r.removed_excess - 4 * h_star;
  int below_source = 0;
  {
    IncrementDecomposition full = increments(extract_pillar(I, x));
    for (int t = 0; t < dec.tau && t < full.script_T(); ++t)
      below_source += full.incs[std::size_t(t)].excess();
  }
  const std::int64_t d = r.excess_delta;
  r.gain_ok = d >= 2 * (h_star - 1) && d >= 0 && d * d >= dec.base_diam2 &&
              3 * d >= below_source;
  r.height_preserved = pillar_height(I, x) == pillar_height(J, x);
  SpineDecomposition out = base_spine_split(J, x, par.T, par.pillar);
  r.valid = out.ok && wall_set_roundtrips(J);
  r.count_ok = out.ok && out.script_T >= par.T;
  r.first_trivial = leading_trivials(J, x);
  r.excess_monotone_ok = out.ok && out.spine_excess == dec.spine_excess;
  // the old spine sequence survives verbatim on top of the column
  {
    IncrementDecomposition full = increments(extract_pillar(J, x));
    const std::size_t n = dec.incs.size();
    r.prefix_preserved =
        full.incs.size() == std::size_t(h_star - 1) + n &&
        std::equal(dec.incs.begin(), dec.incs.end(), full.incs.end() - std::ptrdiff_t(n)) &&
        full.rem == dec.rem;
  }
  if (rep) *rep = r;
  return J;
}

// ---- pair maps -----------------------------------------------------------------

namespace {

bool trivial_at(const SpineDecomposition& d, int p) {
  return p >= d.tau && p <= d.script_T && d.incs[std::size_t(p - d.tau)].trivial();
}

}  // namespace

std::pair<Interface, Interface> phi_mix(const Interface& I1, const Interface& I2,
                                        const P3& x, int j, int k,
                                        const MapParams& par, MapReport* rep) {
  MapReport r;
  r.map = "phi_mix";
  SpineDecomposition d1 = base_spine_split(I1, x, par.T, par.pillar);
  SpineDecomposition d2 = base_spine_split(I2, x, par.T, par.pillar);
  r.pair_ok = d1.ok && d2.ok && d1.script_T >= par.T && d2.script_T >= par.T;
  if (!r.pair_ok) {
    fill_identity_report(r);
    if (rep) *rep = r;
    return {I1, I2};
  }

  int tauL = 0;
  for (int p = std::max(j, 1 + par.L); p <= std::min(k, par.T - par.L) && !tauL; ++p) {
    bool run = true;
    for (int q = p - par.L; q <= p + par.L && run; ++q)
      run = trivial_at(d1, q) && trivial_at(d2, q);
    if (run) tauL = p;
  }
  if (tauL == 0) {
    fill_identity_report(r);
    if (rep) *rep = r;
    return {I1, I2};
  }
  r.identity = false;
  r.tau_junction = tauL;

  auto splice = [&](const SpineDecomposition& keep, const SpineDecomposition& from) {
    std::vector<Increment> seq(keep.incs.begin(),
                               keep.incs.begin() + (tauL - keep.tau + 1));
    seq.insert(seq.end(), from.incs.begin() + (tauL + 1 - from.tau), from.incs.end());
    return seq;
  };
  Interface J1 =
      graft_spine(truncate_interface(I1, d1), d1.source, splice(d1, d2), d2.rem);
  Interface J2 =
      graft_spine(truncate_interface(I2, d2), d2.source, splice(d2, d1), d1.rem);

  r.excess_delta = (I1.size() + I2.size()) - (J1.size() + J2.size());
  r.gain_ok = r.excess_delta == 0;
  r.height_preserved = pillar_height(I1, x) + pillar_height(I2, x) ==
                       pillar_height(J1, x) + pillar_height(J2, x);
  SpineDecomposition o1 = base_spine_split(J1, x, par.T, par.pillar);
  SpineDecomposition o2 = base_spine_split(J2, x, par.T, par.pillar);
  r.valid = o1.ok && o2.ok && o1.script_T >= par.T && o2.script_T >= par.T &&
            wall_set_roundtrips(J1) && wall_set_roundtrips(J2);
  r.count_ok =
      o1.ok && o2.ok && o1.script_T + o2.script_T == d1.script_T + d2.script_T;
  r.prefix_preserved =
      o1.ok && o2.ok && o1.tau == d1.tau && o2.tau == d2.tau &&
      o1.source == d1.source && o2.source == d2.source &&
      std::equal(d1.incs.begin(), d1.incs.begin() + (tauL - d1.tau + 1),
                 o1.incs.begin()) &&
      std::equal(d2.incs.begin(), d2.incs.begin() + (tauL - d2.tau + 1),
                 o2.incs.begin());
  r.excess_monotone_ok = true;
  if (rep) *rep = r;
  return {J1, J2};
}

std::pair<Interface, Interface> phi_stat(const Interface& I1, const Interface& I2,
                                         const P3& x, int j, int jp, int T1,
                                         int T2, const MapParams& par,
                                         MapReport* rep) {
  MapReport r;
  r.map = "phi_stat";
  SpineDecomposition d1 = base_spine_split(I1, x, T1, par.pillar);
  SpineDecomposition d2 = base_spine_split(I2, x, T2, par.pillar);
  r.pair_ok = d1.ok && d2.ok && d1.script_T >= T1 && d2.script_T >= T2;
  if (!r.pair_ok) {
    fill_identity_report(r);
    if (rep) *rep = r;
    return {I1, I2};
  }

  const double depth =
      std::min(std::min(double(j) - par.K * std::log(double(T1)),
                        double(jp) - par.K * std::log(double(T2))),
               double(std::min(T1 - j, T2 - jp)));
  const int D = int(std::floor(depth));
  auto run_at = [&](int c1, int c2) {
    for (int i = -par.L; i <= par.L; ++i)
      if (!trivial_at(d1, c1 + i) || !trivial_at(d2, c2 + i)) return false;
    return true;
  };
  int tm = 0, tp = 0;
  for (int t = par.L; t <= D - par.L && !tm; ++t)
    if (run_at(j - t, jp - t)) tm = t;
  for (int t = par.L; t <= D - par.L && !tp; ++t)
    if (run_at(j + t, jp + t)) tp = t;
  if (tm == 0 || tp == 0) {
    fill_identity_report(r);
    if (rep) *rep = r;
    return {I1, I2};
  }
  r.identity = false;
  r.tau_minus = tm;
  r.tau_plus = tp;

  auto splice = [&](const SpineDecomposition& keep, int jk,
                    const SpineDecomposition& from, int jf) {
    std::vector<Increment> seq(keep.incs.begin(),
                               keep.incs.begin() + (jk - tm - keep.tau + 1));
    seq.insert(seq.end(), from.incs.begin() + (jf - tm + 1 - from.tau),
               from.incs.begin() + (jf + tp - from.tau + 1));
    seq.insert(seq.end(), keep.incs.begin() + (jk + tp + 1 - keep.tau),
               keep.incs.end());
    return seq;
  };
  Interface J1 = graft_spine(truncate_interface(I1, d1), d1.source,
                             splice(d1, j, d2, jp), d1.rem);
  Interface J2 = graft_spine(truncate_interface(I2, d2), d2.source,
                             splice(d2, jp, d1, j), d2.rem);

  r.excess_delta = (I1.size() + I2.size()) - (J1.size() + J2.size());
  r.gain_ok = r.excess_delta == 0;
  r.height_preserved = pillar_height(I1, x) + pillar_height(I2, x) ==
                       pillar_height(J1, x) + pillar_height(J2, x);
  SpineDecomposition o1 = base_spine_split(J1, x, T1, par.pillar);
  SpineDecomposition o2 = base_spine_split(J2, x, T2, par.pillar);
  r.valid = o1.ok && o2.ok && wall_set_roundtrips(J1) && wall_set_roundtrips(J2);
  r.count_ok = o1.ok && o2.ok && o1.script_T == d1.script_T &&
               o2.script_T == d2.script_T;
  r.prefix_preserved =
      o1.ok && o2.ok && o1.tau == d1.tau && o2.tau == d2.tau &&
      std::equal(d1.incs.begin(), d1.incs.begin() + (j - tm - d1.tau + 1),
                 o1.incs.begin()) &&
      std::equal(d2.incs.begin(), d2.incs.begin() + (jp - tm - d2.tau + 1),
                 o2.incs.begin());
  r.excess_monotone_ok = true;
  if (rep) *rep = r;
  return {J1, J2};
}

// ---- preimage scans ------------------------------------------------------------

namespace {

std::vector<P3> bounding_of(const std::vector<P3>& cells) {
  std::unordered_set<Key> in;
  for (const P3& c : cells) in.insert(key_of(c));
  std::vector<P3> out;
  for (const P3& c : cells)
    for (const P3& f : cell_faces(c)) {
      const P3 other{2 * f.x - c.x, 2 * f.y - c.y, 2 * f.z - c.z};
      if (!in.count(key_of(other))) out.push_back(f);
    }
  std::sort(out.begin(), out.end());
  return out;
}

int bounding_count(const std::vector<P3>& cells) {
  return int(bounding_of(cells).size());
}

}  // namespace

int spine_face_count(const std::vector<Increment>& incs, const Remainder& rem) {
  int total = int(rem.faces.size());
  for (const Increment& X : incs) total += int(X.faces.size()) - 4;
  return total;
}

std::vector<Increment> enumerate_increments(int face_cap, int cell_cap) {
  assert(cell_cap >= 2 && face_cap >= 8);
  const int span = 2 * (cell_cap - 1);  // doubled lateral slack
  std::set<std::vector<Key>> seen;
  std::vector<std::vector<P3>> frontier{{kRoot}};
  seen.insert({key_of(kRoot)});
  std::vector<Increment> out;

  auto admit = [&](const std::vector<P3>& cells) {
    // level census: bottom and top levels are lone cells, every level in
    // between holds at least two (a lone one would be an interior cut)
    int top = 1;
    for (const P3& c : cells) top = std::max(top, c.z);
    std::vector<int> census(std::size_t(top / 2 + 1), 0);
    P3 top_cell{};
    for (const P3& c : cells) {
      ++census[std::size_t(c.z / 2)];
      if (c.z == top) top_cell = c;
    }
    if (census[0] != 1) return;
    if (top > 1 && census[std::size_t(top / 2)] != 1) return;
    for (std::size_t l = 1; l + 1 < census.size(); ++l)
      if (census[l] < 2) return;
    if (top == 1) return;  // a one-cell piece is a remainder, not an increment
    Increment X;
    X.cells = cells;
    X.top = top_cell;
    X.faces = bounding_of(cells);
    auto drop = [&](const P3& f) {
      auto it = std::lower_bound(X.faces.begin(), X.faces.end(), f);
      assert(it != X.faces.end() && *it == f);
      X.faces.erase(it);
    };
    drop(P3{1, 1, 0});
    drop(P3{top_cell.x, top_cell.y, top_cell.z + 1});
    if (int(X.faces.size()) <= face_cap) out.push_back(std::move(X));
  };

  while (!frontier.empty()) {
    std::vector<std::vector<P3>> next;
    for (const std::vector<P3>& cells : frontier) {
      admit(cells);
      if (int(cells.size()) >= cell_cap) continue;
      // a new cell lowers the bounding count by at most 6 (all six of its
      // faces were boundary before), so sets far over budget cannot come back
      if (bounding_count(cells) - 2 >
          face_cap + 6 * (cell_cap - int(cells.size())))
        continue;
      for (const P3& c : cells)
        for (const P3& nb : star_cells(c)) {
          if (nb.z < 1 || nb.z > 2 * cell_cap - 1) continue;
          if (std::abs(nb.x - 1) > span || std::abs(nb.y - 1) > span) continue;
          if (std::binary_search(cells.begin(), cells.end(), nb)) continue;
          std::vector<P3> grown = cells;
          grown.insert(std::upper_bound(grown.begin(), grown.end(), nb), nb);
          if (seen.insert(sorted_keys(grown)).second) next.push_back(std::move(grown));
        }
    }
    frontier = std::move(next);
  }

  std::sort(out.begin(), out.end(), [](const Increment& a, const Increment& b) {
    if (a.faces.size() != b.faces.size()) return a.faces.size() < b.faces.size();
    return a.cells < b.cells;
  });
  return out;
}

ScanResult multiplicity_scan(const std::vector<Increment>& target, int i,
                             const MapParams& par, int max_incs, int face_budget,
                             int cell_cap, long long scan_cap) {
  assert(i >= 0 && max_incs >= 1);
  ScanResult res;
  const Remainder triv = trivial_remainder();
  const int target_faces = spine_face_count(target, triv);
  const std::vector<Increment> alphabet =
      enumerate_increments(face_budget - 1, cell_cap);

  std::vector<Increment> seq;
  seq.reserve(std::size_t(max_incs));
  // depth-first over sequences within the face budget; every position above
  // the target index is applied as an individual position (no tail bundle)
  auto visit = [&](auto&& self, int faces_so_far) -> void {
    if (res.budget_exceeded) return;
    if (!seq.empty()) {
      if (++res.scanned > scan_cap) {
        res.budget_exceeded = true;
        return;
      }
      if (int(seq.size()) > i) {
        SeqRewrite rw =
            psi_sequence(seq, triv, 1, 1 + i, int(seq.size()), par.c_bar);
        if (rw.incs == target && rw.rem == triv)
          ++res.by_delta[faces_so_far + 5 - target_faces];
      }
    }
    if (int(seq.size()) >= max_incs) return;
    for (const Increment& X : alphabet) {
      const int grown = faces_so_far + int(X.faces.size()) - 4;
      if (grown + 5 > face_budget) break;  // alphabet is sorted by face count
      seq.push_back(X);
      self(self, grown);
      seq.pop_back();
      if (res.budget_exceeded) return;
    }
  };
  visit(visit, 0);
  return res;
}

// ---- report export -------------------------------------------------------------

std::string MapReport::to_json() const {
  nlohmann::ordered_json j;
  j["map"] = map;
  j["identity"] = identity;
  j["valid"] = valid;
  j["excess_delta"] = excess_delta;
  j["height_preserved"] = height_preserved;
  j["count_ok"] = count_ok;
  j["gain_ok"] = gain_ok;
  j["prefix_preserved"] = prefix_preserved;
  j["excess_monotone_ok"] = excess_monotone_ok;
  if (map == "psi") {
    j["j0"] = j0;
    j["marked"] = marked;
    j["marked_excess"] = marked_excess;
  } else if (map == "phi_base") {
    j["threshold"] = threshold;
    j["source_height"] = source_height;
    j["base_diam"] = base_diam;
    j["h_star"] = h_star;
    j["h_dagger2"] = h_dagger2;
    j["has_y_dagger"] = has_y_dagger;
    if (has_y_dagger) j["y_dagger"] = to_string(y_dagger);
    j["removed_excess"] = removed_excess;
    j["first_trivial"] = first_trivial;
    j["excess_identity_ok"] = excess_identity_ok;
  } else {
    j["pair_ok"] = pair_ok;
    j["tau_junction"] = tau_junction;
    j["tau_minus"] = tau_minus;
    j["tau_plus"] = tau_plus;
  }
  return j.dump();
}

}  // namespace iflab
