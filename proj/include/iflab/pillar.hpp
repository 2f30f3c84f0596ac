#pragma once

#include <cstdint>
#include <vector>

#include "iflab/interface.hpp"
#include "iflab/lattice.hpp"

namespace iflab {

// Column structure growing out of the flat-plane face x: the *-connected plus
// component strictly above the plane, in the bubble-free configuration of the
// interface.
struct Pillar {
  P3 root{};              // the L0 face the pillar sits on
  std::vector<P3> cells;  // sorted
  std::vector<P3> faces;  // bounding faces above height 0; subset of I
  bool clipped = false;   // touches the sides or top of the region
  bool negative = false;  // empty pillar with a minus cell right below x

  bool empty() const { return cells.empty(); }
  // top of the face closures; 0 for an empty pillar on plus ground, -1 when
  // the cell below the root is minus
  int height() const;
};

Pillar extract_pillar(const Interface& I, const P3& x);

// cells whose slab meets the pillar in exactly one cell, by increasing height
std::vector<P3> cut_points(const Pillar& P);

// Piece of pillar between consecutive cut points (both included), translated
// so the lower cut cell sits at (1,1,1)/2. The faces are the bounding faces
// minus the two horizontal delimiting ones below and above the cut cells.
struct Increment {
  std::vector<P3> cells;  // sorted
  std::vector<P3> faces;  // sorted
  P3 top{};               // rooted upper cut cell

  int height() const { return (top.z - 1) / 2; }
  int excess() const { return int(faces.size()) - 8; }
  bool trivial() const;  // the straight two-cell increment
  friend bool operator==(const Increment&, const Increment&) = default;
};

// everything above the top cut point; keeps its top faces
struct Remainder {
  std::vector<P3> cells;
  std::vector<P3> faces;  // bounding minus the bottom delimiting face
  int excess() const { return int(faces.size()) - 5; }
  int height() const;  // levels above the rooted cut cell
  friend bool operator==(const Remainder&, const Remainder&) = default;
};

Increment trivial_increment();
Remainder trivial_remainder();

struct IncrementDecomposition {
  std::vector<Increment> incs;  // rooted, bottom to top
  Remainder rem;
  int script_T() const { return int(incs.size()); }
};

IncrementDecomposition increments(const Pillar& P);

// stack rooted increments and the remainder back up from the cut cell v
struct SpinePart {
  std::vector<P3> cells, faces;
};
SpinePart recompose_spine(const P3& v, const std::vector<Increment>& incs,
                          const Remainder& rem);

struct PillarParams {
  int R0 = 100;  // cylinder radius per unit of T in the source search
  int r0 = 20;   // tameness budget per unit of T
};

// deterministic flat staircase between two footprint faces, x direction first
std::vector<P3> staircase_path(const P3& a, const P3& b);
// true when u lies within `radius` (in cell units) of some face of the path
bool in_cylinder(const P3& u, const std::vector<P3>& path, long long radius);

// First cut point lying strictly above every wall of the interface-without-
// the-pillar whose projection meets the cylinder of radius R0*T around the
// staircase from x to the cut point's column.
struct SourcePoint {
  int tau = 0;  // 1-based cut index
  P3 cell{};
  bool found = false;
  bool clipped = false;  // a candidate cylinder did not fit in the region
};
SourcePoint source_point(const Interface& I, const P3& x, int T,
                         const PillarParams& par = {});

struct SpineDecomposition {
  bool ok = false;       // source point found
  bool clipped = false;  // pillar or source path touched the region boundary
  int T = 0;
  int tau = 0;       // source cut index, 1-based
  P3 source{};       // v_tau
  int script_T = 0;  // total number of increments of the pillar
  std::vector<Increment> incs;  // rooted, X_tau .. X_scriptT
  Remainder rem;
  std::vector<P3> spine_cells, spine_faces;  // in place (not rooted)
  std::vector<P3> base_cells, base_faces;
  std::int64_t base_diam2 = 0;  // 4x the squared footprint diameter of the base
  int spine_height = 0;      // hgt(P) - 1/2 - hgt(v_tau)
  int spine_excess = 0;      // m(S): increment excesses plus remainder excess
};

SpineDecomposition base_spine_split(const Interface& I, const P3& x, int T,
                                    const PillarParams& par = {});

// excess against a trivial spine of t increments: bundles everything above
// the t-th increment into one remainder
int spine_excess_at(const SpineDecomposition& dec, int t);

bool is_tame(const SpineDecomposition& dec, const PillarParams& par = {});

// interface with the spine above the source cell removed (the source stays)
Interface truncate_interface(const Interface& I, const SpineDecomposition& dec);

// the truncation's pillar must stop right above the source cell and grow a
// spine from it
bool is_T_admissible(const Interface& I_tr, const P3& x,
                     const SpineDecomposition& dec,
                     const PillarParams& par = {});

struct IncrementObservables {
  int f1 = 0, f2 = 0, f3 = 0;  // tip displacement between the two cut cells
  int fV = 0;                  // cells beyond the first
  int fA = 0;                  // faces beyond four
  int m = 0;                   // excess area
};
IncrementObservables observables(const Increment& X);

// raw-configuration event: x's cell is *-connected by plus cells at heights
// strictly between 0 and h to the slab just under height h
bool event_A_h(const SpinConfig& cfg, const P3& x, int h);

// Fast pillar statistics for conditional dynamics: same answers as
// extract_interface + extract_pillar + cut_points, computed on flat scratch
// grids with no allocation on the steady path.
class PillarProbe {
 public:
  PillarProbe(const Region& r, const P3& x);

  struct ProbeStats {
    int height = 0;  // hgt(P_x); 0 or -1 when empty
    int cuts = 0;    // number of cut points
    int cells = 0;
  };
  ProbeStats stats(const SpinConfig& cfg);
  int height(const SpinConfig& cfg) { return stats(cfg).height; }
  int cut_count(const SpinConfig& cfg) { return stats(cfg).cuts; }

 private:
  std::size_t idx(int x, int y, int z) const;
  bool plus_cell(const P3& c);

  Region region_;
  P3 x_;
  int ox_ = 0, oy_ = 0, oz_ = 0;  // grid origin, doubled coordinates
  int dx_ = 0, dy_ = 0, dz_ = 0;  // grid extents
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> sep_, ifc_, plus_, minus_, vis_;
  std::vector<int> level_count_;
  std::vector<P3> stack_;
};

}  // namespace iflab
