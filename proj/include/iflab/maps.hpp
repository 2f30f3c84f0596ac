#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "iflab/interface.hpp"
#include "iflab/pillar.hpp"

namespace iflab {

// Knobs shared by the rewriting maps. T is the increment budget of the
// conditioning (positions above T are handled as one bundle), c_bar the decay
// rate of the marking threshold, K the log-T scale that separates bases small
// enough to leave alone, L the half-width of the straight runs the pair maps
// align on.
struct MapParams {
  int T = 8;
  double c_bar = 0.25;
  double K = 2.0;
  int L = 1;
  PillarParams pillar{};
};

// Everything a map asserts about itself, re-derived from the output (the
// transforms never get to grade their own bookkeeping). Fields outside the
// common block are only meaningful for the map named in `map`.
struct MapReport {
  std::string map;
  bool identity = true;
  bool valid = false;            // output re-splits and its wall set round-trips
  int excess_delta = 0;          // |I| - |out| (summed over members for pairs)
  bool height_preserved = false;
  bool count_ok = false;         // increment count stayed within the map's promise
  bool gain_ok = false;          // the map's excess lower bound held
  bool prefix_preserved = false;
  bool excess_monotone_ok = false;

  // increment map
  int j0 = 0;                 // absolute position straightened
  std::vector<int> marked;    // replaced positions; T+1 stands for the tail bundle
  int marked_excess = 0;

  // base map
  double threshold = 0.0;     // K log T
  double source_height = 0.0;
  double base_diam = 0.0;
  int h_star = 0;
  int h_dagger2 = 0;          // doubled height of the pinch level, 0 when absent
  bool has_y_dagger = false;
  P3 y_dagger{};
  int removed_excess = 0;     // walls deleted, measured by their own excess
  int first_trivial = 0;      // leading trivial increments of the output
  bool excess_identity_ok = false;  // excess_delta == removed_excess - 4 h_star

  // pair maps
  int tau_junction = 0;       // splice position (phi_mix)
  int tau_minus = 0, tau_plus = 0;  // window offsets (phi_stat)
  bool pair_ok = false;       // both members decomposed with the needed count

  std::string to_json() const;  // single line, for audit trails
};

// Set the cells of the rooted spine, stacked at `source`, to plus on top of
// the truncated interface and re-extract. Throws if the spine leaves the
// region.
Interface graft_spine(const Interface& I_tr, const P3& source,
                      const std::vector<Increment>& incs, const Remainder& rem);

// Straighten the i-th spine increment (0 targets the source increment): the
// target, every later position whose excess dwarfs the target's by the
// e^{c_bar/2 per step} schedule, and possibly the bundle above position T are
// each replaced by a stack of trivial increments of the same height. Identity
// when the target is already trivial. Keeps the pillar height, the truncation
// and everything below the target; never decreases the increment count and
// recovers at least a third of the replaced excess.
Interface psi_i(const Interface& I, const P3& x, int i, const MapParams& par,
                MapReport* rep = nullptr);

// Flatten the base: when the source sits higher than K log T or the base
// footprint is wider than that, delete the wall groups hugging x and the
// source column (plus the pinch-level witness wall), stand a straight column
// of height h_star under the spine and regrow the spine on top of it.
// Identity when the base is already small. Keeps the pillar height and gains
// excess at least 2((h_star - 1) v diam) over the input.
Interface phi_base(const Interface& I, const P3& x, const MapParams& par,
                   MapReport* rep = nullptr);

// Swap everything above the first common straight run: scan centers in
// [j, k] for a window of 2L+1 positions that is trivial in both members, then
// exchange the increment suffixes above that position. Identity when no such
// window exists. Involution; preserves the total face count.
std::pair<Interface, Interface> phi_mix(const Interface& I1, const Interface& I2,
                                        const P3& x, int j, int k,
                                        const MapParams& par,
                                        MapReport* rep = nullptr);

// Swap the increment windows (j - tau_minus, j + tau_plus] of member one and
// (j' - tau_minus, j' + tau_plus] of member two, where the offsets are the
// smallest with common straight runs at both ends (member counts T1, T2 give
// the search depth). Identity when either run is missing. Involution; keeps
// each member's increment count.
std::pair<Interface, Interface> phi_stat(const Interface& I1, const Interface& I2,
                                         const P3& x, int j, int jp, int T1,
                                         int T2, const MapParams& par,
                                         MapReport* rep = nullptr);

// ---- preimage counting -------------------------------------------------------

struct ScanResult {
  std::map<int, long long> by_delta;  // spine face-count delta -> #preimages
  long long scanned = 0;
  bool budget_exceeded = false;  // hit scan_cap; counts are partial
};

// Exhaustive preimage count of the increment map at index i over all spines
// (increment sequences with a trivial remainder) of at most max_incs
// increments whose recomposed face count stays within face_budget. The target
// is given as the same kind of sequence. Deltas are input minus target face
// count. cell_cap bounds the cells per increment; 4 covers every increment of
// at most 18 faces (five cells already need 20), so budgets up to 19 are
// genuinely exhaustive at the default.
ScanResult multiplicity_scan(const std::vector<Increment>& target, int i,
                             const MapParams& par, int max_incs, int face_budget,
                             int cell_cap = 4, long long scan_cap = 50000000);

// rooted increments with at most face_cap faces and cell_cap cells, sorted by
// (face count, cells); the building blocks of the scan
std::vector<Increment> enumerate_increments(int face_cap, int cell_cap);

// face count of the recomposed spine: sum of piece faces minus the shared
// junction side faces
int spine_face_count(const std::vector<Increment>& incs, const Remainder& rem);

}  // namespace iflab
