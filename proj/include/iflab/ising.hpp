#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "iflab/lattice.hpp"

namespace iflab {

// Spins on the cells of a region, with the rest of space frozen to the
// split boundary condition: +1 strictly below height zero, -1 above.
// (Cell midpoints have half-integer height, so the sign of z decides.)
struct SpinConfig {
  Region region;
  double beta = 1.0;
  std::vector<std::int8_t> s;  // cell_index order, values +-1

  static std::int8_t boundary_spin(const P3& c) { return c.z < 0 ? +1 : -1; }

  std::int8_t at(const P3& c) const {
    return region.contains_cell(c) ? s[region.cell_index(c)] : boundary_spin(c);
  }
  void set(const P3& c, std::int8_t v) { s[region.cell_index(c)] = v; }

  friend bool operator==(const SpinConfig& a, const SpinConfig& b) {
    return a.region == b.region && a.beta == b.beta && a.s == b.s;
  }
};

// all spins equal to the boundary value on their side of the plane
SpinConfig ground_state(const Region& r, double beta);

// number of disagreeing adjacent cell pairs: both pairs internal to the region
// and pairs between a region cell and a frozen outside cell
std::int64_t hamiltonian(const SpinConfig& cfg);

// disagreements cell c would have with its 6 neighbours if it held `spin`
int disagreements_if(const SpinConfig& cfg, const P3& c, std::int8_t spin);

// ---- rng -------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
// one stream per (seed, stream, block); blocks decouple sweeps so that resumed
// runs reproduce uninterrupted ones bit for bit
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t block);

struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed) : g(seed) {}
  std::uint64_t u64() { return g(); }
  double unit() { return double(g() >> 11) * 0x1.0p-53; }  // [0,1), portable
};

// ---- dynamics ----------------------------------------------------------------

enum class Dynamics { heat_bath, metropolis };

// conditional P(spin = +1 | 6 neighbours), field = sum of neighbour spins
double heat_bath_plus_prob(double beta, int field);

// one full lexicographic sweep
void sweep(SpinConfig& cfg, Rng& rng, Dynamics dyn);

struct ChainParams {
  Region region;
  double beta = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // chain index
  int burnin = 200;
  int spacing = 10;  // sweeps between snapshots
  int snapshots = 100;
  Dynamics dynamics = Dynamics::heat_bath;
};

// runs burnin + snapshots*spacing sweeps, calling sink after each spacing-block;
// pass start/start_sweep to resume from a dumped snapshot
void run_chain(const ChainParams& p,
               const std::function<void(const SpinConfig&, std::uint64_t)>& sink,
               const SpinConfig* start = nullptr, std::uint64_t start_sweep = 0);

// ---- conditional sampling ----------------------------------------------------

using Event = std::function<bool(const SpinConfig&)>;

struct CondStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;       // metropolis-accepted and event kept
  std::uint64_t event_rejects = 0;  // metropolis-accepted but event violated
};

// single-flip Metropolis restricted to {cfg : event(cfg)}: a proposal that
// would leave the event set is rejected. init must satisfy the event.
void run_conditional_chain(
    const ChainParams& p, const Event& event, const SpinConfig& init,
    const std::function<void(const SpinConfig&, std::uint64_t)>& sink,
    CondStats* stats = nullptr, const SpinConfig* start = nullptr,
    std::uint64_t start_sweep = 0);

// ---- exact enumeration (small regions) ---------------------------------------

struct ExactTable {
  Region region;
  double beta = 1.0;
  std::vector<double> prob;  // 2^cells entries; bit i of the index = spin of cell i
  double log_z = 0;          // log sum_sigma exp(-beta H)
};

// errors out above 24 cells (the table would not fit)
ExactTable enumerate_exact(const Region& r, double beta);

SpinConfig config_from_bits(const Region& r, double beta, std::uint64_t bits);

double exact_prob(const ExactTable& t, const Event& event);
double exact_expect(const ExactTable& t,
                    const std::function<double(const SpinConfig&)>& f);
// conditional variants; error if the event has probability zero
double exact_cond_prob(const ExactTable& t, const Event& cond, const Event& event);
double exact_cond_expect(const ExactTable& t, const Event& cond,
                         const std::function<double(const SpinConfig&)>& f);

// ---- snapshot dumps ----------------------------------------------------------

// binary layout: "ISNG1", version byte 0x01, n,m,h u32le, beta f64le,
// seed u64le, sweep u64le, spins bit-packed lsb-first in cell_index order
// (+1 -> 1). Only centered regions are representable.
void save_spins(const std::string& path, const SpinConfig& cfg, std::uint64_t seed,
                std::uint64_t sweep);

struct LoadedSpins {
  SpinConfig cfg;
  std::uint64_t seed = 0;
  std::uint64_t sweep = 0;
};
LoadedSpins load_spins(const std::string& path);

// default box half-height for a given lateral half-width
inline int default_hbox(int n) {
  int lg = 0;
  while ((1 << lg) < n) ++lg;  // ceil(log2 n)
  int h = 4 * lg;
  return h < 16 ? 16 : h;
}

}  // namespace iflab
