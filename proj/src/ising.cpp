#include "iflab/ising.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace iflab {

SpinConfig ground_state(const Region& r, double beta) {
  SpinConfig cfg;
  cfg.region = r;
  cfg.beta = beta;
  cfg.s.resize(r.cell_count());
  for (std::size_t i = 0; i < cfg.s.size(); ++i)
    cfg.s[i] = SpinConfig::boundary_spin(r.cell_at(i));
  return cfg;
}

std::int64_t hamiltonian(const SpinConfig& cfg) {
  const Region& r = cfg.region;
  std::int64_t dis = 0;
  for (std::size_t i = 0; i < cfg.s.size(); ++i) {
    P3 c = r.cell_at(i);
    std::int8_t sc = cfg.s[i];
    for (int a = 0; a < 3; ++a) {
      P3 up = c + unit2(a);
      // positive-direction pairs counted once each, whether the neighbour is
      // internal or frozen
      if (cfg.at(up) != sc) ++dis;
      P3 dn = c - unit2(a);
      // negative direction only contributes for frozen neighbours (an internal
      // one was already counted from the other side)
      if (!r.contains_cell(dn) && SpinConfig::boundary_spin(dn) != sc) ++dis;
    }
  }
  return dis;
}

int disagreements_if(const SpinConfig& cfg, const P3& c, std::int8_t spin) {
  int d = 0;
  for (const P3& w : adj_cells(c))
    if (cfg.at(w) != spin) ++d;
  return d;
}

// ---- rng ---------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t block) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (stream * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL));
  h = splitmix64(h ^ (block * 0xd1342543de82ef95ULL + 0x452821e638d01377ULL));
  return h;
}

double heat_bath_plus_prob(double beta, int field) {
  // P(+) = e^{-beta d+} / (e^{-beta d+} + e^{-beta d-}),  d- - d+ = field
  return 1.0 / (1.0 + std::exp(-beta * field));
}

// ---- sweeps ------------------------------------------------------------------

namespace {

struct FieldScan {
  // neighbour-spin sum at cell index i; region geometry hoisted out of the loop
  const Region& r;
  const std::vector<std::int8_t>& s;
  int nx, ny, nz;
  std::ptrdiff_t sx, sy;

  explicit FieldScan(const SpinConfig& cfg)
      : r(cfg.region), s(cfg.s), nx(r.nx()), ny(r.ny()), nz(r.nz()),
        sx(std::ptrdiff_t(ny) * nz), sy(nz) {}

  int field(int ix, int iy, int iz, std::size_t i) const {
    int f = 0;
    // x
    if (ix > 0) f += s[i - sx];
    else f += bspin_xy(iz);
    if (ix + 1 < nx) f += s[i + sx];
    else f += bspin_xy(iz);
    // y
    if (iy > 0) f += s[i - sy];
    else f += bspin_xy(iz);
    if (iy + 1 < ny) f += s[i + sy];
    else f += bspin_xy(iz);
    // z
    if (iz > 0) f += s[i - 1];
    else f += bspin_z(iz - 1);
    if (iz + 1 < nz) f += s[i + 1];
    else f += bspin_z(iz + 1);
    return f;
  }

  int bspin_xy(int iz) const {  // frozen neighbour at the same height
    int z2 = 2 * r.lo.z + 2 * iz + 1;
    return z2 < 0 ? +1 : -1;
  }
  int bspin_z(int iz) const {  // frozen neighbour above/below the box
    int z2 = 2 * r.lo.z + 2 * iz + 1;
    return z2 < 0 ? +1 : -1;
  }
};

}  // namespace

void sweep(SpinConfig& cfg, Rng& rng, Dynamics dyn) {
  FieldScan fs(cfg);
  const int nx = fs.nx, ny = fs.ny, nz = fs.nz;
  double hb[7];  // field -6,-4,...,6 -> P(+1)
  for (int k = 0; k < 7; ++k) hb[k] = heat_bath_plus_prob(cfg.beta, 2 * k - 6);
  double mr[7];  // metropolis accept prob by current disagreement count
  for (int d = 0; d < 7; ++d) {
    double dH = 6.0 - 2.0 * d;
    mr[d] = dH <= 0 ? 1.0 : std::exp(-cfg.beta * dH);
  }

  std::size_t i = 0;
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int iz = 0; iz < nz; ++iz, ++i) {
        int f = fs.field(ix, iy, iz, i);
        double u = rng.unit();
        if (dyn == Dynamics::heat_bath) {
          cfg.s[i] = u < hb[(f + 6) / 2] ? +1 : -1;
        } else {
          int d = (6 - f * cfg.s[i]) / 2;  // current disagreements
          if (u < mr[d]) cfg.s[i] = -cfg.s[i];
        }
      }
}

void run_chain(const ChainParams& p,
               const std::function<void(const SpinConfig&, std::uint64_t)>& sink,
               const SpinConfig* start, std::uint64_t start_sweep) {
  SpinConfig cfg = start ? *start : ground_state(p.region, p.beta);
  cfg.beta = p.beta;
  std::uint64_t total = std::uint64_t(p.burnin) +
                        std::uint64_t(p.spacing) * std::uint64_t(p.snapshots);
  for (std::uint64_t t = start_sweep + 1; t <= total; ++t) {
    Rng rng(mix_seed(p.seed, p.stream, t));
    sweep(cfg, rng, p.dynamics);
    if (t > std::uint64_t(p.burnin) &&
        (t - std::uint64_t(p.burnin)) % std::uint64_t(p.spacing) == 0)
      sink(cfg, t);
  }
}

void run_conditional_chain(
    const ChainParams& p, const Event& event, const SpinConfig& init,
    const std::function<void(const SpinConfig&, std::uint64_t)>& sink,
    CondStats* stats, const SpinConfig* start, std::uint64_t start_sweep) {
  SpinConfig cfg = start ? *start : init;
  cfg.beta = p.beta;
  if (!event(cfg))
    throw std::runtime_error("conditional chain: initial state violates the event");

  FieldScan fs(cfg);
  const int nx = fs.nx, ny = fs.ny, nz = fs.nz;
  double mr[7];
  for (int d = 0; d < 7; ++d) {
    double dH = 6.0 - 2.0 * d;
    mr[d] = dH <= 0 ? 1.0 : std::exp(-cfg.beta * dH);
  }

  std::uint64_t total = std::uint64_t(p.burnin) +
                        std::uint64_t(p.spacing) * std::uint64_t(p.snapshots);
  for (std::uint64_t t = start_sweep + 1; t <= total; ++t) {
    Rng rng(mix_seed(p.seed, p.stream, t));
    std::size_t i = 0;
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy)
        for (int iz = 0; iz < nz; ++iz, ++i) {
          int f = fs.field(ix, iy, iz, i);
          int d = (6 - f * cfg.s[i]) / 2;
          double u = rng.unit();
          if (stats) ++stats->proposals;
          if (u >= mr[d]) continue;  // plain metropolis rejection
          cfg.s[i] = -cfg.s[i];      // tentatively flip, then check the event
          if (event(cfg)) {
            if (stats) ++stats->accepted;
          } else {
            cfg.s[i] = -cfg.s[i];
            if (stats) ++stats->event_rejects;
          }
        }
    if (t > std::uint64_t(p.burnin) &&
        (t - std::uint64_t(p.burnin)) % std::uint64_t(p.spacing) == 0)
      sink(cfg, t);
  }
}

// ---- exact enumeration ---------------------------------------------------------

namespace {

struct Kahan {
  double sum = 0, c = 0;
  void add(double v) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

ExactTable enumerate_exact(const Region& r, double beta) {
  std::size_t v = r.cell_count();
  if (v > 24)
    throw std::runtime_error("enumerate_exact: region has " + std::to_string(v) +
                             " cells, limit is 24");
  // internal pairs and, per cell, the frozen-neighbour count and field
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> bfield(v, 0), nfrozen(v, 0);
  for (std::size_t i = 0; i < v; ++i) {
    P3 c = r.cell_at(i);
    for (int a = 0; a < 3; ++a) {
      P3 up = c + unit2(a), dn = c - unit2(a);
      if (r.contains_cell(up)) {
        pairs.emplace_back(int(i), int(r.cell_index(up)));
      } else {
        bfield[i] += SpinConfig::boundary_spin(up);
        ++nfrozen[i];
      }
      if (!r.contains_cell(dn)) {
        bfield[i] += SpinConfig::boundary_spin(dn);
        ++nfrozen[i];
      }
    }
  }

  ExactTable t;
  t.region = r;
  t.beta = beta;
  std::uint64_t n = 1ull << v;
  t.prob.resize(n);
  Kahan z;
  for (std::uint64_t bits = 0; bits < n; ++bits) {
    int h = 0;
    for (auto [i, j] : pairs)
      h += int(((bits >> i) ^ (bits >> j)) & 1);
    for (std::size_t i = 0; i < v; ++i) {
      int sp = int((bits >> i) & 1) * 2 - 1;
      // disagreements with frozen neighbours = (#frozen - spin*field)/2
      h += (nfrozen[i] - sp * bfield[i]) / 2;
    }
    double w = std::exp(-beta * double(h));
    t.prob[bits] = w;
    z.add(w);
  }
  for (double& p : t.prob) p /= z.sum;
  t.log_z = std::log(z.sum);
  return t;
}

SpinConfig config_from_bits(const Region& r, double beta, std::uint64_t bits) {
  SpinConfig cfg;
  cfg.region = r;
  cfg.beta = beta;
  cfg.s.resize(r.cell_count());
  for (std::size_t i = 0; i < cfg.s.size(); ++i)
    cfg.s[i] = std::int8_t(int((bits >> i) & 1) * 2 - 1);
  return cfg;
}

double exact_prob(const ExactTable& t, const Event& event) {
  Kahan acc;
  for (std::uint64_t b = 0; b < t.prob.size(); ++b)
    if (event(config_from_bits(t.region, t.beta, b))) acc.add(t.prob[b]);
  return acc.sum;
}

double exact_expect(const ExactTable& t,
                    const std::function<double(const SpinConfig&)>& f) {
  Kahan acc;
  for (std::uint64_t b = 0; b < t.prob.size(); ++b)
    acc.add(t.prob[b] * f(config_from_bits(t.region, t.beta, b)));
  return acc.sum;
}

double exact_cond_prob(const ExactTable& t, const Event& cond, const Event& event) {
  Kahan num, den;
  for (std::uint64_t b = 0; b < t.prob.size(); ++b) {
    SpinConfig cfg = config_from_bits(t.region, t.beta, b);
    if (!cond(cfg)) continue;
    den.add(t.prob[b]);
    if (event(cfg)) num.add(t.prob[b]);
  }
  if (den.sum <= 0) throw std::runtime_error("exact_cond_prob: event has mass 0");
  return num.sum / den.sum;
}

double exact_cond_expect(const ExactTable& t, const Event& cond,
                         const std::function<double(const SpinConfig&)>& f) {
  Kahan num, den;
  for (std::uint64_t b = 0; b < t.prob.size(); ++b) {
    SpinConfig cfg = config_from_bits(t.region, t.beta, b);
    if (!cond(cfg)) continue;
    den.add(t.prob[b]);
    num.add(t.prob[b] * f(cfg));
  }
  if (den.sum <= 0) throw std::runtime_error("exact_cond_expect: event has mass 0");
  return num.sum / den.sum;
}

// ---- dumps ---------------------------------------------------------------------

namespace {

void put_u32(std::ofstream& o, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
  o.write(reinterpret_cast<char*>(b), 4);
}
void put_u64(std::ofstream& o, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
  o.write(reinterpret_cast<char*>(b), 8);
}
std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_spins(const std::string& path, const SpinConfig& cfg, std::uint64_t seed,
                std::uint64_t sweep) {
  int n, m, h;
  if (!cfg.region.centered_nmh(n, m, h))
    throw std::runtime_error("save_spins: only centered regions can be dumped");
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw std::runtime_error("save_spins: cannot open " + path);
  o.write("ISNG1", 5);
  char ver = 0x01;
  o.write(&ver, 1);
  put_u32(o, std::uint32_t(n));
  put_u32(o, std::uint32_t(m));
  put_u32(o, std::uint32_t(h));
  std::uint64_t bbits;
  std::memcpy(&bbits, &cfg.beta, 8);
  put_u64(o, bbits);
  put_u64(o, seed);
  put_u64(o, sweep);
  std::vector<unsigned char> bytes((cfg.s.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < cfg.s.size(); ++i)
    if (cfg.s[i] > 0) bytes[i / 8] |= (1u << (i % 8));
  o.write(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!o) throw std::runtime_error("save_spins: write failed for " + path);
}

LoadedSpins load_spins(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_spins: cannot open " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, "ISNG1", 5) != 0)
    throw std::runtime_error("load_spins: bad magic in " + path);
  char ver;
  in.read(&ver, 1);
  if (ver != 0x01) throw std::runtime_error("load_spins: unknown version");
  int n = int(get_u32(in)), m = int(get_u32(in)), h = int(get_u32(in));
  std::uint64_t bbits = get_u64(in);
  LoadedSpins out;
  double beta;
  std::memcpy(&beta, &bbits, 8);
  out.seed = get_u64(in);
  out.sweep = get_u64(in);
  out.cfg.region = Region::centered(n, m, h);
  out.cfg.beta = beta;
  out.cfg.s.resize(out.cfg.region.cell_count());
  std::vector<unsigned char> bytes((out.cfg.s.size() + 7) / 8);
  in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!in) throw std::runtime_error("load_spins: truncated file " + path);
  for (std::size_t i = 0; i < out.cfg.s.size(); ++i)
    out.cfg.s[i] = (bytes[i / 8] >> (i % 8)) & 1 ? +1 : -1;
  return out;
}

}  // namespace iflab
