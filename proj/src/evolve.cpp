#include "gqmech/evolve.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "gqmech/errors.hpp"

namespace gqm {

namespace {

using Complex = ComplexGrid::Complex;
constexpr Complex kI(0.0, 1.0);
constexpr double kTwoPi = 6.28318530717958647692;

Complex dot_grids(const ComplexGrid& a, const ComplexGrid& b) {
  Complex s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double l2(const ComplexGrid& a) { return std::sqrt(std::abs(dot_grids(a, a))); }

}  // namespace

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw Error("EvolutionConfig: dt must be positive");
  if (steps < 1) throw Error("EvolutionConfig: steps must be >= 1");
  if (!(solve_tol > 0.0)) throw Error("EvolutionConfig: solve_tol must be positive");
  if (record_every < 1) throw Error("EvolutionConfig: record_every >= 1");
}

namespace {

// Solves (1 + i mu H) x = b by CG on the normal equations. For symmetric H
// the system matrix is normal with spectrum on 1 + i mu R, so this
// converges in a handful of iterations.
ComplexGrid solve_crank_nicolson(const QuantumOperator& ham, double mu,
                                 const ComplexGrid& b, const EvolutionConfig& cfg) {
  auto apply_a = [&](const ComplexGrid& v) {
    ComplexGrid hv = ham(v);
    ComplexGrid out = v.like();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + kI * mu * hv[i];
    return out;
  };
  auto apply_at = [&](const ComplexGrid& v) {
    ComplexGrid hv = ham(v);
    ComplexGrid out = v.like();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - kI * mu * hv[i];
    return out;
  };

  const double bnorm = l2(b);
  if (bnorm == 0.0) return b.like();

  ComplexGrid x = b;  // warm start: A is near identity
  ComplexGrid r = apply_a(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  ComplexGrid z = apply_at(r);
  ComplexGrid p = z;
  double zz = std::abs(dot_grids(z, z));

  for (std::size_t it = 0; it < cfg.solve_max_iter; ++it) {
    if (l2(r) <= cfg.solve_tol * bnorm) return x;
    ComplexGrid ap = apply_a(p);
    double denom = std::abs(dot_grids(ap, ap));
    if (denom == 0.0) break;
    double alpha = zz / denom;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    z = apply_at(r);
    double zz_next = std::abs(dot_grids(z, z));
    double beta = zz_next / zz;
    zz = zz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  if (l2(r) <= cfg.solve_tol * bnorm * 10.0) return x;
  throw LinearSolveDiverged("schrodinger_evolve: Crank-Nicolson solve stalled");
}

}  // namespace

EvolutionRecord schrodinger_evolve(const QuantumOperator& hamiltonian,
                                   const ComplexGrid& psi0, const EvolutionConfig& cfg) {
  cfg.validate();

  // Admission: the Hamiltonian must be symmetric for the Cayley step to be
  // unitary. Checked on a pair of Gaussian probes over the grid box.
  {
    std::vector<ComplexGrid> probes;
    Vec c0(psi0.dim()), c1(psi0.dim()), sig(psi0.dim()), k0(psi0.dim(), 0.0),
        k1(psi0.dim(), 0.0);
    for (std::size_t ax = 0; ax < psi0.dim(); ++ax) {
      const Axis& a = psi0.axis(ax);
      const double span = a.hi - a.lo;
      c0[ax] = a.lo + 0.45 * span;
      c1[ax] = a.lo + 0.6 * span;
      sig[ax] = span / 14.0;
      k1[ax] = kTwoPi * 2.0 / span;
    }
    probes.push_back(gaussian_packet(psi0.axes(), psi0.boundary(), c0, sig, k0));
    probes.push_back(gaussian_packet(psi0.axes(), psi0.boundary(), c1, sig, k1));
    double hres = hermiticity_residual(hamiltonian, probes);
    if (hres > cfg.hermiticity_threshold)
      throw NonSymmetricHamiltonian("schrodinger_evolve: hermiticity residual " +
                                    std::to_string(hres));
  }

  EvolutionRecord rec;
  ComplexGrid psi = psi0;
  const double mu = 0.5 * cfg.dt;

  auto record = [&](double t) {
    rec.times.push_back(t);
    rec.norms.push_back(std::abs(inner_product(psi, psi)));
    ComplexGrid hpsi = hamiltonian(psi);
    rec.energies.push_back(std::real(inner_product(hpsi, psi)));
    rec.snapshots.push_back(psi);
  };
  record(0.0);

  for (std::size_t n = 0; n < cfg.steps; ++n) {
    ComplexGrid hpsi = hamiltonian(psi);
    ComplexGrid rhs = psi.like();
    for (std::size_t i = 0; i < psi.size(); ++i) rhs[i] = psi[i] - kI * mu * hpsi[i];
    psi = solve_crank_nicolson(hamiltonian, mu, rhs, cfg);
    if ((n + 1) % cfg.record_every == 0 || n + 1 == cfg.steps)
      record(static_cast<double>(n + 1) * cfg.dt);
  }
  return rec;
}

EvolutionRecord klein_gordon_evolve(const WaveState& state0, double mass,
                                    const EvolutionConfig& cfg) {
  cfg.validate();
  if (!state0.psi_t)
    throw Error("klein_gordon_evolve: initial state needs psi_t");
  if (!state0.psi.same_layout(*state0.psi_t))
    throw DimensionMismatch("klein_gordon_evolve: psi and psi_t layouts differ");

  double hmin = state0.psi.spacing(0);
  for (std::size_t ax = 1; ax < state0.psi.dim(); ++ax)
    hmin = std::min(hmin, state0.psi.spacing(ax));
  if (cfg.dt / hmin > cfg.cfl_bound)
    throw CFLViolation("klein_gordon_evolve: dt/h exceeds the configured bound");

  const double m2 = mass * mass;
  auto accel = [&](const ComplexGrid& psi) {
    ComplexGrid a = laplacian(psi);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= m2 * psi[i];
    return a;
  };

  ComplexGrid prev = state0.psi;
  // Taylor start for the three-level scheme.
  ComplexGrid cur = state0.psi;
  {
    ComplexGrid a0 = accel(prev);
    for (std::size_t i = 0; i < cur.size(); ++i)
      cur[i] = prev[i] + cfg.dt * (*state0.psi_t)[i] + 0.5 * cfg.dt * cfg.dt * a0[i];
  }

  EvolutionRecord rec;
  const double cellvol = state0.psi.cell_volume();

  auto gradient_energy = [&](const ComplexGrid& a, const ComplexGrid& b) {
    // sum over axes of Re <d_ax a, d_ax b>, one-sided differences so the
    // staggered invariant of the scheme comes out exactly.
    double e = 0.0;
    std::vector<std::size_t> idx(a.dim(), 0);
    for (std::size_t ax = 0; ax < a.dim(); ++ax) {
      const double invh = 1.0 / a.spacing(ax);
      for (std::size_t flat = 0; flat < a.size(); ++flat) {
        a.unflatten(flat, idx);
        Complex da = (a.shifted(idx, flat, ax, +1) - a[flat]) * invh;
        Complex db = (b.shifted(idx, flat, ax, +1) - b[flat]) * invh;
        e += std::real(da * std::conj(db));
      }
    }
    return e;
  };

  // Snapshots and norms belong to `after`; the staggered energy lives on the
  // half step between the two states.
  auto record = [&](double t_after, const ComplexGrid& before, const ComplexGrid& after) {
    rec.times.push_back(t_after);
    double kinetic = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i)
      kinetic += std::norm((after[i] - before[i]) / cfg.dt);
    double cross = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i)
      cross += std::real(after[i] * std::conj(before[i]));
    // Exactly conserved staggered energy of the leapfrog update.
    double estag =
        0.5 * cellvol * (kinetic + gradient_energy(after, before) + m2 * cross);
    rec.energies.push_back(estag);

    // Centered physical energy at the midpoint state.
    double grad = 0.0, massterm = 0.0;
    std::vector<std::size_t> idx(before.dim(), 0);
    for (std::size_t ax = 0; ax < before.dim(); ++ax) {
      const double invh = 1.0 / before.spacing(ax);
      for (std::size_t flat = 0; flat < before.size(); ++flat) {
        before.unflatten(flat, idx);
        Complex mid = 0.5 * (after[flat] + before[flat]);
        Complex dmid = 0.5 * ((after.shifted(idx, flat, ax, +1) +
                               before.shifted(idx, flat, ax, +1)) -
                              (after[flat] + before[flat])) *
                       invh;
        grad += std::norm(dmid);
        if (ax == 0) massterm += std::norm(mid);
      }
    }
    rec.energies_centered.push_back(0.5 * cellvol * (kinetic + grad + m2 * massterm));
    rec.norms.push_back(std::abs(inner_product(after, after)));
    rec.snapshots.push_back(after);
  };

  record(cfg.dt, prev, cur);
  const double dt2 = cfg.dt * cfg.dt;
  for (std::size_t n = 1; n < cfg.steps; ++n) {
    ComplexGrid a = accel(cur);
    ComplexGrid next = cur.like();
    for (std::size_t i = 0; i < cur.size(); ++i)
      next[i] = 2.0 * cur[i] - prev[i] + dt2 * a[i];
    prev = std::move(cur);
    cur = std::move(next);
    if (n % cfg.record_every == 0 || n + 1 == cfg.steps)
      record(static_cast<double>(n + 1) * cfg.dt, prev, cur);
  }
  return rec;
}

DispersionResult dispersion_check(int mode, double mass, const Axis& axis,
                                  const EvolutionConfig& cfg) {
  cfg.validate();
  if (axis.n < 4) throw DimensionMismatch("dispersion_check: grid too small");
  const double length = axis.hi - axis.lo;
  const double kappa = kTwoPi * static_cast<double>(mode) / length;
  if (std::abs(mode) > static_cast<int>(axis.n / 2))
    throw Error("dispersion_check: mode beyond the Nyquist limit");
  const double omega0 = std::sqrt(kappa * kappa + mass * mass);

  ComplexGrid psi = make_grid({axis}, Boundary::Periodic, [&](std::span<const double> x) {
    return std::exp(kI * kappa * x[0]);
  });
  WaveState s0;
  s0.psi = psi;
  ComplexGrid psit = psi.like();
  for (std::size_t i = 0; i < psi.size(); ++i) psit[i] = -kI * omega0 * psi[i];
  s0.psi_t = std::move(psit);

  EvolutionConfig run = cfg;
  run.record_every = 1;
  EvolutionRecord rec = klein_gordon_evolve(s0, mass, run);

  if (rec.snapshots.size() < 8)
    throw InsufficientRunLength("dispersion_check: need >= 8 recorded samples");

  // Phase of the k-th Fourier amplitude per recorded state.
  Vec phases, times;
  const std::size_t n = psi.size();
  for (std::size_t snap = 0; snap < rec.snapshots.size(); ++snap) {
    const ComplexGrid& g = rec.snapshots[snap];
    Complex amp(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      amp += g[i] * std::exp(-kI * kappa * g.coord(0, i));
    phases.push_back(std::arg(amp));
    times.push_back(rec.times[snap]);
  }
  Vec unwrapped = unwrap_phase(phases);
  const double span = std::abs(unwrapped.back() - unwrapped.front());
  if (span < 0.5)
    throw InsufficientRunLength("dispersion_check: phase span below 0.5 rad");

  DispersionResult out;
  out.mode = mode;
  out.kappa = kappa;
  out.omega_measured = -least_squares_slope(times, unwrapped);
  // Invert the leapfrog time discretization cos(w dt) = 1 - dt^2 W^2 / 2.
  out.omega_corrected =
      (2.0 / cfg.dt) * std::abs(std::sin(0.5 * out.omega_measured * cfg.dt));
  out.omega_analytic = omega0;
  out.rel_error = std::abs(out.omega_measured - omega0) / omega0;
  return out;
}

NonrelLimitReport nonrel_limit_compare(std::span<const int> modes, double mass,
                                       const Axis& axis, const EvolutionConfig& cfg) {
  NonrelLimitReport report;
  Vec logk, logdev;
  for (int mode : modes) {
    DispersionResult d = dispersion_check(mode, mass, axis, cfg);
    NonrelLimitEntry e;
    e.mode = mode;
    e.kappa = d.kappa;
    e.omega = d.omega_corrected;
    e.deviation = std::abs(e.omega - (mass + e.kappa * e.kappa / (2.0 * mass)));
    e.predicted = std::pow(e.kappa, 4) / (8.0 * mass * mass * mass);
    report.entries.push_back(e);
    if (e.deviation > 0.0 && e.kappa > 0.0) {
      logk.push_back(std::log(e.kappa));
      logdev.push_back(std::log(e.deviation));
    }
  }
  if (logk.size() >= 2) report.slope = least_squares_slope(logk, logdev);
  return report;
}

std::string EvolutionRecord::to_json_string(int indent) const {
  nlohmann::ordered_json j;
  j["times"] = times;
  j["norms"] = norms;
  j["energies"] = energies;
  if (!energies_centered.empty()) j["energies_centered"] = energies_centered;
  j["snapshots"] = snapshots.size();
  return indent >= 0 ? j.dump(indent) : j.dump();
}

}  // namespace gqm
