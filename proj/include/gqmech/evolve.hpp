#ifndef GQMECH_EVOLVE_HPP
#define GQMECH_EVOLVE_HPP

#include <optional>
#include <vector>

#include "gqmech/quantize.hpp"

namespace gqm {

struct EvolutionConfig {
  double dt = 1e-3;
  std::size_t steps = 100;
  double solve_tol = 1e-13;       // Crank-Nicolson linear solve, relative
  std::size_t solve_max_iter = 400;
  double cfl_bound = 1.0;         // leapfrog admission: dt / h_min <= bound
  std::size_t record_every = 1;
  double hermiticity_threshold = 1e-6;  // admission check for CN Hamiltonians
  void validate() const;
};

struct WaveState {
  ComplexGrid psi;
  std::optional<ComplexGrid> psi_t;  // time derivative (Klein-Gordon only)
};

struct EvolutionRecord {
  Vec times;
  Vec norms;            // <psi|psi> at recorded steps
  Vec energies;         // conserved energy functional (scheme-dependent)
  Vec energies_centered;  // physical centered energy (Klein-Gordon only)
  std::vector<ComplexGrid> snapshots;  // recorded states
  std::string to_json_string(int indent = -1) const;
};

// Crank-Nicolson evolution of i d_t psi = H psi:
//   (1 + i dt/2 H) psi' = (1 - i dt/2 H) psi,
// solved by conjugate gradients on the normal equations (the system matrix
// is a near-identity normal operator for symmetric H). The Hamiltonian is
// admission-checked for symmetry on Gaussian probes.
EvolutionRecord schrodinger_evolve(const QuantumOperator& hamiltonian,
                                   const ComplexGrid& psi0, const EvolutionConfig& cfg);

// Leapfrog evolution of the relativistic constraint equation
//   d_tt psi = Laplacian psi - m^2 psi
// on a spatial grid. Records the exactly conserved staggered energy and the
// centered physical energy.
EvolutionRecord klein_gordon_evolve(const WaveState& state0, double mass,
                                    const EvolutionConfig& cfg);

struct DispersionResult {
  int mode = 0;
  double kappa = 0.0;             // wavenumber 2 pi mode / L
  double omega_measured = 0.0;    // raw phase-fit frequency
  double omega_corrected = 0.0;   // leapfrog time-dispersion removed
  double omega_analytic = 0.0;    // sqrt(kappa^2 + m^2)
  double rel_error = 0.0;         // |measured - analytic| / analytic
};

// Evolves a single periodic Fourier mode and extracts its oscillation
// frequency from the phase rotation of the mode amplitude.
DispersionResult dispersion_check(int mode, double mass, const Axis& axis,
                                  const EvolutionConfig& cfg);

struct NonrelLimitEntry {
  int mode = 0;
  double kappa = 0.0;
  double omega = 0.0;       // time-corrected measured frequency
  double deviation = 0.0;   // |omega - (m + kappa^2 / 2m)|
  double predicted = 0.0;   // kappa^4 / (8 m^3)
};

struct NonrelLimitReport {
  std::vector<NonrelLimitEntry> entries;
  double slope = 0.0;  // log-log slope of deviation vs kappa
};

// Compares measured mode frequencies against the quadratic approximation
// m + k^2/2m and fits the scaling of the residual dispersion.
NonrelLimitReport nonrel_limit_compare(std::span<const int> modes, double mass,
                                       const Axis& axis, const EvolutionConfig& cfg);

}  // namespace gqm

#endif  // GQMECH_EVOLVE_HPP
