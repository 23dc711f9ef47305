#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dpnls/functionals.hpp"
#include "dpnls/groundstate.hpp"
#include "dpnls/model.hpp"

namespace dpnls {

using cplx = std::complex<double>;

/// Complex field on the periodic grid x_j = −L + 2Lj/M, j = 0..M−1.
struct WaveField {
  double L = 0.0;
  std::size_t M = 0;
  std::vector<cplx> u;
  double t = 0.0;

  double dx() const { return 2.0 * L / static_cast<double>(M); }
  double x(std::size_t j) const { return -L + dx() * static_cast<double>(j); }
  void validate() const;
};

WaveField make_field(double L, std::size_t M);

/// Same function on a grid of `new_M` ≥ M points by zero padding the spectrum.
WaveField refine(const WaveField& field, std::size_t new_M);

/// Smooth cutoff: 1 on [0, 1], 0 on [2, ∞), C^∞ in between.
double cutoff(double s);

enum class InitialKind { AmplitudeScaled, L2Scaled, CutoffAmplitudeScaled, CutoffL2Scaled };

std::string to_string(InitialKind kind);
InitialKind initial_kind_from_string(const std::string& s);

/// Samples λφ, φ^λ = λ^{1/2}φ(λ·), or their cutoff versions χ(|x|/R)·(…) on the grid.
/// Throws GridTooSmall if 2R (cutoff kinds) or the 1e−8 decay radius (plain kinds) exceeds 0.8L.
WaveField make_initial_data(InitialKind kind, const RadialProfile& profile, double lambda, double R, double L,
                            std::size_t M);

struct FieldQuantities {
  double mass = 0.0;       // ‖u‖²
  double grad_sq = 0.0;    // ‖∂ₓu‖²
  double lp1 = 0.0;        // ‖u‖_{p+1}^{p+1}
  double lq1 = 0.0;        // ‖u‖_{q+1}^{q+1}
  double energy = 0.0;     // ½‖∂ₓu‖² + lp1/(p+1) − lq1/(q+1)
  double virial = 0.0;     // P(u)
  double variance = 0.0;   // ‖xu‖²
  double boundary_mass = 0.0;  // fraction of mass with |x| > 0.9L
  double spectral_tail = 0.0;  // largest |û| with |k| > k_max/2, over the largest |û|
};

FieldQuantities measure(const WaveField& field, const ModelParams& params);

/// Norms of a sampled field, in the form the functional and stability code consumes.
Norms field_norms(const FieldQuantities& q);

struct OrbitalDistance {
  double distance = 0.0;
  double shift = 0.0;  // y
  double phase = 0.0;  // θ
  /// Shifts are searched on the grid only; this is the spacing.
  double shift_resolution = 0.0;
};

/// inf over grid shifts y and phases θ of ‖u − e^{iθ}φ(·−y)‖_{H¹}.
OrbitalDistance orbital_distance(const WaveField& field, const WaveField& reference);
OrbitalDistance orbital_distance(const WaveField& field, const RadialProfile& profile);

struct EvolutionConfig {
  double dt = 1e-3;
  double t_end = 5.0;
  int diagnostics_every = 10;
  /// Blowup flag once ‖∂ₓu‖ reaches this multiple of its initial value.
  double blowup_factor = 1e3;
  double dt_floor = 1e-12;
  /// Largest energy change over one substep, relative to |E| + ‖∂ₓu‖²; a
  /// larger change halves the substep.
  double energy_jump_tol = 1e-9;
  bool adaptive = true;
  /// 2: Strang. 4: triple-jump composition of three Strang steps.
  int splitting_order = 4;
  /// With a reference, stop at the first diagnostic sample farther than this. 0 never stops.
  double stop_distance = 0.0;
  /// The grid doubles (spectral zero padding) while M < max_grid_size and the
  /// largest Fourier amplitude in the outer half of the band exceeds
  /// spectral_tail_tol times the largest overall. 0 keeps M fixed.
  std::size_t max_grid_size = 0;
  double spectral_tail_tol = 1e-5;
  /// false switches off both power terms (free Schrödinger flow).
  bool nonlinear = true;
  /// Field copies are kept at the first base step at or after each of these times.
  std::vector<double> snapshot_times;
};

struct EvolutionDiagnostics {
  std::vector<double> t, E, M, P, V, grad_norm, distance;
  double max_boundary_mass = 0.0;
  bool blowup_flag = false;
  std::optional<double> blowup_time;
  std::string stop_reason;
  double final_time = 0.0;
  double final_grad_norm = 0.0;
  long substeps = 0;
  double min_substep = 0.0;
  std::size_t final_grid_size = 0;
};

struct EvolveResult {
  WaveField field;
  EvolutionDiagnostics diag;
  std::vector<WaveField> snapshots;
};

/// Split-step Fourier integration of i u_t + u_xx − |u|^{p−1}u + |u|^{q−1}u = 0.
/// If `reference` is given, the orbital distance to it is recorded.
EvolveResult evolve(const WaveField& field, const ModelParams& params, const EvolutionConfig& cfg,
                    const WaveField* reference = nullptr);

/// max over interior samples of |V̈ − 8P| / max|8P|, V̈ by central second differences.
double virial_consistency(const EvolutionDiagnostics& diag);

struct EscapeReport {
  double initial_distance = 0.0;
  double reference_distance = 0.0;
  std::optional<double> escape_time;
  std::vector<WaveField> snapshots;
  double max_distance_ratio = 0.0;
  /// min of −P(u(t)) over samples before escape (or the whole run).
  double min_neg_P_in_tube = 0.0;
  EvolutionDiagnostics diag;
};

struct EscapeConfig {
  double lambda = 1.01;
  double R = 0.0;
  double L = 0.0;
  std::size_t M = 0;
  double escape_factor = 3.0;
  /// Reference distance is at least this fraction of ‖φ‖_{H¹}.
  double distance_floor = 1e-3;
  /// Stop integrating at the first sample past the escape threshold.
  bool stop_on_escape = true;
  EvolutionConfig evolution;
};

/// Cutoff L²-scaled data near φ_ω; reports when the orbital distance first exceeds
/// escape_factor × max(d(0), floor·‖φ‖_{H¹}).
EscapeReport instability_escape_test(const ModelParams& params, const RadialProfile& profile,
                                     const EscapeConfig& cfg);

}  // namespace dpnls
