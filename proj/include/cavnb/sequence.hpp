#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "cavnb/dynamics.hpp"

namespace cavnb {

/// Instantaneous collective rotation exp(-i (A/2)(J+ e^{-i phi_B} + J- e^{+i phi_B})),
/// i.e. rotation by `area` about the equatorial axis at azimuth `axis_phase`.
struct BraggPulse {
    double area = 0;        ///< radians, in [0, 2 pi]
    double axis_phase = 0;  ///< phi_B
    double duration = 0;    ///< dead time only; pulses are instantaneous
};

struct InteractionWindow {
    double duration = 0;
    std::optional<double> phi_d;   ///< override of the run-level interaction phase
    std::optional<double> delta;   ///< override of the run-level beat detuning
    double contrast = 1.0;         ///< optional transverse contrast multiplier
};

struct Wait {
    double duration = 0;
    double z_rate = 0;  ///< residual detuning drift, rotates the state about z
};

enum class ReadoutBasis { Jz, Jx, Jy };

struct ReadoutMap {
    ReadoutBasis basis = ReadoutBasis::Jz;
};

using SequenceStep = std::variant<BraggPulse, InteractionWindow, Wait, ReadoutMap>;

struct PulseSequence {
    std::vector<SequenceStep> steps;
    /// Exactly one readout, in terminal position; pulse areas within [0, 2 pi].
    void validate() const;
};

enum class Engine { MeanField, Lindblad, FullCavity };

struct SequenceParams {
    Engine engine = Engine::MeanField;
    int n_atoms = 0;
    int n_body = 3;
    double chi_collective = 0;  ///< chi_n N^{n-1}, rad/s (signed)
    double gamma = 0;           ///< collective decay per channel
    double phi_d = 0;           ///< default interaction phase
    double delta = 0;           ///< default beat detuning
    std::optional<EffectiveModel> model;  ///< exact engines; minimal model built when absent
    std::optional<LadderModel> ladder;    ///< full-cavity engine
    int fock_cutoff = 5;
    bool include_jumps = true;
    bool projection_noise = false;
    uint64_t seed = 0;
    double meanfield_tol = 1e-9;
};

struct SequenceOutcome {
    double readout = 0;  ///< J_basis/(N/2): expectation, or a sampled value with noise on
    std::vector<double> populations;               ///< exact engines: rung populations
    std::vector<std::array<double, 3>> bloch_trace;  ///< J/(N/2) after each step
};

SequenceOutcome run_sequence(const PulseSequence& seq, const SequenceParams& params,
                             std::optional<MeanFieldState> initial_meanfield = std::nullopt,
                             const QuantumState* initial_exact = nullptr);

enum class ScanVariable { BraggPhase, Delta, InteractionPhase };

struct FringeFit {
    int harmonic = 0;
    double amplitude = 0;
    double phase = 0;
    double offset = 0;
    double sigma_amplitude = 0;  ///< 1-sigma from fit residuals
};

struct FringeScan {
    ScanVariable variable = ScanVariable::BraggPhase;
    std::vector<double> values;
    std::vector<double> results;  ///< Jz/(N/2) per value
    FringeFit fit;
};

/// Least-squares fit of A sin(n phi + phi0) + c. Requires >= 12 points per cycle.
FringeFit fit_fringe(const std::vector<double>& angles, const std::vector<double>& results,
                     int harmonic);

FringeScan fringe_scan(const PulseSequence& templ, ScanVariable variable,
                       const std::vector<double>& values, const SequenceParams& params,
                       int harmonic, int n_workers = 0);

/// Equatorial fringe protocol: pi/2 pulse at phi_B, interaction window of the
/// given duration, Jz readout.
PulseSequence equator_fringe_sequence(double interaction_time);

struct ResonanceScan {
    std::vector<double> delta_values;  ///< rad/s
    std::vector<double> amplitudes;    ///< fitted n-cycle amplitude per delta
    double fwhm = 0;                   ///< rad/s
};

/// Fringe amplitude against beat detuning; the grid must span at least
/// +-3/T around zero. Returns the FWHM of the central lobe.
ResonanceScan resonance_scan(const std::vector<double>& delta_values, double interaction_time,
                             const SequenceParams& params, int n_phi = 36, int n_workers = 0);

/// One-sided discrete Fourier power of a fringe sampled on a uniform angle
/// grid covering exactly [0, 2 pi). Entry k is the power at k cycles;
/// sum over entries equals the mean square of the fringe (Parseval).
std::vector<double> power_spectrum(const FringeScan& scan);

}  // namespace cavnb
