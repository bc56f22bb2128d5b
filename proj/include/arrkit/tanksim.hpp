#ifndef ARRKIT_TANKSIM_HPP
#define ARRKIT_TANKSIM_HPP

#include <array>
#include <cstdint>
#include <string>

#include "arrkit/timeseries.hpp"

namespace arrkit {

// ============================================================================
// Configuration
// ============================================================================

// Sum of slightly detuned sinusoids:
//   u(t) = offset + (amp / sqrt(tones/2)) * sum_k sin(w_k t + phi_k),
//   w_k = base * ratio^k,  phi_k = 2*pi*frac(0.618...*(k+1) + phase0).
// Broadband enough to keep every regression on the benchmark well-posed;
// std(u) is approximately amp.
struct MultisineSpec {
    double offset = 1.0;
    double amp = 0.1;
    double base = 0.2;
    double ratio = 1.5;
    double phase0 = 0.0;
    int tones = 8;

    double value(double t) const;
};

// Four tanks in series; u1 feeds tank 1, u2 feeds tank 3. Inter-tank flows
// q_j = (p_j - p_{j+1}) / R_j, tank-4 outflow q_4 = p_4 / R_4. Measured
// channels: u1, u2, y1=p1, y2=q1, y3=p2, y4=q2, y5=q3, y6=p4
// (p3 and q4 stay unmeasured).
struct TankParams {
    std::array<double, 4> capacity = {1.0, 1.0, 5.0, 2.0};
    std::array<double, 4> resistance = {0.5, 4.0, 0.5, 1.0};
    MultisineSpec u1{1.0, 0.1, 0.20, 1.5, 0.00, 8};
    MultisineSpec u2{1.0, 0.1, 0.27, 1.5, 0.37, 8};
    double dt = 0.1;           // seconds
    double duration = 5000.0;  // seconds, >= 100*dt
    double noise_fraction = 0.05;

    void validate() const;
};

enum class FaultKind { none, incipient, abrupt };
enum class TankId { tank1 = 1, tank2 = 2, tank3 = 3, tank4 = 4 };

// Leak: extra outflow q_leak(t) = g(t) * p_tank(t), where g steps to
// `magnitude` (abrupt) or ramps linearly over ramp_duration (incipient).
struct FaultScenario {
    TankId component = TankId::tank1;
    FaultKind kind = FaultKind::none;
    double onset = 2500.0;        // seconds
    double magnitude = 0.005;     // leak conductance
    double ramp_duration = 1000.0;

    void validate(double duration) const;
};

// ============================================================================
// Simulation
// ============================================================================

struct SimResult {
    Dataset measurements;  // time, u1, u2, y1..y6 — noisy per noise_fraction
    Dataset states;        // time, u1, u2, p1..p4 — clean, for self-checks
    int clamp_count = 0;   // negative-pressure clamps (tanks cannot go below 0)
};

// Fixed-step RK4 from the steady state at the inflow offsets. Measurement
// noise is zero-mean Gaussian with per-channel sigma = noise_fraction *
// std(clean nominal channel); the no-fault run anchors the sigmas so a fault
// never changes pre-onset samples. Bit-identical for identical inputs.
SimResult simulate_full(const TankParams& params, const FaultScenario& fault,
                        std::uint64_t seed);

// Measurement dataset only.
Dataset simulate(const TankParams& params, const FaultScenario& fault, std::uint64_t seed);

// Max over checked times of |accumulated inflow - accumulated outflow -
// storage change|, normalized by the largest accumulated inflow. Quadrature
// of the emitted samples is composite Boole (checked every 4th sample), so
// the figure tracks the integrator's own error. Intended for clean no-fault
// state output; < 1e-6 at the default configuration.
double mass_balance_check(const Dataset& states, const TankParams& params);

}  // namespace arrkit

#endif  // ARRKIT_TANKSIM_HPP
