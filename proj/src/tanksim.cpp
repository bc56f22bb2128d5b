#include "arrkit/tanksim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace arrkit {

// ============================================================================
// Inflow profile
// ============================================================================

double MultisineSpec::value(double t) const {
    constexpr double golden = 0.6180339887;
    const double scale = amp / std::sqrt(static_cast<double>(tones) / 2.0);
    double u = offset;
    for (int k = 0; k < tones; ++k) {
        const double w = base * std::pow(ratio, k);
        const double frac = std::fmod(golden * (k + 1) + phase0, 1.0);
        u += scale * std::sin(w * t + 2.0 * std::numbers::pi * frac);
    }
    return u;
}

// ============================================================================
// Validation
// ============================================================================

void TankParams::validate() const {
    for (double c : capacity)
        if (!(c > 0.0)) throw ValidationError("tank capacities must be > 0");
    for (double r : resistance)
        if (!(r > 0.0)) throw ValidationError("flow resistances must be > 0");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (!(duration >= 100.0 * dt)) throw ValidationError("duration must be >= 100*dt");
    if (!(noise_fraction >= 0.0)) throw ValidationError("noise_fraction must be >= 0");
    if (u1.tones < 1 || u2.tones < 1) throw ValidationError("inflow needs >= 1 tone");
}

void FaultScenario::validate(double duration) const {
    if (kind == FaultKind::none) return;
    if (!(onset >= 0.0 && onset < duration))
        throw ValidationError("fault onset must lie in [0, duration)");
    if (!(magnitude >= 0.0)) throw ValidationError("fault magnitude must be >= 0");
    if (kind == FaultKind::incipient && !(ramp_duration > 0.0))
        throw ValidationError("incipient fault needs ramp_duration > 0");
}

// ============================================================================
// Deterministic noise
// ============================================================================

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// One independent Gaussian stream per measurement channel, derived from the
// master seed; Box-Muller over explicit 53-bit uniforms keeps the stream
// identical across standard libraries.
class GaussianStream {
public:
    GaussianStream(std::uint64_t master, std::uint64_t channel) {
        std::uint64_t s = master ^ (0xA24BAED4963EE407ULL * (channel + 1));
        rng_.seed(splitmix64(s));
    }
    double next() {
        const double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double v = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0,1)
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
    }

private:
    std::mt19937_64 rng_;
};

double std_pop(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(x.size()));
}

// ============================================================================
// Dynamics
// ============================================================================

using State = std::array<double, 4>;

double leak_gain(const FaultScenario& fault, double t) {
    if (fault.kind == FaultKind::none || t < fault.onset) return 0.0;
    if (fault.kind == FaultKind::abrupt) return fault.magnitude;
    return fault.magnitude * std::min((t - fault.onset) / fault.ramp_duration, 1.0);
}

State deriv(const TankParams& tp, const State& p, double u1, double u2, double g, int tank) {
    const auto& R = tp.resistance;
    const auto& C = tp.capacity;
    const double q1 = (p[0] - p[1]) / R[0];
    const double q2 = (p[1] - p[2]) / R[1];
    const double q3 = (p[2] - p[3]) / R[2];
    const double q4 = p[3] / R[3];
    State leak{0, 0, 0, 0};
    leak[static_cast<std::size_t>(tank)] = g * p[static_cast<std::size_t>(tank)];
    return {(u1 - q1 - leak[0]) / C[0],
            (q1 - q2 - leak[1]) / C[1],
            (q2 + u2 - q3 - leak[2]) / C[2],
            (q3 - q4 - leak[3]) / C[3]};
}

struct CleanRun {
    std::vector<double> u1, u2;
    std::array<std::vector<double>, 4> p;
    int clamp_count = 0;
};

CleanRun integrate_clean(const TankParams& tp, const FaultScenario& fault) {
    const std::size_t n = static_cast<std::size_t>(std::llround(tp.duration / tp.dt)) + 1;
    const int tank = static_cast<int>(fault.component) - 1;
    const double h = tp.dt;

    CleanRun run;
    run.u1.resize(n);
    run.u2.resize(n);
    for (auto& col : run.p) col.resize(n);

    // Steady state at the inflow offsets: at equilibrium q2 carries all of
    // u1 and q3 = u1 + u2.
    const double q3ss = tp.u1.offset + tp.u2.offset;
    State p;
    p[3] = tp.resistance[3] * q3ss;
    p[2] = p[3] + tp.resistance[2] * q3ss;
    p[1] = p[2] + tp.resistance[1] * tp.u1.offset;
    p[0] = p[1] + tp.resistance[0] * tp.u1.offset;

    auto record = [&](std::size_t i) {
        run.u1[i] = tp.u1.value(static_cast<double>(i) * h);
        run.u2[i] = tp.u2.value(static_cast<double>(i) * h);
        for (std::size_t s = 0; s < 4; ++s) run.p[s][i] = p[s];
    };
    record(0);

    auto f = [&](double t, const State& st) {
        return deriv(tp, st, tp.u1.value(t), tp.u2.value(t), leak_gain(fault, t), tank);
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = static_cast<double>(i) * h;
        const State k1 = f(t, p);
        State a;
        for (std::size_t s = 0; s < 4; ++s) a[s] = p[s] + 0.5 * h * k1[s];
        const State k2 = f(t + 0.5 * h, a);
        for (std::size_t s = 0; s < 4; ++s) a[s] = p[s] + 0.5 * h * k2[s];
        const State k3 = f(t + 0.5 * h, a);
        for (std::size_t s = 0; s < 4; ++s) a[s] = p[s] + h * k3[s];
        const State k4 = f(t + h, a);
        for (std::size_t s = 0; s < 4; ++s) {
            p[s] += h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
            if (p[s] < 0.0) {
                p[s] = 0.0;
                ++run.clamp_count;
            }
        }
        record(i + 1);
    }
    return run;
}

std::vector<std::vector<double>> measurement_channels(const TankParams& tp,
                                                      const CleanRun& run) {
    const auto& R = tp.resistance;
    const std::size_t n = run.u1.size();
    std::vector<std::vector<double>> ch(8, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        ch[0][i] = run.u1[i];
        ch[1][i] = run.u2[i];
        ch[2][i] = run.p[0][i];                         // y1 = p1
        ch[3][i] = (run.p[0][i] - run.p[1][i]) / R[0];  // y2 = q1
        ch[4][i] = run.p[1][i];                         // y3 = p2
        ch[5][i] = (run.p[1][i] - run.p[2][i]) / R[1];  // y4 = q2
        ch[6][i] = (run.p[2][i] - run.p[3][i]) / R[2];  // y5 = q3
        ch[7][i] = run.p[3][i];                         // y6 = p4
    }
    return ch;
}

}  // namespace

// ============================================================================
// Simulation entry points
// ============================================================================

SimResult simulate_full(const TankParams& params, const FaultScenario& fault,
                        std::uint64_t seed) {
    params.validate();
    fault.validate(params.duration);

    CleanRun run = integrate_clean(params, fault);
    auto channels = measurement_channels(params, run);

    // Noise scale is anchored to the *nominal* (no-fault) clean channels so
    // that injecting a fault cannot change pre-onset samples.
    std::vector<double> sigma(8);
    if (fault.kind == FaultKind::none) {
        for (std::size_t c = 0; c < 8; ++c)
            sigma[c] = params.noise_fraction * std_pop(channels[c]);
    } else {
        FaultScenario nofault = fault;
        nofault.kind = FaultKind::none;
        CleanRun nominal = integrate_clean(params, nofault);
        auto nominal_channels = measurement_channels(params, nominal);
        for (std::size_t c = 0; c < 8; ++c)
            sigma[c] = params.noise_fraction * std_pop(nominal_channels[c]);
    }

    static const std::vector<std::string> kMeasured = {"u1", "u2", "y1", "y2",
                                                       "y3", "y4", "y5", "y6"};
    std::vector<std::vector<double>> noisy = channels;
    for (std::size_t c = 0; c < 8; ++c) {
        if (sigma[c] == 0.0) continue;
        GaussianStream g(seed, c);
        for (double& v : noisy[c]) v += sigma[c] * g.next();
    }

    SimResult out;
    out.measurements = make_dataset(kMeasured, std::move(noisy), params.dt, 0.0);
    out.states = make_dataset({"u1", "u2", "p1", "p2", "p3", "p4"},
                              {run.u1, run.u2, run.p[0], run.p[1], run.p[2], run.p[3]},
                              params.dt, 0.0);
    out.clamp_count = run.clamp_count;
    return out;
}

Dataset simulate(const TankParams& params, const FaultScenario& fault, std::uint64_t seed) {
    return simulate_full(params, fault, seed).measurements;
}

// ============================================================================
// Mass-balance self check
// ============================================================================

double mass_balance_check(const Dataset& states, const TankParams& params) {
    for (const char* name : {"u1", "u2", "p1", "p2", "p3", "p4"})
        if (!states.has(name))
            throw SchemaError("mass_balance_check: states dataset missing column");
    const auto& u1 = states.col("u1");
    const auto& u2 = states.col("u2");
    const std::array<const std::vector<double>*, 4> p = {
        &states.col("p1"), &states.col("p2"), &states.col("p3"), &states.col("p4")};
    const std::size_t n = states.n_samples();
    if (n < 5) throw InsufficientDataError("mass_balance_check: need >= 5 samples");

    auto net = [&](std::size_t i) {
        return u1[i] + u2[i] - (*p[3])[i] / params.resistance[3];
    };
    auto stored = [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += params.capacity[k] * (*p[k])[i];
        return s;
    };

    // Composite Boole quadrature, evaluated every 4 samples; O(h^6) so the
    // reported imbalance reflects the integrator rather than the check.
    const double h = states.dt;
    double acc = 0.0;
    double worst = 0.0;
    double largest = 0.0;
    const double stored0 = stored(0);
    for (std::size_t k = 4; k < n; k += 4) {
        acc += 2.0 * h / 45.0 *
               (7.0 * net(k - 4) + 32.0 * net(k - 3) + 12.0 * net(k - 2) +
                32.0 * net(k - 1) + 7.0 * net(k));
        worst = std::max(worst, std::abs(acc - (stored(k) - stored0)));
        largest = std::max(largest, std::abs(acc));
    }
    if (worst == 0.0) return 0.0;  // exact balance (e.g. zero-dynamics run)
    return worst / std::max(largest, 1e-300);
}

}  // namespace arrkit
