#ifndef CAVTEL_TRAJECTORY_HPP
#define CAVTEL_TRAJECTORY_HPP

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "cavtel/dynamics.hpp"
#include "cavtel/protocol.hpp"

namespace cavtel::trajectory {

using dynamics::ChannelLabel;
using dynamics::Detector;
using dynamics::SystemParams;
using hilbert::StateVector;
using protocol::InputState;
using protocol::ProtocolOutcome;
using protocol::ProtocolSchedule;

// SplitMix64: a counter-based generator (the SplittableRandom update), so a
// trajectory's stream depends only on (seed, index), never on execution
// order. Outputs are mapped to the open interval (0, 1).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
};

/// Stream origin for trajectory `index` of ensemble `seed`.
SplitMix64 trajectory_stream(std::uint64_t seed, std::uint64_t index);

struct TrajectoryConfig {
    std::uint64_t seed = 12345;
    int n_traj = 10000;
    double dt_max = 0.0;  // bracketing step; 0 selects min(0.1/kappa, 0.1/beta)
    bool record_checkpoints = false;
};

struct ClickRecord {
    Detector detector;
    double time;  // protocol clock, us
    int cycle;    // 1 or 2
};

enum class Phase { interaction1, window1, purge, cycle2 };

// Per-trajectory event counts, cheap enough to collect always.
struct TrajectoryCounters {
    int spont_jumps = 0;
    int cycle2_cavity_jumps = 0;
    int cycle2_spont_jumps = 0;
};

// Optional heavyweight record of everything that happened.
struct SampleDiagnostics {
    struct JumpEvent {
        Phase phase;
        double time;  // protocol clock
        ChannelLabel channel;
        bool recorded;
        double norm_residual;  // | ||psi||^2 - r | at the located jump time
    };
    std::vector<JumpEvent> jumps;
    std::vector<std::pair<protocol::Stage, StateVector>> checkpoints;
};

struct TrajectorySample {
    ProtocolOutcome outcome;
    std::vector<ClickRecord> clicks;  // in-window records only
    TrajectoryCounters counters;
};

/// One quantum-jump unraveling of the full protocol. Decisions are driven by
/// recorded clicks only: emitted detector photons are recorded with
/// probability eta, spontaneous emissions never. Cycle 1 needs exactly one
/// record in its window and none elsewhere; the first record in the second
/// window completes the protocol.
TrajectorySample sample_trajectory(const SystemParams& p, const ProtocolSchedule& schedule,
                                   const InputState& input, SplitMix64& rng,
                                   const TrajectoryConfig& config,
                                   SampleDiagnostics* diagnostics = nullptr);

struct EnsembleResult {
    long n_traj = 0;
    long n_success = 0;
    long n_discarded = 0;
    double success_rate = 0.0;
    double success_rate_se = 0.0;
    double mean_success_fidelity = 0.0;
    double mean_success_fidelity_se = 0.0;
    double min_success_fidelity = 0.0;
    double max_success_fidelity = 0.0;
    // Histogram over (first, second) clicks: ++, +-, -+, --.
    std::array<long, 4> click_pattern_counts{0, 0, 0, 0};
    long spont_emission_count = 0;
    long cycle2_cavity_jumps = 0;
    long cycle2_spont_jumps = 0;
};

/// n_traj independent trajectories; trajectory i always uses the stream
/// derived from (seed, i), so the result is bit-identical for any thread
/// count. Aggregation runs in index order.
EnsembleResult run_ensemble(const SystemParams& p, const ProtocolSchedule& schedule,
                            const InputState& input, const TrajectoryConfig& config,
                            int n_threads = 1);

/// Deterministic replay conditioned on the reference event pattern (first
/// click at exactly tau1 on D+, no other cycle-1 events, second click at
/// exactly t2 on D+) through the sampler's stepping machinery, compared
/// stage by stage against the analytic pipeline. Throws conditioning_error
/// when a forced click has no amplitude.
std::vector<std::pair<protocol::Stage, double>> checkpoint_compare(
    const SystemParams& p, const ProtocolSchedule& schedule, const InputState& input,
    double dt_max = 0.0);

}  // namespace cavtel::trajectory

#endif
