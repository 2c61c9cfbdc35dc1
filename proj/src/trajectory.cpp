#include "cavtel/trajectory.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "cavtel/errors.hpp"
#include "cavtel/pulses.hpp"

namespace cavtel::trajectory {

using dynamics::apply_detector_jump;
using dynamics::apply_pair_propagator;
using dynamics::apply_spont_jump;
using dynamics::channel_rates;
using dynamics::ChannelRates;
using dynamics::pair_propagator;
using dynamics::PairPropagator;
using hilbert::norm2;
using protocol::ClickPattern;
using protocol::OutcomeStatus;
using protocol::Stage;

SplitMix64 trajectory_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return SplitMix64(z ^ (z >> 31));
}

namespace {

double resolve_dt_max(const SystemParams& p, double dt_max) {
    if (dt_max > 0.0) return dt_max;
    double dt = 0.1 / dynamics::beta(p);
    if (p.kappa > 0.0) dt = std::min(dt, 0.1 / p.kappa);
    return dt;
}

void advance(StateVector& psi, const SystemParams& p, double duration, double dt_max,
             const PairPropagator& hop) {
    if (duration <= 0.0) return;
    double remaining = duration;
    while (remaining > dt_max) {
        apply_pair_propagator(psi, hop, 1);
        apply_pair_propagator(psi, hop, 2);
        remaining -= dt_max;
    }
    const PairPropagator tail = pair_propagator(p, remaining);
    apply_pair_propagator(psi, tail, 1);
    apply_pair_propagator(psi, tail, 2);
}

struct StepResult {
    bool jumped = false;
    double t_local = 0.0;  // time of the jump, measured from the call entry
    ChannelLabel channel{};
    bool recorded = false;
    double norm_residual = 0.0;
};

// Evolve under the no-jump propagator until the squared norm crosses the
// drawn threshold r or the interval ends. The norm is monotone between
// jumps, so one endpoint evaluation decides whether a jump occurs at all;
// the crossing is then bracketed in dt_max hops and bisected to 1e-12 us.
// On a jump: the channel is chosen with probability proportional to its
// instantaneous rate, the collapse applied, the state renormalized, the
// detector record thinned by eta, and r redrawn.
StepResult step_to_next_jump(StateVector& psi, const SystemParams& p, double remaining,
                             double dt_max, const PairPropagator& hop, SplitMix64& rng,
                             double& r) {
    StepResult out;
    {
        StateVector trial = psi;
        advance(trial, p, remaining, dt_max, hop);
        if (norm2(trial) >= r) {
            psi = trial;
            out.t_local = remaining;
            return out;
        }
    }
    double pos = 0.0;
    while (true) {
        const double hop_len = std::min(dt_max, remaining - pos);
        StateVector next = psi;
        if (hop_len == dt_max) {
            apply_pair_propagator(next, hop, 1);
            apply_pair_propagator(next, hop, 2);
        } else {
            advance(next, p, hop_len, dt_max, hop);
        }
        if (norm2(next) > r) {
            psi = next;
            pos += hop_len;
            continue;
        }
        double lo = 0.0, hi = hop_len;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            StateVector probe = psi;
            advance(probe, p, mid, dt_max, hop);
            if (norm2(probe) > r)
                lo = mid;
            else
                hi = mid;
        }
        const double t_jump = 0.5 * (lo + hi);
        advance(psi, p, t_jump, dt_max, hop);
        out.jumped = true;
        out.t_local = pos + t_jump;
        out.norm_residual = std::abs(norm2(psi) - r);

        const ChannelRates rates = channel_rates(psi, p);
        double u = rng.uniform() * rates.total();
        if ((u -= rates.d_plus) < 0.0) {
            out.channel = ChannelLabel::d_plus;
            apply_detector_jump(psi, Detector::plus, p.kappa);
        } else if ((u -= rates.d_minus) < 0.0) {
            out.channel = ChannelLabel::d_minus;
            apply_detector_jump(psi, Detector::minus, p.kappa);
        } else if ((u -= rates.spont1) < 0.0) {
            out.channel = ChannelLabel::spont1;
            apply_spont_jump(psi, 1, p.gamma);
        } else {
            out.channel = ChannelLabel::spont2;
            apply_spont_jump(psi, 2, p.gamma);
        }
        psi /= std::sqrt(norm2(psi));
        const bool detector = out.channel == ChannelLabel::d_plus ||
                              out.channel == ChannelLabel::d_minus;
        out.recorded = detector && rng.uniform() < p.eta;
        r = rng.uniform();
        return out;
    }
}

double normalized_overlap(const StateVector& a, const StateVector& b) {
    const double na = norm2(a), nb = norm2(b);
    if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
    return std::min(1.0, std::norm(hilbert::inner(a, b)) / (na * nb));
}

}  // namespace

TrajectorySample sample_trajectory(const SystemParams& p, const ProtocolSchedule& schedule,
                                   const InputState& input, SplitMix64& rng,
                                   const TrajectoryConfig& config,
                                   SampleDiagnostics* diagnostics) {
    if (!std::isfinite(schedule.t1 + schedule.dt1 + schedule.tau1 + schedule.tau2 +
                       schedule.t_d))
        throw std::invalid_argument("trajectory sampling needs finite windows");
    const double dt_max = resolve_dt_max(p, config.dt_max);
    const PairPropagator hop = pair_propagator(p, dt_max);

    TrajectorySample sample;
    StateVector psi = protocol::prepare(input);
    double r = rng.uniform();
    double clock = 0.0;

    bool invalid = false;
    int window1_clicks = 0;
    Detector first_click{}, second_click{};
    bool have_second = false;

    const auto note_checkpoint = [&](Stage stage) {
        if (!diagnostics || !config.record_checkpoints) return;
        StateVector snap = psi;
        const double n2 = norm2(snap);
        if (n2 > 0.0) snap /= std::sqrt(n2);
        diagnostics->checkpoints.emplace_back(stage, std::move(snap));
    };

    // Walks one timed phase. on_record(detector) is called for each recorded
    // click at the moment it happens (clock already advanced); returning
    // false aborts the phase.
    const auto run_phase = [&](Phase phase, double duration, auto&& on_record) {
        double pos = 0.0;
        while (pos < duration) {
            const StepResult s =
                step_to_next_jump(psi, p, duration - pos, dt_max, hop, rng, r);
            pos += s.t_local;
            clock += s.t_local;
            if (!s.jumped) return;
            if (diagnostics)
                diagnostics->jumps.push_back(
                    {phase, clock, s.channel, s.recorded, s.norm_residual});
            const bool spont = s.channel == ChannelLabel::spont1 ||
                               s.channel == ChannelLabel::spont2;
            if (spont) ++sample.counters.spont_jumps;
            if (phase == Phase::cycle2) {
                if (spont)
                    ++sample.counters.cycle2_spont_jumps;
                else
                    ++sample.counters.cycle2_cavity_jumps;
            }
            if (s.recorded) {
                const Detector det = (s.channel == ChannelLabel::d_plus) ? Detector::plus
                                                                          : Detector::minus;
                if (!on_record(det)) return;
            }
        }
    };

    note_checkpoint(Stage::prepared);

    run_phase(Phase::interaction1, schedule.t1 + schedule.dt1, [&](Detector) {
        invalid = true;  // a record outside both windows breaks the pattern
        return false;
    });
    note_checkpoint(Stage::after_interaction1);

    if (!invalid) {
        pulses::apply_pulse(psi, pulses::raman_swap(1));
        pulses::apply_pulse(psi, pulses::raman_swap(2));
        note_checkpoint(Stage::after_swap);

        run_phase(Phase::window1, schedule.tau1, [&](Detector det) {
            ++window1_clicks;
            if (window1_clicks > 1) {
                invalid = true;
                return false;
            }
            first_click = det;
            sample.clicks.push_back({det, clock, 1});
            return true;  // keep watching the window for a second record
        });
        if (window1_clicks != 1) invalid = true;
    }

    if (!invalid) {
        run_phase(Phase::purge, schedule.tau2, [&](Detector) {
            invalid = true;
            return false;
        });
        note_checkpoint(Stage::after_purge);
    }

    if (!invalid) {
        pulses::apply_pulse(psi, pulses::map_g_to_e_1());
        pulses::apply_pulse(psi, pulses::map_f_to_g_1());
        pulses::apply_pulse(psi, pulses::excite_g_to_e_2());
        if (dynamics::excited_with_photon_weight(psi) > 1e-9 * norm2(psi))
            throw std::logic_error("excitation budget violated: |e,1> populated");
        note_checkpoint(Stage::after_remap);

        run_phase(Phase::cycle2, schedule.t_d, [&](Detector det) {
            second_click = det;
            have_second = true;
            sample.clicks.push_back({det, clock, 2});
            return false;  // the protocol ends at the first recorded click
        });
    }

    if (!invalid && have_second) {
        sample.outcome.status = OutcomeStatus::success;
        const ClickPattern pattern = (first_click == second_click)
                                         ? ClickPattern::same_detector
                                         : ClickPattern::different_detector;
        sample.outcome.pattern = pattern;
        sample.outcome.branch = protocol::BranchChoice{first_click, second_click};
        if (auto pulse = protocol::classical_correction(pattern))
            pulses::apply_pulse(psi, *pulse);
        note_checkpoint(Stage::final_normalized);
        hilbert::DensityMatrix rho = hilbert::reduce_to_atom2(psi);
        const double tr = rho.trace();
        if (tr > 0.0) rho.m /= tr;
        sample.outcome.fidelity =
            hilbert::fidelity(protocol::teleport_target(input), rho);
        sample.outcome.final_atom2 = std::move(rho);
    } else {
        sample.outcome.status = OutcomeStatus::discarded;
    }
    sample.outcome.weight = 1.0;
    return sample;
}

namespace {

struct TrajRecord {
    std::uint8_t success = 0;
    std::uint8_t pattern = 0;  // (first==minus)*2 + (second==minus)
    double fidelity = 0.0;
    std::int32_t spont = 0;
    std::int32_t cycle2_cavity = 0;
    std::int32_t cycle2_spont = 0;
};

}  // namespace

EnsembleResult run_ensemble(const SystemParams& p, const ProtocolSchedule& schedule,
                            const InputState& input, const TrajectoryConfig& config,
                            int n_threads) {
    if (config.n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
    const long n = config.n_traj;
    std::vector<TrajRecord> records(n);

    const auto worker = [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            SplitMix64 rng = trajectory_stream(config.seed, static_cast<std::uint64_t>(i));
            const TrajectorySample s = sample_trajectory(p, schedule, input, rng, config);
            TrajRecord& rec = records[i];
            rec.success = s.outcome.status == OutcomeStatus::success ? 1 : 0;
            if (rec.success && s.outcome.branch) {
                rec.pattern = static_cast<std::uint8_t>(
                    (s.outcome.branch->first == Detector::minus ? 2 : 0) +
                    (s.outcome.branch->second == Detector::minus ? 1 : 0));
                rec.fidelity = s.outcome.fidelity;
            }
            rec.spont = s.counters.spont_jumps;
            rec.cycle2_cavity = s.counters.cycle2_cavity_jumps;
            rec.cycle2_spont = s.counters.cycle2_spont_jumps;
        }
    };

    if (n_threads <= 1) {
        worker(0, n);
    } else {
        const int threads = std::min<long>(n_threads, n);
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            const long lo = n * t / threads;
            const long hi = n * (t + 1) / threads;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Index-ordered reduction keeps the result independent of thread count.
    EnsembleResult res;
    res.n_traj = n;
    res.min_success_fidelity = 1.0;
    res.max_success_fidelity = 0.0;
    double fid_sum = 0.0;
    for (const TrajRecord& rec : records) {
        if (rec.success) {
            ++res.n_success;
            ++res.click_pattern_counts[rec.pattern];
            fid_sum += rec.fidelity;
            res.min_success_fidelity = std::min(res.min_success_fidelity, rec.fidelity);
            res.max_success_fidelity = std::max(res.max_success_fidelity, rec.fidelity);
        }
        res.spont_emission_count += rec.spont;
        res.cycle2_cavity_jumps += rec.cycle2_cavity;
        res.cycle2_spont_jumps += rec.cycle2_spont;
    }
    if (res.n_success == 0) res.min_success_fidelity = 0.0;
    res.n_discarded = n - res.n_success;
    res.success_rate = static_cast<double>(res.n_success) / static_cast<double>(n);
    res.success_rate_se =
        std::sqrt(res.success_rate * (1.0 - res.success_rate) / static_cast<double>(n));
    if (res.n_success > 0) {
        res.mean_success_fidelity = fid_sum / static_cast<double>(res.n_success);
        if (res.n_success > 1) {
            double ss = 0.0;
            for (const TrajRecord& rec : records) {
                if (!rec.success) continue;
                const double d = rec.fidelity - res.mean_success_fidelity;
                ss += d * d;
            }
            res.mean_success_fidelity_se = std::sqrt(
                ss / (static_cast<double>(res.n_success) *
                      static_cast<double>(res.n_success - 1)));
        }
    }
    return res;
}

std::vector<std::pair<Stage, double>> checkpoint_compare(const SystemParams& p,
                                                         const ProtocolSchedule& schedule,
                                                         const InputState& input,
                                                         double dt_max_in) {
    const double dt_max = resolve_dt_max(p, dt_max_in);
    const PairPropagator hop = pair_propagator(p, dt_max);
    const protocol::BranchChoice branch{Detector::plus, Detector::plus};
    const auto analytic = protocol::analytic_checkpoints(p, schedule, input, branch);
    const auto analytic_state = [&](Stage stage) -> const StateVector& {
        for (const auto& cp : analytic)
            if (cp.stage == stage) return cp.state;
        throw std::logic_error("missing analytic checkpoint");
    };

    std::vector<std::pair<Stage, double>> out;
    StateVector psi = protocol::prepare(input);
    const auto compare = [&](Stage stage) {
        out.emplace_back(stage, normalized_overlap(psi, analytic_state(stage)));
    };
    // The forced clicks use the unweighted beam-splitter projection so the
    // replay also covers the lossless limit, where the rate-weighted
    // operator vanishes. For kappa > 0 the renormalized state is identical.
    const auto force_click = [&](Detector port) {
        apply_detector_jump(psi, port, 1.0);
        const double n2 = norm2(psi);
        if (n2 < 1e-30)
            throw conditioning_error(
                "conditioning unreachable: forced click has no amplitude");
        psi /= std::sqrt(n2);
    };

    advance(psi, p, schedule.t1 + schedule.dt1, dt_max, hop);
    compare(Stage::after_interaction1);

    pulses::apply_pulse(psi, pulses::raman_swap(1));
    pulses::apply_pulse(psi, pulses::raman_swap(2));

    advance(psi, p, schedule.tau1, dt_max, hop);
    force_click(branch.first);
    compare(Stage::after_click1);

    advance(psi, p, schedule.tau2, dt_max, hop);
    // The post-purge discard is part of the conditioning being replayed.
    protocol::discard_excitation_remnant(psi);
    compare(Stage::after_remnant_discard);

    pulses::apply_pulse(psi, pulses::map_g_to_e_1());
    pulses::apply_pulse(psi, pulses::map_f_to_g_1());
    pulses::apply_pulse(psi, pulses::excite_g_to_e_2());

    advance(psi, p, schedule.t2, dt_max, hop);
    compare(Stage::after_interaction2);

    force_click(branch.second);
    compare(Stage::final_normalized);
    return out;
}

}  // namespace cavtel::trajectory
