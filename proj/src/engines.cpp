#include "bathtub/engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace bathtub {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier-compensated accumulator for the production coordinate P(t).
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

std::size_t steps_per_sample(double output_resolution, double dt) {
    const double ratio = output_resolution / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * rounded)
        throw std::invalid_argument(
            "SimConfig: output_resolution must be a multiple of engine_time_step");
    return static_cast<std::size_t>(rounded);
}

std::vector<double> sample_times(const SimConfig& cfg) {
    const auto count = static_cast<std::size_t>(
        std::floor(cfg.duration / cfg.output_resolution + 1e-9));
    std::vector<double> times(count + 1);
    for (std::size_t s = 0; s <= count; ++s)
        times[s] = static_cast<double>(s) * cfg.output_resolution;
    return times;
}

// Shared Euler stepper for the two continuous engines. The M-model tracks the
// remaining-distance state m; with alpha == 0 its n-trajectory follows the
// exact arithmetic of the accumulation-based engine.
template <bool WithM>
SimResult run_continuous(const SimConfig& cfg) {
    cfg.validate();
    const double dt = cfg.engine_time_step;
    const std::size_t per_sample = steps_per_sample(cfg.output_resolution, dt);
    const double jam = cfg.mfd.jam_accumulation();

    SimResult out;
    out.time = sample_times(cfg);
    const std::size_t total_steps = (out.time.size() - 1) * per_sample;

    double n = 0.0;
    double m = 0.0;
    double cum_in = 0.0;
    double cum_out = 0.0;

    auto outflow_at = [&](double t, double n_now, double m_now) {
        const TddSpec& stage = tdd_at(cfg.tdd, t);
        const double mean_d = stage.mean_distance();
        const double production = n_now * speed_at_accumulation(cfg.mfd, n_now);
        double g = production / mean_d;
        if constexpr (WithM) {
            if (cfg.alpha != 0.0 && n_now > 0.0) {
                const double d_star = steady_distance(stage);
                g *= 1.0 + cfg.alpha * (m_now / (n_now * d_star) - 1.0);
            }
        }
        return std::clamp(g, 0.0, n_now / dt);
    };

    auto sample = [&](double t) {
        out.accumulation.push_back(n);
        out.inflow.push_back(cfg.demand.rate_at(t));
        out.outflow.push_back(outflow_at(t, n, m));
        out.speed.push_back(speed_at_accumulation(cfg.mfd, n));
        if constexpr (WithM) out.remaining_distance.push_back(m);
        out.cumulative_inflow.push_back(cum_in);
        out.cumulative_outflow.push_back(cum_out);
    };

    sample(0.0);
    for (std::size_t j = 0; j < total_steps; ++j) {
        const double t = static_cast<double>(j) * dt;
        const double e = cfg.demand.rate_at(t);
        const double g = outflow_at(t, n, m);
        const double dn = dt * (e - g);
        if (std::fabs(dn) > 0.1 * jam)
            throw std::runtime_error(
                "continuous engine: unstable step (|dn| > 10% of jam accumulation); "
                "reduce engine_time_step");
        if constexpr (WithM) {
            const double mean_d = tdd_at(cfg.tdd, t).mean_distance();
            const double production = n * speed_at_accumulation(cfg.mfd, n);
            m = std::max(0.0, m + dt * (e * mean_d - production));
        }
        n = std::max(0.0, n + dn);
        cum_in += dt * e;
        cum_out += dt * g;
        if constexpr (WithM) {
            if (n <= 0.0 && m > 1e-6 * tdd_at(cfg.tdd, t).mean_distance())
                throw std::runtime_error(
                    "m-model: inconsistent state (n = 0 with remaining distance m > 0)");
        }
        if ((j + 1) % per_sample == 0) sample(static_cast<double>(j + 1) * dt);
    }
    return out;
}

// Pre-generates the engine-independent trip stream: one generation window at a
// time, spec taken at the window start, residual state carried across windows.
std::vector<TripEntry> build_entries(const SimConfig& cfg) {
    if (cfg.preset_entries) {
        auto entries = *cfg.preset_entries;
        std::sort(entries.begin(), entries.end(),
                  [](const TripEntry& a, const TripEntry& b) { return a.time < b.time; });
        return entries;
    }
    const double res = cfg.generation_resolution;
    const double windows_real = cfg.duration / res;
    const auto windows = static_cast<std::size_t>(std::round(windows_real));
    if (std::fabs(windows_real - static_cast<double>(windows)) > 1e-9)
        throw std::invalid_argument(
            "SimConfig: duration must be a multiple of generation_resolution");
    std::vector<TripEntry> entries;
    GenerationState carry;
    for (std::size_t wdx = 0; wdx < windows; ++wdx) {
        const double t0 = static_cast<double>(wdx) * res;
        const double t1 = t0 + res;
        const TddSpec& spec = tdd_at(cfg.tdd, t0);
        const double count = cfg.demand.integrate(t0, t1);
        auto produced = generate_entries(spec, count, t0, t1, carry);
        entries.insert(entries.end(), produced.begin(), produced.end());
    }
    return entries;
}

// Min-heap over (exit threshold on the production axis, trip id); the id
// tie-break keeps simultaneous exits FIFO and the output deterministic.
using ThresholdQueue =
    std::priority_queue<std::pair<double, std::uint64_t>,
                        std::vector<std::pair<double, std::uint64_t>>,
                        std::greater<>>;

double pop_slack(double p) {
    return 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(p));
}

// Fills the sampled series of a trip-based result from the entry/exit records.
void fill_trip_series(const SimConfig& cfg, SimResult& out,
                      const std::vector<TripEntry>& entries,
                      const std::vector<double>& exit_times,
                      const std::vector<std::pair<double, double>>& n_log) {
    out.time = sample_times(cfg);
    const double res = cfg.output_resolution;
    const std::size_t samples = out.time.size();

    std::vector<double> sorted_exits(exit_times);
    std::sort(sorted_exits.begin(), sorted_exits.end());

    out.accumulation.resize(samples);
    out.inflow.resize(samples);
    out.outflow.resize(samples);
    out.speed.resize(samples);
    out.cumulative_inflow.resize(samples);
    out.cumulative_outflow.resize(samples);
    std::size_t entry_idx = 0;
    std::size_t exit_idx = 0;
    std::size_t log_idx = 0;
    double n_now = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double ts = out.time[s];
        while (entry_idx < entries.size() && entries[entry_idx].time <= ts) ++entry_idx;
        while (exit_idx < sorted_exits.size() && sorted_exits[exit_idx] <= ts) ++exit_idx;
        while (log_idx < n_log.size() && n_log[log_idx].first <= ts)
            n_now = n_log[log_idx++].second;
        const auto cum_in = static_cast<double>(entry_idx);
        const auto cum_out = static_cast<double>(exit_idx);
        out.cumulative_inflow[s] = cum_in;
        out.cumulative_outflow[s] = cum_out;
        out.accumulation[s] = n_now;
        out.speed[s] = speed_at_accumulation(cfg.mfd, n_now);
        if (s == 0) {
            out.inflow[s] = 0.0;
            out.outflow[s] = 0.0;
        } else {
            out.inflow[s] = (cum_in - out.cumulative_inflow[s - 1]) / res;
            out.outflow[s] = (cum_out - out.cumulative_outflow[s - 1]) / res;
        }
    }
}

SimResult run_trip_fixed_impl(const SimConfig& cfg) {
    cfg.validate();
    const double dt = cfg.engine_time_step;
    if (dt > cfg.generation_resolution)
        throw std::invalid_argument(
            "trip-based fixed: engine_time_step exceeds generation_resolution");
    steps_per_sample(cfg.output_resolution, dt);

    const auto entries = build_entries(cfg);
    if (entries.size() > cfg.max_trips)
        throw std::runtime_error("trip-based fixed: trip cap exceeded");

    std::vector<double> exit_times(entries.size(), kInf);
    ThresholdQueue queue;
    KahanSum production;
    std::size_t next_entry = 0;
    std::size_t active = 0;

    const auto total_steps =
        static_cast<std::size_t>(std::ceil(cfg.duration / dt - 1e-9));
    // Entries exactly at t = 0 are active from the first step.
    while (next_entry < entries.size() && entries[next_entry].time <= 0.0) {
        queue.emplace(entries[next_entry].distance, next_entry);
        ++next_entry;
        ++active;
    }

    for (std::size_t j = 0; j < total_steps; ++j) {
        const double t0 = static_cast<double>(j) * dt;
        const double t1 = std::min(t0 + dt, cfg.duration);
        const double v = speed_at_accumulation(cfg.mfd, static_cast<double>(active));
        const double p0 = production.value();
        const double p1 = p0 + v * (t1 - t0);

        // Trips entering within the step advance over its remainder.
        while (next_entry < entries.size() && entries[next_entry].time < t1) {
            const double te = entries[next_entry].time;
            const double p_entry = p0 + v * (te - t0);
            queue.emplace(p_entry + entries[next_entry].distance, next_entry);
            ++next_entry;
            ++active;
        }

        while (!queue.empty() && queue.top().first <= p1 + pop_slack(p1)) {
            const auto [threshold, id] = queue.top();
            queue.pop();
            double tx = t1;
            if (v > 0.0)
                tx = std::clamp(t0 + (threshold - p0) / v, t0, t1);
            exit_times[id] = tx;
            --active;
        }
        production.add(v * (t1 - t0));
        if (active > cfg.max_trips)
            throw std::runtime_error("trip-based fixed: trip cap exceeded");
    }

    // Rebuild the piecewise-constant accumulation trajectory from the
    // entry/exit deltas (exits within a step can be recorded out of order).
    std::vector<std::pair<double, double>> n_log;
    {
        std::vector<std::pair<double, int>> deltas;
        deltas.reserve(entries.size() + exit_times.size());
        for (std::size_t i = 0; i < next_entry; ++i)
            deltas.emplace_back(entries[i].time, +1);
        for (double tx : exit_times)
            if (tx <= cfg.duration) deltas.emplace_back(tx, -1);
        std::stable_sort(deltas.begin(), deltas.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        long count = 0;
        for (const auto& [t, d] : deltas) {
            count += d;
            n_log.emplace_back(t, static_cast<double>(count));
        }
    }

    SimResult out;
    std::vector<TripEntry> consumed(entries.begin(), entries.begin() + next_entry);
    std::vector<double> completed;
    for (std::size_t i = 0; i < exit_times.size(); ++i) {
        if (exit_times[i] == kInf) continue;
        out.trips.push_back({i, entries[i].time, entries[i].distance, exit_times[i]});
        completed.push_back(exit_times[i]);
    }
    std::sort(out.trips.begin(), out.trips.end(), [](const TripRecord& a, const TripRecord& b) {
        return a.exit_time != b.exit_time ? a.exit_time < b.exit_time : a.id < b.id;
    });
    fill_trip_series(cfg, out, consumed, completed, n_log);
    return out;
}

SimResult run_event_impl(const SimConfig& cfg) {
    cfg.validate();
    const auto entries = build_entries(cfg);
    if (entries.size() > cfg.max_trips)
        throw std::runtime_error("event-based: trip cap exceeded");

    std::vector<double> exit_times(entries.size(), kInf);
    std::vector<std::pair<double, double>> event_log;
    ThresholdQueue queue;
    KahanSum production;
    std::size_t next_entry = 0;
    std::size_t active = 0;
    double t = 0.0;

    // Entries at t = 0 are part of the initial state.
    while (next_entry < entries.size() && entries[next_entry].time <= 0.0) {
        queue.emplace(entries[next_entry].distance, next_entry);
        ++next_entry;
        ++active;
    }
    event_log.emplace_back(0.0, static_cast<double>(active));

    while (t < cfg.duration) {
        const double v = speed_at_accumulation(cfg.mfd, static_cast<double>(active));
        const double p = production.value();
        double t_exit = kInf;
        if (!queue.empty() && v > 0.0)
            t_exit = t + std::max(0.0, (queue.top().first - p) / v);
        const double t_entry =
            next_entry < entries.size() ? entries[next_entry].time : kInf;
        const double t_next = std::min({t_exit, t_entry, cfg.duration});

        production.add(v * (t_next - t));
        t = t_next;
        if (t >= cfg.duration) break;

        const double p_now = production.value();
        bool changed = false;
        while (!queue.empty() && queue.top().first <= p_now + pop_slack(p_now)) {
            const auto [threshold, id] = queue.top();
            queue.pop();
            exit_times[id] = t;
            --active;
            changed = true;
        }
        while (next_entry < entries.size() && entries[next_entry].time <= t) {
            queue.emplace(p_now + entries[next_entry].distance, next_entry);
            ++next_entry;
            ++active;
            changed = true;
        }
        if (changed) event_log.emplace_back(t, static_cast<double>(active));
        if (active > cfg.max_trips)
            throw std::runtime_error("event-based: trip cap exceeded");
    }

    SimResult out;
    out.event_log = event_log;
    std::vector<TripEntry> consumed(entries.begin(), entries.begin() + next_entry);
    std::vector<double> completed;
    for (std::size_t i = 0; i < exit_times.size(); ++i) {
        if (exit_times[i] == kInf) continue;
        out.trips.push_back({i, entries[i].time, entries[i].distance, exit_times[i]});
        completed.push_back(exit_times[i]);
    }
    std::sort(out.trips.begin(), out.trips.end(), [](const TripRecord& a, const TripRecord& b) {
        return a.exit_time != b.exit_time ? a.exit_time < b.exit_time : a.id < b.id;
    });
    fill_trip_series(cfg, out, consumed, completed, event_log);
    return out;
}

DynamicTdd collapse_to_means(const DynamicTdd& dyn) {
    DynamicTdd collapsed;
    for (const auto& [start, spec] : dyn.stages)
        collapsed.stages.emplace_back(start, TddSpec::mean_only(spec.mean_distance()));
    return collapsed;
}

}  // namespace

void SimConfig::validate() const {
    if (!(duration > 0.0)) throw std::invalid_argument("SimConfig: duration must be positive");
    if (!(output_resolution > 0.0) || !(engine_time_step > 0.0) ||
        !(generation_resolution > 0.0))
        throw std::invalid_argument("SimConfig: time steps must be positive");
    mfd.validate();
    tdd.validate();
    if (tdd.stages.front().first > 0.0)
        throw std::invalid_argument("SimConfig: first TDD stage must start at or before t = 0");
    if (demand.start_time() > 0.0 || demand.end_time() < duration)
        throw std::invalid_argument("SimConfig: demand profile must cover [0, duration]");
}

SimResult run_accumulation_based(const SimConfig& config) {
    return run_continuous<false>(config);
}

SimResult run_m_model(const SimConfig& config) {
    return run_continuous<true>(config);
}

SimResult run_trip_based_fixed(const SimConfig& config) {
    return run_trip_fixed_impl(config);
}

SimResult run_event_based(const SimConfig& config) {
    return run_event_impl(config);
}

std::string to_string(EngineVariant variant) {
    switch (variant) {
        case EngineVariant::AccumulationBased: return "ab";
        case EngineVariant::MModel: return "m";
        case EngineVariant::TripFixedMean: return "tb:m";
        case EngineVariant::TripFixedCategorical: return "tb:c";
        case EngineVariant::EventMean: return "eb:m";
        case EngineVariant::EventCategorical: return "eb:c";
    }
    throw std::invalid_argument("unknown engine variant");
}

EngineVariant parse_engine_variant(const std::string& tag) {
    if (tag == "ab") return EngineVariant::AccumulationBased;
    if (tag == "m") return EngineVariant::MModel;
    if (tag == "tb:m") return EngineVariant::TripFixedMean;
    if (tag == "tb:c") return EngineVariant::TripFixedCategorical;
    if (tag == "eb:m") return EngineVariant::EventMean;
    if (tag == "eb:c") return EngineVariant::EventCategorical;
    throw std::invalid_argument("unknown engine variant '" + tag + "'");
}

SimResult run_engine(EngineVariant variant, const SimConfig& config) {
    switch (variant) {
        case EngineVariant::AccumulationBased:
            return run_accumulation_based(config);
        case EngineVariant::MModel:
            return run_m_model(config);
        case EngineVariant::TripFixedCategorical:
            return run_trip_based_fixed(config);
        case EngineVariant::EventCategorical:
            return run_event_based(config);
        case EngineVariant::TripFixedMean: {
            SimConfig mean_cfg = config;
            mean_cfg.tdd = collapse_to_means(config.tdd);
            return run_trip_based_fixed(mean_cfg);
        }
        case EngineVariant::EventMean: {
            SimConfig mean_cfg = config;
            mean_cfg.tdd = collapse_to_means(config.tdd);
            return run_event_based(mean_cfg);
        }
    }
    throw std::invalid_argument("unknown engine variant");
}

std::vector<SuiteRun> run_scenario_suite(const std::vector<SuiteScenario>& scenarios,
                                         const std::vector<EngineVariant>& variants) {
    std::vector<SuiteRun> runs;
    runs.reserve(scenarios.size() * variants.size());
    for (const auto& scenario : scenarios) {
        for (const auto variant : variants) {
            SuiteRun run;
            run.label = scenario.label;
            run.variant = variant;
            try {
                run.result = run_engine(variant, scenario.config);
            } catch (const std::exception& ex) {
                run.error = ex.what();
            }
            runs.push_back(std::move(run));
        }
    }
    return runs;
}

}  // namespace bathtub
