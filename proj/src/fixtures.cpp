#include "bathtub/fixtures.hpp"

#include <stdexcept>

namespace bathtub::fixtures {

namespace {

// Categorical spec over 1 km bins centered at 500 + 1000*i meters, with
// integer percent weights (mean = 500 + 10 * sum(i * percent[i])).
TddSpec bins_from_percents(const std::vector<int>& percents) {
    std::vector<TddCategory> cats;
    for (std::size_t i = 0; i < percents.size(); ++i) {
        if (percents[i] == 0) continue;
        cats.push_back({500.0 + 1000.0 * static_cast<double>(i),
                        static_cast<double>(percents[i]) / 100.0});
    }
    return TddSpec::categorical(std::move(cats));
}

}  // namespace

MfdParams df_params() { return {0.034, 19.2, 0.18, 0.43, 2.42, 213000.0}; }
MfdParams du_params() { return {0.03, 12.1, 0.15, 0.57, 3.0, 94000.0}; }
MfdParams toy_params() { return {0.03, 9.2, 0.34, 0.55, 2.5, 58000.0}; }

TddSpec df_static_tdd() {
    // 13 bins over 0-13 km, mean 5280 m, secondary peak in the 8-9 km bin.
    return bins_from_percents({4, 12, 12, 13, 12, 9, 7, 5, 13, 5, 5, 2, 1});
}

TddSpec du_static_tdd() {
    // 9 bins over 0-9 km, mean 3230 m.
    return bins_from_percents({12, 19, 21, 17, 12, 8, 6, 3, 2});
}

TddSpec toy_static_tdd() {
    // Sparse route lengths: three empty bins, mean 3460 m.
    return TddSpec::categorical({{500.0, 0.22}, {2500.0, 0.28}, {4500.0, 0.30}, {6500.0, 0.20}});
}

DynamicTdd df_dynamic_tdd() {
    DynamicTdd dyn;
    dyn.stages.emplace_back(0.0, bins_from_percents({4, 12, 12, 9, 12, 9, 7, 5, 17, 5, 5, 2, 1}));
    dyn.stages.emplace_back(3000.0,
                            bins_from_percents({4, 12, 12, 13, 13, 9, 7, 5, 12, 5, 5, 2, 1}));
    dyn.stages.emplace_back(6000.0,
                            bins_from_percents({4, 13, 12, 13, 17, 9, 7, 5, 7, 5, 5, 2, 1}));
    return dyn;
}

DynamicTdd du_dynamic_tdd() {
    DynamicTdd dyn;
    dyn.stages.emplace_back(0.0, bins_from_percents({12, 19, 13, 17, 12, 8, 14, 3, 2}));
    dyn.stages.emplace_back(3000.0, bins_from_percents({12, 19, 21, 16, 12, 9, 6, 3, 2}));
    dyn.stages.emplace_back(6000.0, bins_from_percents({12, 26, 21, 17, 12, 1, 6, 3, 2}));
    return dyn;
}

DemandProfile builtin_profile(const std::string& name, double peak_veh_per_s,
                              double duration_s) {
    if (!(peak_veh_per_s > 0.0) || !(duration_s > 0.0))
        throw std::invalid_argument("builtin_profile: peak and duration must be positive");
    const double e = peak_veh_per_s;
    const double T = duration_s;
    if (name == "profile1") {
        return DemandProfile({{0.0, 0.1 * e},
                              {T * 0.10, 0.1 * e},
                              {T * 0.1667, e},
                              {T * 0.3667, e},
                              {T * 0.4333, 0.35 * e},
                              {T * 0.60, 0.25 * e},
                              {T, 0.05 * e}});
    }
    if (name == "profile2") {
        return DemandProfile({{0.0, 0.1 * e},
                              {T * 0.2667, 0.75 * e},
                              {T * 0.40, e},
                              {T * 0.5333, 0.75 * e},
                              {T, 0.1 * e}});
    }
    throw std::invalid_argument("builtin_profile: unknown profile '" + name + "'");
}

std::vector<std::pair<std::string, std::vector<TddCategory>>> df_class_tdds() {
    // Static DF bins partitioned into internal (0-4 km), mixed (4-7 km) and
    // external (7-13 km) OD classes; joint proportions sum to 1.
    return {
        {"int-int", {{500.0, 0.04}, {1500.0, 0.12}, {2500.0, 0.12}, {3500.0, 0.13}}},
        {"ext-int", {{4500.0, 0.12}, {5500.0, 0.09}, {6500.0, 0.07}}},
        {"ext-ext",
         {{7500.0, 0.05}, {8500.0, 0.13}, {9500.0, 0.05}, {10500.0, 0.05}, {11500.0, 0.02},
          {12500.0, 0.01}}},
    };
}

ClassCoefficientSchedule df_class_schedule() {
    ClassCoefficientSchedule schedule;
    schedule.classes = {
        {"int-int", {{0.0, 0.6}, {3000.0, 1.0}, {6000.0, 1.5}}},
        {"ext-int", {{0.0, 1.0}, {3000.0, 1.25}, {6000.0, 1.0}}},
        {"ext-ext", {{0.0, 1.5}, {3000.0, 1.0}, {6000.0, 0.5}}},
    };
    return schedule;
}

std::vector<SuiteScenario> table1_suite() {
    constexpr double kDuration = 9000.0;

    auto make = [](std::string label, MfdParams params, DynamicTdd tdd,
                   const std::string& profile, double peak, double trip_dt) {
        SimConfig cfg{kDuration,
                      60.0,
                      trip_dt,
                      params,
                      builtin_profile(profile, peak, kDuration),
                      std::move(tdd),
                      0.0,
                      60.0};
        return SuiteScenario{std::move(label), std::move(cfg)};
    };

    std::vector<SuiteScenario> scenarios;
    scenarios.push_back(make("DF-S-1", df_params(), static_tdd(df_static_tdd()), "profile1", 5.5, 2.0));
    scenarios.push_back(make("DF-S-2", df_params(), static_tdd(df_static_tdd()), "profile2", 5.5, 2.0));
    scenarios.push_back(make("DU-S-1", du_params(), static_tdd(du_static_tdd()), "profile1", 3.0, 2.0));
    scenarios.push_back(make("DU-S-2", du_params(), static_tdd(du_static_tdd()), "profile2", 3.0, 2.0));
    scenarios.push_back(make("T-S-1", toy_params(), static_tdd(toy_static_tdd()), "profile1", 4.4, 0.5));
    scenarios.push_back(make("T-S-2", toy_params(), static_tdd(toy_static_tdd()), "profile2", 4.4, 0.5));
    scenarios.push_back(make("DF-D-1", df_params(), df_dynamic_tdd(), "profile1", 5.5, 2.0));
    scenarios.push_back(make("DF-D-2", df_params(), df_dynamic_tdd(), "profile2", 5.5, 2.0));
    scenarios.push_back(make("DU-D-1", du_params(), du_dynamic_tdd(), "profile1", 3.0, 2.0));
    scenarios.push_back(make("DU-D-2", du_params(), du_dynamic_tdd(), "profile2", 3.0, 2.0));
    return scenarios;
}

}  // namespace bathtub::fixtures
