#include "bathtub/tdd.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bathtub {

namespace {

constexpr double kProportionTol = 1e-9;

void compute_moments(const std::vector<TddCategory>& cats, double& mean, double& variance) {
    mean = 0.0;
    for (const auto& c : cats) mean += c.proportion * c.mean_distance;
    variance = 0.0;
    for (const auto& c : cats) {
        const double d = c.mean_distance - mean;
        variance += c.proportion * d * d;
    }
}

}  // namespace

TddSpec TddSpec::mean_only(double mean_distance_m) {
    if (!(mean_distance_m > 0.0))
        throw std::invalid_argument("TddSpec: mean distance must be positive");
    TddSpec spec;
    spec.level_ = TddLevel::MeanOnly;
    spec.mean_ = mean_distance_m;
    spec.variance_ = 0.0;
    spec.categories_ = {{mean_distance_m, 1.0}};
    return spec;
}

TddSpec TddSpec::categorical(std::vector<TddCategory> categories) {
    if (categories.empty())
        throw std::invalid_argument("TddSpec: no categories");
    double sum = 0.0;
    for (const auto& c : categories) {
        if (!(c.mean_distance > 0.0))
            throw std::invalid_argument("TddSpec: category mean distance must be positive");
        if (c.proportion < -kProportionTol || c.proportion > 1.0 + kProportionTol)
            throw std::invalid_argument("TddSpec: category proportion outside [0, 1]");
        sum += c.proportion;
    }
    if (std::fabs(sum - 1.0) > kProportionTol)
        throw std::invalid_argument("TddSpec: category proportions must sum to 1");
    TddSpec spec;
    spec.level_ = TddLevel::Categorical;
    spec.categories_ = std::move(categories);
    compute_moments(spec.categories_, spec.mean_, spec.variance_);
    return spec;
}

TddSpec TddSpec::individual(std::vector<double> distances_m) {
    if (distances_m.empty())
        throw std::invalid_argument("TddSpec: no individual distances");
    for (double d : distances_m)
        if (!(d > 0.0))
            throw std::invalid_argument("TddSpec: individual distances must be positive");
    TddSpec spec;
    spec.level_ = TddLevel::Individual;
    spec.individuals_ = std::move(distances_m);
    std::map<double, std::size_t> counts;
    for (double d : spec.individuals_) ++counts[d];
    const double total = static_cast<double>(spec.individuals_.size());
    for (const auto& [d, c] : counts)
        spec.categories_.push_back({d, static_cast<double>(c) / total});
    compute_moments(spec.categories_, spec.mean_, spec.variance_);
    return spec;
}

void DynamicTdd::validate() const {
    if (stages.empty()) throw std::invalid_argument("DynamicTdd: no stages");
    for (std::size_t i = 1; i < stages.size(); ++i)
        if (!(stages[i].first > stages[i - 1].first))
            throw std::invalid_argument("DynamicTdd: stage starts must be strictly increasing");
}

DynamicTdd static_tdd(TddSpec spec, double start_time) {
    DynamicTdd dyn;
    dyn.stages.emplace_back(start_time, std::move(spec));
    return dyn;
}

const TddSpec& tdd_at(const DynamicTdd& dyn, double t) {
    dyn.validate();
    if (t < dyn.stages.front().first)
        throw std::domain_error("tdd_at: time precedes the first stage");
    const TddSpec* active = &dyn.stages.front().second;
    for (const auto& [start, spec] : dyn.stages) {
        if (start <= t) active = &spec;
        else break;
    }
    return *active;
}

double steady_distance(double mean_distance, double variance) {
    if (!(mean_distance > 0.0))
        throw std::domain_error("steady_distance: mean distance must be positive");
    return (mean_distance * mean_distance + variance) / (2.0 * mean_distance);
}

double steady_distance(const TddSpec& spec) {
    return steady_distance(spec.mean_distance(), spec.variance());
}

std::vector<TripEntry> generate_entries(const TddSpec& spec, double inflow_count,
                                        double window_start, double window_end,
                                        GenerationState& carry) {
    if (inflow_count < 0.0)
        throw std::invalid_argument("generate_entries: negative inflow");
    if (!(window_end > window_start))
        throw std::invalid_argument("generate_entries: empty window");

    const auto& cats = spec.categories();
    if (carry.residual.size() != cats.size())
        carry.residual.assign(cats.size(), 0.0);

    std::vector<std::size_t> counts(cats.size(), 0);
    std::size_t total = 0;
    for (std::size_t i = 0; i < cats.size(); ++i) {
        carry.residual[i] += inflow_count * cats[i].proportion;
        const double whole = std::floor(carry.residual[i]);
        carry.residual[i] -= whole;
        counts[i] = static_cast<std::size_t>(whole);
        total += counts[i];
    }

    std::vector<TripEntry> entries;
    entries.reserve(total);
    if (total == 0) return entries;

    const double slot = (window_end - window_start) / static_cast<double>(total);
    std::size_t emitted = 0;
    auto remaining = counts;
    while (emitted < total) {
        for (std::size_t i = 0; i < cats.size() && emitted < total; ++i) {
            if (remaining[i] == 0) continue;
            --remaining[i];
            const double t = window_start + (static_cast<double>(emitted) + 0.5) * slot;
            entries.push_back({t, cats[i].mean_distance});
            ++emitted;
        }
    }
    return entries;
}

std::vector<ChiSquarePair> chi_square_stationarity(
    const std::vector<std::vector<double>>& histograms, double significance) {
    if (histograms.size() < 2)
        throw std::invalid_argument("chi_square_stationarity: need at least two histograms");
    if (!(significance > 0.0 && significance < 1.0))
        throw std::invalid_argument("chi_square_stationarity: significance outside (0, 1)");
    const std::size_t k = histograms.front().size();
    if (k < 2)
        throw std::invalid_argument("chi_square_stationarity: need at least two categories");
    for (const auto& h : histograms) {
        if (h.size() != k)
            throw std::invalid_argument("chi_square_stationarity: mismatched category grids");
        for (double v : h)
            if (v < 0.0)
                throw std::invalid_argument("chi_square_stationarity: negative count");
    }

    const boost::math::chi_squared dist(static_cast<double>(k - 1));
    const double critical = boost::math::quantile(dist, 1.0 - significance);

    std::vector<ChiSquarePair> results;
    for (std::size_t a = 0; a < histograms.size(); ++a) {
        for (std::size_t b = a + 1; b < histograms.size(); ++b) {
            const auto& ha = histograms[a];
            const auto& hb = histograms[b];
            double na = 0.0, nb = 0.0;
            for (std::size_t d = 0; d < k; ++d) {
                na += ha[d];
                nb += hb[d];
            }
            if (!(na > 0.0 && nb > 0.0))
                throw std::invalid_argument("chi_square_stationarity: empty histogram");
            double stat = 0.0;
            for (std::size_t d = 0; d < k; ++d) {
                const double pooled = (ha[d] + hb[d]) / (na + nb);
                if (!(pooled > 0.0))
                    throw std::invalid_argument(
                        "chi_square_stationarity: zero expected count in category " +
                        std::to_string(d));
                const double ea = na * pooled;
                const double eb = nb * pooled;
                stat += (ha[d] - ea) * (ha[d] - ea) / ea + (hb[d] - eb) * (hb[d] - eb) / eb;
            }
            ChiSquarePair pair;
            pair.first = a;
            pair.second = b;
            pair.statistic = stat;
            pair.dof = k - 1;
            pair.p_value = 1.0 - boost::math::cdf(dist, stat);
            pair.reject = stat > critical;
            results.push_back(pair);
        }
    }
    return results;
}

}  // namespace bathtub
