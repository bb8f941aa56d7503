#include "bathtub/demand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bathtub {

DemandProfile::DemandProfile(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
    if (points_.size() < 2)
        throw std::invalid_argument("DemandProfile: need at least two breakpoints");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].second < 0.0)
            throw std::invalid_argument("DemandProfile: negative rate");
        if (i > 0 && !(points_[i].first > points_[i - 1].first))
            throw std::invalid_argument("DemandProfile: times must be strictly increasing");
    }
}

double DemandProfile::rate_at(double t) const {
    if (t < start_time() || t > end_time())
        throw std::domain_error("DemandProfile: time outside profile support");
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const auto& p) { return v < p.first; });
    if (it == points_.begin()) return points_.front().second;
    if (it == points_.end()) return points_.back().second;
    const auto& [t1, r1] = *(it - 1);
    const auto& [t2, r2] = *it;
    const double f = (t - t1) / (t2 - t1);
    return r1 + f * (r2 - r1);
}

double DemandProfile::integrate(double a, double b) const {
    if (b < a) throw std::invalid_argument("DemandProfile::integrate: b < a");
    if (a < start_time() || b > end_time())
        throw std::domain_error("DemandProfile::integrate: window outside profile support");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        const double lo = std::max(a, points_[i].first);
        const double hi = std::min(b, points_[i + 1].first);
        if (hi <= lo) continue;
        total += 0.5 * (rate_at(lo) + rate_at(hi)) * (hi - lo);
    }
    return total;
}

void ClassCoefficientSchedule::validate() const {
    for (const auto& entry : classes) {
        if (entry.stages.empty())
            throw std::invalid_argument("ClassCoefficientSchedule: class '" + entry.label +
                                        "' has no stages");
        for (std::size_t i = 0; i < entry.stages.size(); ++i) {
            if (entry.stages[i].second < 0.0)
                throw std::invalid_argument("ClassCoefficientSchedule: negative multiplier");
            if (i > 0 && !(entry.stages[i].first > entry.stages[i - 1].first))
                throw std::invalid_argument(
                    "ClassCoefficientSchedule: stage starts must be strictly increasing");
        }
    }
}

double ClassCoefficientSchedule::multiplier_at(const std::string& label, double t) const {
    for (const auto& entry : classes) {
        if (entry.label != label) continue;
        if (t < entry.stages.front().first)
            throw std::domain_error("ClassCoefficientSchedule: time precedes first stage");
        double value = entry.stages.front().second;
        for (const auto& [start, mult] : entry.stages) {
            if (start <= t) value = mult;
            else break;
        }
        return value;
    }
    throw std::invalid_argument("ClassCoefficientSchedule: unknown class '" + label + "'");
}

TddSpec apply_class_coefficients(
    const std::vector<std::pair<std::string, std::vector<TddCategory>>>& base_by_class,
    const ClassCoefficientSchedule& schedule, double t) {
    if (base_by_class.empty())
        throw std::invalid_argument("apply_class_coefficients: empty base map");
    schedule.validate();

    double base_sum = 0.0;
    for (const auto& [label, cats] : base_by_class)
        for (const auto& c : cats) base_sum += c.proportion;
    if (std::fabs(base_sum - 1.0) > 1e-9)
        throw std::invalid_argument(
            "apply_class_coefficients: merged base proportions must sum to 1");

    std::map<double, double> scaled;  // distance -> weighted proportion
    double weight_sum = 0.0;
    for (const auto& [label, cats] : base_by_class) {
        const double m = schedule.multiplier_at(label, t);
        for (const auto& c : cats) {
            scaled[c.mean_distance] += m * c.proportion;
            weight_sum += m * c.proportion;
        }
    }
    if (!(weight_sum > 0.0))
        throw std::invalid_argument("apply_class_coefficients: all multipliers are zero at t");

    std::vector<TddCategory> merged;
    for (const auto& [distance, weight] : scaled) {
        if (weight <= 0.0) continue;
        merged.push_back({distance, weight / weight_sum});
    }
    return TddSpec::categorical(std::move(merged));
}

}  // namespace bathtub
