#include "bathtub/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace bathtub {

NetworkState aggregate_network_state(std::span<const LinkRecord> records,
                                     double density_threshold) {
    if (records.empty())
        throw std::invalid_argument("aggregate_network_state: empty record set");
    double n = 0.0;
    double weighted_speed = 0.0;
    double lane = 0.0;
    for (const auto& r : records) {
        if (r.density < 0.0 || r.speed < 0.0 || r.lane_distance < 0.0)
            throw std::invalid_argument("aggregate_network_state: negative link value");
        const double vehicles = r.density * r.lane_distance;
        n += vehicles;
        weighted_speed += r.speed * vehicles;
        if (r.density >= density_threshold) lane += r.lane_distance;
    }
    NetworkState state;
    state.accumulation = n;
    state.speed = n > 0.0 ? weighted_speed / n : 0.0;
    state.lane_distance = lane;
    return state;
}

double speed_dispersion(std::span<const LinkRecord> records) {
    if (records.empty())
        throw std::invalid_argument("speed_dispersion: empty record set");
    const NetworkState state = aggregate_network_state(records, 0.0);
    if (state.accumulation <= 0.0) return 0.0;
    double ss = 0.0;
    for (const auto& r : records) {
        const double d = r.speed - state.speed;
        ss += r.density * r.lane_distance * d * d;
    }
    return std::sqrt(ss / state.accumulation);
}

void OdAssignment::validate() const {
    if (flow < 0.0) throw std::invalid_argument("OdAssignment: negative flow");
    if (routes.empty()) throw std::invalid_argument("OdAssignment: no routes");
    double sum = 0.0;
    for (const auto& r : routes) {
        if (!(r.length > 0.0))
            throw std::invalid_argument("OdAssignment: route length must be positive");
        if (r.proportion < 0.0)
            throw std::invalid_argument("OdAssignment: negative route proportion");
        sum += r.proportion;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("OdAssignment: route proportions must sum to 1");
}

TddSpec derive_tdd(std::span<const OdAssignment> assignments,
                   std::span<const double> category_edges) {
    if (assignments.empty()) throw std::invalid_argument("derive_tdd: no assignments");
    if (category_edges.size() < 2)
        throw std::invalid_argument("derive_tdd: need at least two category edges");
    for (std::size_t i = 1; i < category_edges.size(); ++i)
        if (!(category_edges[i] > category_edges[i - 1]))
            throw std::invalid_argument("derive_tdd: edges must be strictly increasing");

    const std::size_t bins = category_edges.size() - 1;
    std::vector<double> flow_per_bin(bins, 0.0);
    std::vector<double> distance_flow_per_bin(bins, 0.0);
    double total_flow = 0.0;

    auto bin_of = [&](double length) -> std::size_t {
        if (length < category_edges.front() || length > category_edges.back())
            throw std::invalid_argument("derive_tdd: route length outside the category grid");
        if (length == category_edges.back()) return bins - 1;
        const auto it = std::upper_bound(category_edges.begin(), category_edges.end(), length);
        return static_cast<std::size_t>(it - category_edges.begin()) - 1;
    };

    for (const auto& od : assignments) {
        od.validate();
        total_flow += od.flow;
        for (const auto& route : od.routes) {
            const double assigned = od.flow * route.proportion;
            const std::size_t b = bin_of(route.length);
            flow_per_bin[b] += assigned;
            distance_flow_per_bin[b] += route.length * assigned;
        }
    }
    if (!(total_flow > 0.0)) throw std::invalid_argument("derive_tdd: zero total flow");

    std::vector<TddCategory> categories;
    for (std::size_t b = 0; b < bins; ++b) {
        if (flow_per_bin[b] <= 0.0) continue;
        categories.push_back({distance_flow_per_bin[b] / flow_per_bin[b],
                              flow_per_bin[b] / total_flow});
    }
    return TddSpec::categorical(std::move(categories));
}

std::vector<double> default_category_edges(std::span<const OdAssignment> assignments,
                                           double bin_width_m) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& od : assignments) {
        for (const auto& r : od.routes) {
            lo = std::min(lo, r.length);
            hi = std::max(hi, r.length);
        }
    }
    if (!(hi > 0.0)) throw std::invalid_argument("default_category_edges: no routes");
    const double first = std::floor(lo / bin_width_m) * bin_width_m;
    std::vector<double> edges;
    for (double e = first; e < hi + bin_width_m; e += bin_width_m) edges.push_back(e);
    return edges;
}

std::vector<ScatterRow> flow_density_scatter(std::span<const LinkRecord> records,
                                             std::span<const std::string> link_selection,
                                             double density_threshold) {
    std::map<double, std::vector<const LinkRecord*>> by_time;
    for (const auto& r : records) by_time[r.time].push_back(&r);
    if (by_time.size() < 2)
        throw std::invalid_argument("flow_density_scatter: records must span >= 2 time steps");

    const std::set<std::string> selected(link_selection.begin(), link_selection.end());
    std::vector<ScatterRow> rows;
    for (const auto& [t, slice] : by_time) {
        for (const LinkRecord* r : slice) {
            if (!selected.empty() && !selected.count(r->link_id)) continue;
            rows.push_back({r->link_id, t, r->density, r->density * r->speed});
        }
        std::vector<LinkRecord> copy;
        copy.reserve(slice.size());
        for (const LinkRecord* r : slice) copy.push_back(*r);
        const NetworkState state = aggregate_network_state(copy, density_threshold);
        if (state.lane_distance > 0.0) {
            const double density = state.accumulation / state.lane_distance;
            rows.push_back({"network", t, density, density * state.speed});
        } else {
            rows.push_back({"network", t, 0.0, 0.0});
        }
    }
    return rows;
}

}  // namespace bathtub
