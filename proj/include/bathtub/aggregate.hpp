#pragma once

#include <span>
#include <string>
#include <vector>

#include "bathtub/tdd.hpp"

namespace bathtub {

/// One link at one time step, in the units declared by the source file
/// (density [veh/km], lane distance [km*lane], speed per file header).
struct LinkRecord {
    double time;
    std::string link_id;
    double density;
    double speed;
    double lane_distance;
};

struct NetworkState {
    double accumulation;   ///< [veh]
    double speed;          ///< vehicle-weighted mean, input units
    double lane_distance;  ///< active lane distance [km*lane]
};

/// Aggregates one time slice: n = sum k_l d_l, v = sum v_l k_l d_l / n
/// (0 when empty), L_N over links with k_l >= density_threshold.
NetworkState aggregate_network_state(std::span<const LinkRecord> records,
                                     double density_threshold = 3.0);

/// Vehicle-weighted standard deviation of link speeds around the weighted mean.
double speed_dispersion(std::span<const LinkRecord> records);

struct OdRoute {
    std::string route_id;
    double length;      ///< [m]
    double proportion;  ///< assignment proportion within the OD pair
};

struct OdAssignment {
    std::string origin;
    std::string destination;
    double flow;  ///< [veh/h]
    std::vector<OdRoute> routes;

    void validate() const;
};

/// Flow-weighted categorical TDD over a strictly increasing category grid:
/// routes fall into [edge_i, edge_{i+1}) bins (last edge inclusive); category
/// means are the flow-weighted means of the routes inside each bin.
TddSpec derive_tdd(std::span<const OdAssignment> assignments,
                   std::span<const double> category_edges);

/// Builds a 1 km-wide default grid spanning the observed route lengths.
std::vector<double> default_category_edges(std::span<const OdAssignment> assignments,
                                           double bin_width_m = 1000.0);

struct ScatterRow {
    std::string scope;  ///< link id or "network"
    double time;
    double density;
    double flow;  ///< k*v per link; network production / L_N at network scope
};

/// Per-link (k, q = k v) series for the selected links plus the network-level
/// (density, average flow) series; records must span at least two time steps.
std::vector<ScatterRow> flow_density_scatter(std::span<const LinkRecord> records,
                                             std::span<const std::string> link_selection,
                                             double density_threshold = 3.0);

}  // namespace bathtub
