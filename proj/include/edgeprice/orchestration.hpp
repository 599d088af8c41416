#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "edgeprice/domain.hpp"

namespace edgeprice {

/// Reference price per MI that normalizes the price term of the cost.
inline constexpr double kDefaultPricePreference = 0.01;

/// Delay, energy and price of running one task at one destination.
struct DestinationQuote {
    double delay = 0.0;   // seconds
    double energy = 0.0;  // joules spent by the device
    double price = 0.0;   // per MI; 0 for local execution
};

/// `destination` indexes the quote list; empty means local execution.
struct OffloadDecision {
    std::optional<std::size_t> destination;
    double cost = 0.0;
    bool feasible = true;  // false: nothing was feasible, fell back to local
    std::size_t evaluations = 0;
};

/// w_d D / D_max + w_e E / B_e + w_p p / p_pref, or empty when E > B_e.
/// An infinite budget (mains-powered device) zeroes the energy term.
std::optional<double> destination_cost(double max_delay, const DestinationQuote& quote, const ImportanceWeights& w,
                                       double energy_budget, double price_preference = kDefaultPricePreference);

/// Argmin over local and the remote quotes. Ties keep local, then the lowest
/// index; with nothing feasible the task stays local.
OffloadDecision decide_decentralized(const Task& task, const ImportanceWeights& w, double energy_budget,
                                     const DestinationQuote& local, std::span<const DestinationQuote> servers,
                                     double price_preference = kDefaultPricePreference);

/// Same rule over one quote per cluster (head propagation, cluster estimate).
OffloadDecision decide_hybrid(const Task& task, const ImportanceWeights& w, double energy_budget,
                              const DestinationQuote& local, std::span<const DestinationQuote> clusters,
                              double price_preference = kDefaultPricePreference);

/// The orchestrator picks the cheapest server, then the device offloads iff
/// that cost does not exceed its local cost.
OffloadDecision decide_centralized(const Task& task, const ImportanceWeights& w, double energy_budget,
                                   const DestinationQuote& local, std::span<const DestinationQuote> servers,
                                   double price_preference = kDefaultPricePreference);

/// Position of the member with the fewest tasks; ties to the lowest position.
std::size_t allocate_in_cluster(std::span<const std::size_t> queue_lengths);

/// D_0 = c / f_0 + Q_0 / (n_0 f_0), E_0 = P_max c / (n_0 f_0), no price.
DestinationQuote local_quote(const Task& task, const DeviceTypeSpec& device, double local_queued_mi);

/// Network, propagation, execution and published queue estimate.
DestinationQuote remote_quote(const Task& task, const DeviceTypeSpec& device, const ServerSpec& server,
                              double uplink_rate, double downlink_rate, double propagation,
                              double queue_estimate, double price);

}  // namespace edgeprice
