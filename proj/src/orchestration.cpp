#include "edgeprice/orchestration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "edgeprice/node_models.hpp"

namespace edgeprice {

std::optional<double> destination_cost(double max_delay, const DestinationQuote& quote, const ImportanceWeights& w,
                                       double energy_budget, double price_preference) {
    if (quote.energy > energy_budget) return std::nullopt;
    double energy_term = std::isinf(energy_budget) ? 0.0 : w.energy * quote.energy / energy_budget;
    return w.delay * quote.delay / max_delay + energy_term + w.price * quote.price / price_preference;
}

namespace {

struct Best {
    std::optional<std::size_t> index;
    std::optional<double> cost;
};

// Strict improvement only, so earlier candidates win ties.
Best argmin(const Task& task, const ImportanceWeights& w, double budget, std::span<const DestinationQuote> quotes,
            double pref, std::size_t& evaluations) {
    Best best;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        ++evaluations;
        auto c = destination_cost(task.max_delay, quotes[i], w, budget, pref);
        if (c && (!best.cost || *c < *best.cost)) best = {i, c};
    }
    return best;
}

OffloadDecision decide_flat(const Task& task, const ImportanceWeights& w, double budget,
                            const DestinationQuote& local, std::span<const DestinationQuote> remote, double pref) {
    OffloadDecision d;
    auto local_cost = destination_cost(task.max_delay, local, w, budget, pref);
    ++d.evaluations;
    Best remote_best = argmin(task, w, budget, remote, pref, d.evaluations);
    if (remote_best.cost && (!local_cost || *remote_best.cost < *local_cost)) {
        d.destination = remote_best.index;
        d.cost = *remote_best.cost;
    } else if (local_cost) {
        d.cost = *local_cost;
    } else {
        d.feasible = false;
        d.cost = std::numeric_limits<double>::infinity();
    }
    return d;
}

}  // namespace

OffloadDecision decide_decentralized(const Task& task, const ImportanceWeights& w, double energy_budget,
                                     const DestinationQuote& local, std::span<const DestinationQuote> servers,
                                     double price_preference) {
    return decide_flat(task, w, energy_budget, local, servers, price_preference);
}

OffloadDecision decide_hybrid(const Task& task, const ImportanceWeights& w, double energy_budget,
                              const DestinationQuote& local, std::span<const DestinationQuote> clusters,
                              double price_preference) {
    return decide_flat(task, w, energy_budget, local, clusters, price_preference);
}

OffloadDecision decide_centralized(const Task& task, const ImportanceWeights& w, double energy_budget,
                                   const DestinationQuote& local, std::span<const DestinationQuote> servers,
                                   double price_preference) {
    OffloadDecision d;
    Best platform = argmin(task, w, energy_budget, servers, price_preference, d.evaluations);
    auto local_cost = destination_cost(task.max_delay, local, w, energy_budget, price_preference);
    ++d.evaluations;
    if (platform.cost && (!local_cost || *platform.cost <= *local_cost)) {
        d.destination = platform.index;
        d.cost = *platform.cost;
    } else if (local_cost) {
        d.cost = *local_cost;
    } else {
        d.feasible = false;
        d.cost = std::numeric_limits<double>::infinity();
    }
    return d;
}

std::size_t allocate_in_cluster(std::span<const std::size_t> queue_lengths) {
    if (queue_lengths.empty()) throw std::invalid_argument("allocate_in_cluster: empty cluster");
    std::size_t best = 0;
    for (std::size_t i = 1; i < queue_lengths.size(); ++i) {
        if (queue_lengths[i] < queue_lengths[best]) best = i;
    }
    return best;
}

DestinationQuote local_quote(const Task& task, const DeviceTypeSpec& device, double local_queued_mi) {
    DestinationQuote q;
    q.delay = task.length_mi / device.mips_per_core + local_queued_mi / (device.cores * device.mips_per_core);
    q.energy = local_exec_energy(device.max_power, task.length_mi, device.cores, device.mips_per_core);
    q.price = 0.0;
    return q;
}

DestinationQuote remote_quote(const Task& task, const DeviceTypeSpec& device, const ServerSpec& server,
                              double uplink_rate, double downlink_rate, double propagation,
                              double queue_estimate, double price) {
    DestinationQuote q;
    q.delay = task.input_bits / uplink_rate + task.output_bits / downlink_rate + propagation +
              task.length_mi / server.mips_per_core + queue_estimate;
    q.energy = tx_rx_energy(device.tx_power, device.rx_power, task.input_bits, task.output_bits, uplink_rate,
                            downlink_rate);
    q.price = price;
    return q;
}

}  // namespace edgeprice
