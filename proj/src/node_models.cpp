#include "edgeprice/node_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgeprice {

Cpu::Cpu(int cores, double mips_per_core) : cores_(cores), mips_(mips_per_core) {
    if (cores < 1 || !(mips_per_core > 0.0)) throw std::invalid_argument("cpu needs cores >= 1 and mips > 0");
    running_.reserve(static_cast<std::size_t>(cores));
}

void Cpu::account(double now) {
    busy_integral_ += static_cast<double>(running_.size()) * (now - last_change_);
    last_change_ = now;
}

Cpu::Started Cpu::begin(TaskId id, double length_mi, double now) {
    double finish = now + length_mi / mips_;
    running_.push_back(Running{id, length_mi, now, finish});
    return Started{id, finish};
}

std::optional<Cpu::Started> Cpu::submit(TaskId id, double length_mi, double now) {
    account(now);
    if (running_.size() < static_cast<std::size_t>(cores_)) return begin(id, length_mi, now);
    queue_.push_back(Waiting{id, length_mi});
    waiting_mi_ += length_mi;
    return std::nullopt;
}

std::optional<Cpu::Started> Cpu::finish(TaskId id, double now) {
    auto it = std::find_if(running_.begin(), running_.end(), [id](const Running& r) { return r.id == id; });
    if (it == running_.end()) return std::nullopt;
    account(now);
    running_.erase(it);
    if (queue_.empty()) return std::nullopt;
    Waiting head = queue_.front();
    queue_.pop_front();
    waiting_mi_ -= head.length_mi;
    if (queue_.empty()) waiting_mi_ = 0.0;  // drop accumulated rounding
    return begin(head.id, head.length_mi, now);
}

std::vector<TaskId> Cpu::clear(double now) {
    account(now);
    std::vector<TaskId> ids;
    for (const auto& r : running_) ids.push_back(r.id);
    for (const auto& w : queue_) ids.push_back(w.id);
    running_.clear();
    queue_.clear();
    waiting_mi_ = 0.0;
    return ids;
}

double Cpu::queued_mi(double now) const {
    double total = waiting_mi_;
    for (const auto& r : running_) total += std::max(0.0, (r.finish - now) * mips_);
    return total;
}

double Cpu::busy_core_seconds(double now) const {
    return busy_integral_ + static_cast<double>(running_.size()) * (now - last_change_);
}

Location random_location(const Area& area, RngStream& rng) {
    double x = rng.uniform(0.0, area.length);
    double y = rng.uniform(0.0, area.width);
    return Location{x, y};
}

MobilityState start_mobility(const DeviceTypeSpec& type, Location start, double now, RngStream& rng) {
    MobilityState s;
    s.location = start;
    s.waypoint = start;
    s.moving = false;
    s.phase_end = is_static(type) ? INFINITY : now + rng.uniform(type.pause_min, type.pause_max);
    return s;
}

Location update_mobility(MobilityState& state, const DeviceTypeSpec& type, const Area& area, double now,
                         double dt, RngStream& rng) {
    if (is_static(type)) return state.location;
    if (now >= state.phase_end) {
        state.moving = !state.moving;
        double lo = state.moving ? type.mobility_min : type.pause_min;
        double hi = state.moving ? type.mobility_max : type.pause_max;
        // Zero-length phases would flip every tick without bound; floor at dt.
        state.phase_end = now + std::max(dt, rng.uniform(lo, hi));
        if (state.moving) state.waypoint = random_location(area, rng);
    }
    if (!state.moving) return state.location;

    double step = type.speed * dt;
    double remaining = distance(state.location, state.waypoint);
    if (remaining <= step) {
        state.location = state.waypoint;
        state.waypoint = random_location(area, rng);
    } else {
        double f = step / remaining;
        state.location.x += (state.waypoint.x - state.location.x) * f;
        state.location.y += (state.waypoint.y - state.location.y) * f;
    }
    state.location.x = std::clamp(state.location.x, 0.0, area.length);
    state.location.y = std::clamp(state.location.y, 0.0, area.width);
    return state.location;
}

double utilization_energy(double idle_power, double max_power, double dt, double busy_fraction) {
    return dt * (idle_power + (max_power - idle_power) * busy_fraction);
}

double integrated_energy(double idle_power, double max_power, double dt, double busy_core_seconds, int cores) {
    return dt * idle_power + (max_power - idle_power) * busy_core_seconds / static_cast<double>(cores);
}

double tx_rx_energy(double tx_power, double rx_power, double input_bits, double output_bits, double uplink_rate,
                    double downlink_rate) {
    return tx_power * input_bits / uplink_rate + rx_power * output_bits / downlink_rate;
}

double local_exec_energy(double max_power, double length_mi, int cores, double mips_per_core) {
    return max_power * length_mi / (cores * mips_per_core);
}

double server_queue_estimate(double queued_mi, int cores, double mips_per_core) {
    return queued_mi / (cores * mips_per_core);
}

double cluster_queue_estimate(double cluster_queued_mi, std::size_t members, int cores, double mips_per_core) {
    return cluster_queued_mi / (static_cast<double>(members) * cores * mips_per_core);
}

bool Battery::draw(double joules) {
    if (joules <= remaining_) {
        remaining_ -= joules;
        consumed_ += joules;
        return true;
    }
    consumed_ += remaining_;
    remaining_ = 0.0;
    return false;
}

}  // namespace edgeprice
