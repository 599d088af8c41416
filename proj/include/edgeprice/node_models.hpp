#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "edgeprice/domain.hpp"

namespace edgeprice {

/// FIFO multi-core CPU; each task runs on one core to completion.
class Cpu {
public:
    struct Started {
        TaskId id = 0;
        double finish = 0.0;
    };

    Cpu(int cores, double mips_per_core);

    int cores() const { return cores_; }
    double mips_per_core() const { return mips_; }

    /// Starts the task on a free core, or queues it. Returns the start record
    /// when it started immediately.
    std::optional<Started> submit(TaskId id, double length_mi, double now);

    /// Frees the core held by `id` and starts the queue head, if any. Unknown
    /// ids (e.g. after clear()) are ignored.
    std::optional<Started> finish(TaskId id, double now);

    /// Drops every queued and executing task; returns their ids in order.
    std::vector<TaskId> clear(double now);

    /// Q^MI: full lengths of waiting tasks plus remaining MIs of running ones.
    double queued_mi(double now) const;

    std::size_t busy() const { return running_.size(); }
    std::size_t waiting() const { return queue_.size(); }
    /// Task count in the system (waiting + executing).
    std::size_t queue_length() const { return running_.size() + queue_.size(); }

    /// Integral of busy cores over time, from t = 0 to `now`.
    double busy_core_seconds(double now) const;

    struct Waiting {
        TaskId id;
        double length_mi;
    };
    struct Running {
        TaskId id;
        double length_mi;
        double start;
        double finish;
    };
    const std::deque<Waiting>& waiting_tasks() const { return queue_; }
    const std::vector<Running>& running_tasks() const { return running_; }

private:
    void account(double now);
    Started begin(TaskId id, double length_mi, double now);

    int cores_;
    double mips_;
    std::deque<Waiting> queue_;
    std::vector<Running> running_;
    double waiting_mi_ = 0.0;
    double busy_integral_ = 0.0;
    double last_change_ = 0.0;
};

struct MobilityState {
    Location location;
    bool moving = false;
    double phase_end = 0.0;
    Location waypoint;
};

struct Area {
    double length = 0.0;  // x extent, meters
    double width = 0.0;   // y extent

    bool contains(Location p) const { return p.x >= 0.0 && p.x <= length && p.y >= 0.0 && p.y <= width; }
};

Location random_location(const Area& area, RngStream& rng);

/// Initial state: paused at `start` for a U(pause range) duration.
MobilityState start_mobility(const DeviceTypeSpec& type, Location start, double now, RngStream& rng);

/// Advances one tick ending at `now`. Moving devices step at most speed*dt
/// toward their waypoint and draw a new uniform waypoint on arrival.
Location update_mobility(MobilityState& state, const DeviceTypeSpec& type, const Area& area, double now,
                         double dt, RngStream& rng);

inline bool is_static(const DeviceTypeSpec& type) { return !type.mobile || type.speed <= 0.0; }

/// dt * (P_idle + (P_max - P_idle) * busy_fraction).
double utilization_energy(double idle_power, double max_power, double dt, double busy_fraction);

/// Same model integrated exactly from busy core-seconds over an interval.
double integrated_energy(double idle_power, double max_power, double dt, double busy_core_seconds, int cores);

/// E_j = P_t d_in / r^u + P_r d_out / r^d, rates in bits/s.
double tx_rx_energy(double tx_power, double rx_power, double input_bits, double output_bits, double uplink_rate,
                    double downlink_rate);

/// E_0 = P_max c / (n^c_0 f_0).
double local_exec_energy(double max_power, double length_mi, int cores, double mips_per_core);

/// Q^MI / (n^c f).
double server_queue_estimate(double queued_mi, int cores, double mips_per_core);

/// Q^MI_k / (|C_k| n^c f).
double cluster_queue_estimate(double cluster_queued_mi, std::size_t members, int cores, double mips_per_core);

/// Device battery in joules.
class Battery {
public:
    Battery() = default;
    Battery(double capacity_j, double initial_j) : capacity_(capacity_j), remaining_(initial_j) {}

    double capacity() const { return capacity_; }
    double remaining() const { return remaining_; }
    double consumed() const { return consumed_; }

    /// Draws `joules`. If the battery cannot cover it, it is drained to zero
    /// and false is returned.
    bool draw(double joules);

private:
    double capacity_ = 0.0;
    double remaining_ = 0.0;
    double consumed_ = 0.0;
};

}  // namespace edgeprice
