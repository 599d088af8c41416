#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgeprice/rng.hpp"

namespace edgeprice {

using TaskId = std::uint64_t;
using DeviceIndex = std::size_t;
using ServerIndex = std::size_t;
using VertexId = std::size_t;

/// Bits in one kilobyte; network rates are decimal megabits.
inline constexpr double kBitsPerKilobyte = 8000.0;
inline constexpr double kJoulesPerWattHour = 3600.0;

struct Location {
    double x = 0.0;  // meters
    double y = 0.0;

    friend bool operator==(const Location&, const Location&) = default;
};

inline double distance(Location a, Location b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct ApplicationProfile {
    std::string name;
    double poisson_rate = 1.0;        // tasks per second
    double latency_constraint = 0.5;  // D_max, seconds
    double input_min_kb = 0.0;
    double input_max_kb = 0.0;
    double container_min_kb = 0.0;
    double container_max_kb = 0.0;
    double output_ratio_min = 0.0;
    double output_ratio_max = 0.0;
    double expected_length = 1.0;  // MIs
    double device_share = 100.0;   // percent of task-generating devices

    /// A (0, 0) container range means the container is the drawn input.
    bool container_follows_input() const { return container_min_kb == 0.0 && container_max_kb == 0.0; }

    /// Throws std::invalid_argument naming the violated rule.
    void validate() const;
};

enum class TaskStatus {
    Created,
    Queued,
    Executing,
    DoneSuccess,
    FailedLatency,
    FailedEnergy,
    FailedDeviceDead,
};

std::string_view to_string(TaskStatus s);
bool is_terminal(TaskStatus s);

struct Task {
    TaskId id = 0;
    double length_mi = 0.0;     // c
    double input_bits = 0.0;    // d_in
    double output_bits = 0.0;   // d_out
    double container_bits = 0.0;
    double max_delay = 0.0;     // D_max
    DeviceIndex origin_device = 0;
    double creation_time = 0.0;
    TaskStatus status = TaskStatus::Created;

    /// Executing server; empty for local execution or before a decision.
    std::optional<ServerIndex> destination;
    bool offloaded = false;
    bool rejected = false;

    std::optional<double> offload_start;
    std::optional<double> arrival_time;
    std::optional<double> exec_start;
    std::optional<double> exec_end;
    std::optional<double> download_start;
    std::optional<double> delivery_time;
    std::optional<double> finish_time;

    /// Moves the lifecycle forward. Throws std::logic_error on a backward move
    /// or a move out of a terminal state.
    void advance(TaskStatus next);
};

struct DeviceTypeSpec {
    double share = 0.0;  // percent
    bool mobile = false;
    double speed = 0.0;  // m/s
    double pause_min = 0.0, pause_max = 0.0;
    double mobility_min = 0.0, mobility_max = 0.0;
    bool battery_powered = true;
    double battery_capacity_wh = 0.0;
    double initial_battery_percent = 100.0;
    double idle_power = 0.0;  // W
    double max_power = 0.0;   // W
    bool generates_tasks = true;
    bool can_orchestrate = true;
    std::string connectivity = "wifi";
    int cores = 1;
    double mips_per_core = 1.0;
    double ram_mb = 0.0;
    double storage_mb = 0.0;
    double tx_power = 1.3;  // P_t, W
    double rx_power = 1.0;  // P_r, W

    void validate() const;
};

struct ServerSpec {
    double idle_power = 0.0;  // W
    double max_power = 0.0;   // W
    int cores = 1;
    double mips_per_core = 1.0;
    double ram_mb = 0.0;
    double storage_mb = 0.0;

    double total_mips() const { return cores * mips_per_core; }
    void validate() const;

    friend bool operator==(const ServerSpec&, const ServerSpec&) = default;
};

/// Device preference over delay, energy and price.
struct ImportanceWeights {
    double delay = 1.0 / 3.0;
    double energy = 1.0 / 3.0;
    double price = 1.0 / 3.0;
};

Task sample_task(const ApplicationProfile& profile, DeviceIndex device, double now, TaskId id,
                 RngStream& rng);

/// Uniform point on the 2-simplex from two sorted uniforms.
ImportanceWeights generate_weights(RngStream& rng);

/// First arrival strictly after `now` of a Poisson process with `rate` per second.
double next_arrival(double rate, double now, RngStream& rng);

/// All arrivals in (0, horizon], strictly increasing.
std::vector<double> poisson_arrivals(double rate, double horizon, RngStream& rng);

}  // namespace edgeprice
