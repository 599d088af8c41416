#include "edgeprice/domain.hpp"

#include <algorithm>
#include <utility>

namespace edgeprice {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

int rank(TaskStatus s) {
    switch (s) {
        case TaskStatus::Created: return 0;
        case TaskStatus::Queued: return 1;
        case TaskStatus::Executing: return 2;
        default: return 3;
    }
}

}  // namespace

void ApplicationProfile::validate() const {
    const std::string ctx = "application '" + name + "': ";
    require(poisson_rate > 0.0, ctx + "rate must be > 0");
    require(latency_constraint > 0.0, ctx + "latency must be > 0");
    require(expected_length > 0.0, ctx + "task length must be > 0");
    require(input_min_kb >= 0.0 && input_min_kb <= input_max_kb, ctx + "input size min > max or negative");
    require(container_min_kb >= 0.0 && container_min_kb <= container_max_kb,
            ctx + "container size min > max or negative");
    require(output_ratio_min >= 0.0 && output_ratio_min <= output_ratio_max,
            ctx + "output ratio min > max or negative");
    require(device_share >= 0.0, ctx + "usage percentage must be >= 0");
}

std::string_view to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::Created: return "created";
        case TaskStatus::Queued: return "queued";
        case TaskStatus::Executing: return "executing";
        case TaskStatus::DoneSuccess: return "done-success";
        case TaskStatus::FailedLatency: return "failed-latency";
        case TaskStatus::FailedEnergy: return "failed-energy";
        case TaskStatus::FailedDeviceDead: return "failed-device-dead";
    }
    return "unknown";
}

bool is_terminal(TaskStatus s) { return rank(s) == 3; }

void Task::advance(TaskStatus next) {
    if (is_terminal(status) || rank(next) < rank(status)) {
        throw std::logic_error("task " + std::to_string(id) + ": illegal transition " +
                               std::string(to_string(status)) + " -> " + std::string(to_string(next)));
    }
    status = next;
}

void DeviceTypeSpec::validate() const {
    require(idle_power >= 0.0 && idle_power <= max_power, "device type: need 0 <= idle power <= max power");
    require(cores >= 1, "device type: cores must be >= 1");
    require(mips_per_core > 0.0, "device type: MIPS per core must be > 0");
    require(speed >= 0.0, "device type: speed must be >= 0");
    require(pause_min <= pause_max, "device type: pause duration min > max");
    require(mobility_min <= mobility_max, "device type: mobility duration min > max");
    require(share >= 0.0, "device type: percentage must be >= 0");
    require(tx_power >= 0.0 && rx_power >= 0.0, "device type: radio powers must be >= 0");
}

void ServerSpec::validate() const {
    require(idle_power >= 0.0 && idle_power <= max_power, "server: need 0 <= idle power <= max power");
    require(cores >= 1, "server: cores must be >= 1");
    require(mips_per_core > 0.0, "server: MIPS per core must be > 0");
}

Task sample_task(const ApplicationProfile& profile, DeviceIndex device, double now, TaskId id,
                 RngStream& rng) {
    Task t;
    t.id = id;
    t.origin_device = device;
    t.creation_time = now;
    t.max_delay = profile.latency_constraint;

    double input_kb = rng.uniform(profile.input_min_kb, profile.input_max_kb);
    double ratio = rng.uniform(profile.output_ratio_min, profile.output_ratio_max);
    t.input_bits = input_kb * kBitsPerKilobyte;
    t.output_bits = ratio * t.input_bits;
    t.length_mi = rng.exponential(profile.expected_length);
    if (t.length_mi <= 0.0) {
        // u == 0 exactly; the next representable length keeps c > 0.
        t.length_mi = std::nextafter(0.0, 1.0);
    }
    if (profile.container_follows_input()) {
        t.container_bits = t.input_bits;
    } else {
        t.container_bits = rng.uniform(profile.container_min_kb, profile.container_max_kb) * kBitsPerKilobyte;
    }
    return t;
}

ImportanceWeights generate_weights(RngStream& rng) {
    double a = rng.uniform01();
    double b = rng.uniform01();
    if (b < a) std::swap(a, b);
    double e = b - a;
    return ImportanceWeights{a, e, 1.0 - (a + e)};
}

double next_arrival(double rate, double now, RngStream& rng) {
    double gap = 0.0;
    while (gap <= 0.0) gap = rng.exponential(1.0 / rate);
    return now + gap;
}

std::vector<double> poisson_arrivals(double rate, double horizon, RngStream& rng) {
    std::vector<double> times;
    if (horizon <= 0.0 || rate <= 0.0) return times;
    double t = next_arrival(rate, 0.0, rng);
    while (t <= horizon) {
        times.push_back(t);
        double next = next_arrival(rate, t, rng);
        if (next <= t) next = std::nextafter(t, horizon + 1.0);
        t = next;
    }
    return times;
}

}  // namespace edgeprice
