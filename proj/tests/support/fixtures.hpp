#pragma once

#include <filesystem>
#include <string>

#include "edgeprice/config.hpp"
#include "edgeprice/envgen.hpp"

namespace fixtures {

using namespace edgeprice;

inline std::vector<DeviceTypeSpec> standard_devices() {
    auto type = [](double share, double speed, double p0, double p1, double m0, double m1, double wh, double idle,
                   double max, int cores, double mips, double ram, double storage) {
        DeviceTypeSpec d;
        d.share = share;
        d.mobile = speed > 0.0;
        d.speed = speed;
        d.pause_min = p0;
        d.pause_max = p1;
        d.mobility_min = m0;
        d.mobility_max = m1;
        d.battery_capacity_wh = wh;
        d.idle_power = idle;
        d.max_power = max;
        d.cores = cores;
        d.mips_per_core = mips;
        d.ram_mb = ram;
        d.storage_mb = storage;
        d.can_orchestrate = false;
        return d;
    };
    return {
        type(30, 1.1, 60, 300, 60, 300, 19.25, 0.9, 6.2, 6, 6000, 6000, 128000),
        type(40, 1.1, 60, 300, 60, 300, 15.4, 0.6, 5.5, 4, 4000, 4000, 64000),
        type(20, 0.6, 180, 600, 60, 300, 25.9, 1.1, 6.5, 4, 3000, 2000, 32000),
        type(10, 0.0, 0, 0, 0, 0, 56.5, 1.7, 23.6, 6, 7000, 8000, 256000),
    };
}

inline ApplicationProfile standard_application() {
    ApplicationProfile a;
    a.name = "compute";
    a.poisson_rate = 1.0;
    a.latency_constraint = 0.5;
    a.input_min_kb = 100;
    a.input_max_kb = 1000;
    a.output_ratio_min = 0.2;
    a.output_ratio_max = 0.8;
    a.expected_length = 2000;
    a.device_share = 100;
    return a;
}

struct ScenarioShape {
    std::size_t servers = 2;
    std::size_t clusters = 1;
    std::size_t devices = 10;
    double minutes = 1.0;
    double side = 200.0;
    Topology topology = Topology::Decentralized;
    std::uint64_t layout_seed = 1;
    std::size_t extra_edges = 0;
};

inline ScenarioConfig make_config(const ScenarioShape& s) {
    ScenarioConfig c;
    c.cloud.push_back(CloudDatacenter{"cloud", ServerSpec{200, 500, 64, 40000, 512000, 1e7}});
    envgen::GenParams g;
    g.side = s.side;
    g.server_count = s.servers;
    g.cluster_count = s.clusters;
    g.seed = s.layout_seed;
    g.extra_edges = s.extra_edges;
    c.datacenters = envgen::generate(g);
    c.device_types = standard_devices();
    c.applications = {standard_application()};
    c.parameters.simulation_time_min = s.minutes;
    c.parameters.orchestration_algorithms = s.topology;
    c.parameters.edge_devices_count = s.devices;
    c.parameters.length = s.side;
    c.parameters.width = s.side;
    return c;
}

/// Fresh empty directory under the system temp folder.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("edgeprice-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path config_dir(const std::string& name) {
    return std::filesystem::path(EDGEPRICE_CONFIG_DIR) / name;
}

}  // namespace fixtures
