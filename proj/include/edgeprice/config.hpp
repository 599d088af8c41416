#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgeprice/domain.hpp"

namespace edgeprice {

/// Input validation failure; the message names file, element and rule.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& file, const std::string& element, const std::string& rule)
        : std::runtime_error(file + ": " + element + ": " + rule) {}
};

enum class Topology { Centralized, Hybrid, Decentralized };

std::string to_string(Topology t);
/// Accepts CENTRALIZED | HYBRID | DECENTRALIZED (case-insensitive).
std::optional<Topology> parse_topology(std::string_view token);

struct DatacenterEntry {
    std::string name;
    bool periphery = true;
    Location location;
    // Server-only fields.
    std::optional<int> cluster;
    bool cluster_head = false;
    ServerSpec spec;

    bool is_server() const;
};

struct NetworkLinkEntry {
    std::string from;
    std::string to;
    // When absent the simulation falls back to man_latency / man_bandwidth.
    std::optional<double> latency;  // seconds
    std::optional<double> bandwidth_mbps;
};

/// Contents of edge_datacenters.xml.
struct DatacentersFile {
    std::vector<DatacenterEntry> nodes;
    std::vector<NetworkLinkEntry> links;

    std::size_t server_count() const;
    std::size_t ap_count() const;
};

struct CloudDatacenter {
    std::string name;
    ServerSpec spec;
};

/// Table-5 keys plus the area and device count a run needs.
struct SimulationParameters {
    double simulation_time_min = 60.0;
    double update_interval = 1.0;
    bool enable_orchestrators = false;
    double network_update_interval = 1.0;
    double man_bandwidth = 1000.0;
    double man_latency = 0.005;
    double wifi_bandwidth = 1300.0;
    double wifi_latency = 0.0025;
    std::string orchestration_architectures = "EDGE_ONLY";
    Topology orchestration_algorithms = Topology::Decentralized;
    std::size_t edge_devices_count = 0;
    double length = 1100.0;
    double width = 1100.0;

    double simulation_seconds() const { return simulation_time_min * 60.0; }
};

/// The five parsed input files.
struct ScenarioConfig {
    std::vector<CloudDatacenter> cloud;
    DatacentersFile datacenters;
    std::vector<DeviceTypeSpec> device_types;
    std::vector<ApplicationProfile> applications;
    SimulationParameters parameters;

    /// Cross-file rules (hybrid needs clusters, homogeneous servers, ...).
    void validate() const;
};

inline constexpr const char* kCloudFile = "cloud.xml";
inline constexpr const char* kDatacentersFile = "edge_datacenters.xml";
inline constexpr const char* kDevicesFile = "edge_devices.xml";
inline constexpr const char* kApplicationsFile = "applications.xml";
inline constexpr const char* kParametersFile = "simulation_parameters.properties";

ScenarioConfig parse_inputs(const std::filesystem::path& folder);

std::vector<CloudDatacenter> parse_cloud(std::istream& in, const std::string& file = kCloudFile);
DatacentersFile parse_datacenters(std::istream& in, const std::string& file = kDatacentersFile);
std::vector<DeviceTypeSpec> parse_devices(std::istream& in, const std::string& file = kDevicesFile);
std::vector<ApplicationProfile> parse_applications(std::istream& in, const std::string& file = kApplicationsFile);
SimulationParameters parse_parameters(std::istream& in, const std::string& file = kParametersFile);

/// Canonical writers; parse(write(x)) == x and write(parse(write(x))) is
/// byte-identical.
void write_datacenters(const DatacentersFile& file, std::ostream& out);
void write_cloud(const std::vector<CloudDatacenter>& cloud, std::ostream& out);
void write_devices(const std::vector<DeviceTypeSpec>& types, std::ostream& out);
void write_applications(const std::vector<ApplicationProfile>& apps, std::ostream& out);
void write_parameters(const SimulationParameters& params, std::ostream& out);

/// Writes all five files into `folder`, creating it.
void write_inputs(const ScenarioConfig& config, const std::filesystem::path& folder);

void write_datacenters_file(const DatacentersFile& file, const std::filesystem::path& path);

}  // namespace edgeprice
