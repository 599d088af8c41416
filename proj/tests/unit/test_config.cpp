#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edgeprice/config.hpp"
#include "fixtures.hpp"

using namespace edgeprice;

namespace {

std::string devices_xml(const std::vector<int>& shares) {
    std::ostringstream x;
    x << "<edge_devices>";
    for (int s : shares) {
        x << "<device><percentage>" << s << "</percentage><mobility>false</mobility><generateTasks>true</generateTasks><speed>0</speed>"
          << "<battery>true</battery><batteryCapacity>10</batteryCapacity>"
          << "<idleConsumption>1</idleConsumption><maxConsumption>2</maxConsumption>"
          << "<cores>2</cores><mips>1000</mips><ram>100</ram><storage>100</storage></device>";
    }
    x << "</edge_devices>";
    return x.str();
}

std::string properties(const std::string& extra_line = "", const std::string& skip = "") {
    std::vector<std::pair<std::string, std::string>> kv{
        {"simulation_time", "60"},           {"update_interval", "1"},
        {"enable_orchestrators", "false"},   {"network_update_interval", "1"},
        {"man_bandwidth", "1000"},           {"man_latency", "0.005"},
        {"wifi_bandwidth", "1300"},          {"wifi_latency", "0.0025"},
        {"orchestration_architectures", "EDGE_ONLY"},
        {"orchestration_algorithms", "HYBRID"},
        {"edge_devices_count", "100"},       {"length", "1100"},
        {"width", "1100"},
    };
    std::ostringstream out;
    out << "# comment\n";
    for (const auto& [k, v] : kv) {
        if (k != skip) out << k << "=" << v << "\n";
    }
    out << extra_line << "\n";
    return out.str();
}

template <typename Parse>
std::string error_of(Parse&& parse) {
    try {
        parse();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("shipped high-capacity sample") {
    auto c = parse_inputs(fixtures::config_dir("high-capacity-20"));
    std::size_t heads = 0;
    for (const auto& n : c.datacenters.nodes) heads += n.is_server() && n.cluster_head;
    CHECK(c.datacenters.server_count() == 20);
    CHECK(c.datacenters.ap_count() == 247);
    CHECK(heads == 8);
    REQUIRE(c.applications.size() == 1);
    CHECK(c.applications[0].container_follows_input());
    CHECK(c.device_types.size() == 4);
    CHECK(c.parameters.simulation_time_min == 60);
    CHECK(c.parameters.wifi_bandwidth == 1300);
}

TEST_CASE("device shares must sum to 100") {
    std::istringstream ok(devices_xml({30, 40, 20, 10}));
    CHECK(parse_devices(ok).size() == 4);
    std::istringstream bad(devices_xml({30, 40, 20, 20}));
    auto msg = error_of([&] { parse_devices(bad); });
    CHECK(msg.find("edge_devices.xml") != std::string::npos);
    CHECK(msg.find("110") != std::string::npos);
}

TEST_CASE("properties") {
    std::istringstream in(properties());
    auto p = parse_parameters(in);
    CHECK(p.orchestration_algorithms == Topology::Hybrid);
    CHECK(p.edge_devices_count == 100);
    CHECK(p.simulation_seconds() == 3600);

    std::istringstream missing(properties("", "man_latency"));
    CHECK(error_of([&] { parse_parameters(missing); }).find("man_latency") != std::string::npos);

    std::istringstream orchestrators(properties("enable_orchestrators=true"));
    CHECK_THROWS_AS(parse_parameters(orchestrators), ConfigError);

    std::istringstream two(properties("orchestration_algorithms=HYBRID,CENTRALIZED"));
    CHECK_THROWS_AS(parse_parameters(two), ConfigError);

    std::istringstream arch(properties("orchestration_architectures=CLOUD_ONLY"));
    CHECK_THROWS_AS(parse_parameters(arch), ConfigError);

    CHECK(parse_topology("centralized") == Topology::Centralized);
    CHECK_FALSE(parse_topology("mesh"));
}

TEST_CASE("datacenter file errors name the element") {
    std::istringstream bad_link(
        "<edge_datacenters><datacenter name=\"dc0\"><periphery>true</periphery>"
        "<location><x_pos>0</x_pos><y_pos>0</y_pos></location>"
        "<idleConsumption>1</idleConsumption><maxConsumption>2</maxConsumption><cores>1</cores>"
        "<mips>10</mips><ram>1</ram><storage>1</storage></datacenter>"
        "<network_links><link><from>dc0</from><to>ap9</to></link></network_links></edge_datacenters>");
    auto msg = error_of([&] { parse_datacenters(bad_link); });
    CHECK(msg.find("ap9") != std::string::npos);

    std::istringstream broken("<edge_datacenters><datacenter");
    CHECK_THROWS_AS(parse_datacenters(broken), ConfigError);
}

TEST_CASE("writers are canonical") {
    auto c = fixtures::make_config({});
    auto check = [](auto write, auto parse, const auto& value) {
        std::ostringstream a;
        write(value, a);
        std::istringstream in(a.str());
        std::ostringstream b;
        write(parse(in), b);
        CHECK(a.str() == b.str());
    };
    check([](const auto& v, std::ostream& o) { write_datacenters(v, o); },
          [](std::istream& i) { return parse_datacenters(i); }, c.datacenters);
    check([](const auto& v, std::ostream& o) { write_devices(v, o); },
          [](std::istream& i) { return parse_devices(i); }, c.device_types);
    check([](const auto& v, std::ostream& o) { write_applications(v, o); },
          [](std::istream& i) { return parse_applications(i); }, c.applications);
    check([](const auto& v, std::ostream& o) { write_cloud(v, o); },
          [](std::istream& i) { return parse_cloud(i); }, c.cloud);
    check([](const auto& v, std::ostream& o) { write_parameters(v, o); },
          [](std::istream& i) { return parse_parameters(i); }, c.parameters);

    auto dir = fixtures::scratch_dir("config-roundtrip");
    write_inputs(c, dir);
    auto back = parse_inputs(dir);
    CHECK(back.device_types.size() == c.device_types.size());
    CHECK(back.datacenters.links.size() == c.datacenters.links.size());
}

TEST_CASE("cross-file rules") {
    auto c = fixtures::make_config({.servers = 3, .clusters = 2, .topology = Topology::Hybrid});
    CHECK_NOTHROW(c.validate());

    auto no_heads = c;
    for (auto& n : no_heads.datacenters.nodes) n.cluster_head = false;
    CHECK_THROWS_AS(no_heads.validate(), ConfigError);

    auto mixed = c;
    mixed.datacenters.nodes[0].spec.cores = 3;
    CHECK_THROWS_AS(mixed.validate(), ConfigError);

    auto unclustered = c;
    for (auto& n : unclustered.datacenters.nodes) n.cluster.reset();
    CHECK_THROWS_AS(unclustered.validate(), ConfigError);
    unclustered.parameters.orchestration_algorithms = Topology::Decentralized;
    CHECK_NOTHROW(unclustered.validate());
}

TEST_CASE("missing input file") {
    auto dir = fixtures::scratch_dir("config-missing");
    auto msg = error_of([&] { parse_inputs(dir); });
    CHECK_FALSE(msg.empty());
}
