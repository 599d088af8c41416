#include "edgeprice/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "edgeprice/csv.hpp"

namespace edgeprice {

namespace pt = boost::property_tree;

namespace {

constexpr double kShareTolerance = 1e-9;

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

pt::ptree read_xml(std::istream& in, const std::string& file) {
    pt::ptree tree;
    try {
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        throw ConfigError(file, "document", std::string("malformed XML: ") + e.message());
    }
    return tree;
}

/// Field reader bound to one element for error context.
class Fields {
public:
    Fields(const pt::ptree& node, std::string file, std::string element)
        : node_(node), file_(std::move(file)), element_(std::move(element)) {}

    std::optional<std::string> maybe_text(const std::string& path) const {
        auto child = node_.get_optional<std::string>(path);
        if (!child) return std::nullopt;
        return trim(*child);
    }

    std::string text(const std::string& path) const {
        auto t = maybe_text(path);
        if (!t) fail("missing <" + path + ">");
        return *t;
    }

    std::optional<double> maybe_number(const std::string& path) const {
        auto t = maybe_text(path);
        if (!t) return std::nullopt;
        try {
            return parse_number(*t);
        } catch (const std::invalid_argument&) {
            fail("<" + path + "> is not a number: '" + *t + "'");
        }
    }

    double number(const std::string& path) const {
        auto v = maybe_number(path);
        if (!v) fail("missing <" + path + ">");
        return *v;
    }

    double number_or(const std::string& path, double fallback) const { return maybe_number(path).value_or(fallback); }

    int integer(const std::string& path) const {
        double v = number(path);
        if (v != std::floor(v)) fail("<" + path + "> must be an integer");
        return static_cast<int>(v);
    }

    std::optional<bool> maybe_flag(const std::string& path) const {
        auto t = maybe_text(path);
        if (!t) return std::nullopt;
        if (*t == "true") return true;
        if (*t == "false") return false;
        fail("<" + path + "> must be true or false, got '" + *t + "'");
    }

    bool flag(const std::string& path) const {
        auto v = maybe_flag(path);
        if (!v) fail("missing <" + path + ">");
        return *v;
    }

    bool flag_or(const std::string& path, bool fallback) const { return maybe_flag(path).value_or(fallback); }

    [[noreturn]] void fail(const std::string& rule) const { throw ConfigError(file_, element_, rule); }

private:
    const pt::ptree& node_;
    std::string file_;
    std::string element_;
};

void check_share_sum(double sum, const std::string& file, const std::string& element) {
    if (std::abs(sum - 100.0) > kShareTolerance) {
        std::ostringstream msg;
        msg << "percentages sum to " << format_number(sum) << ", must be 100";
        throw ConfigError(file, element, msg.str());
    }
}

const pt::ptree& root(const pt::ptree& tree, const std::string& name, const std::string& file) {
    auto child = tree.get_child_optional(name);
    if (!child) throw ConfigError(file, "document", "root element <" + name + "> not found");
    return *child;
}

// Canonical XML writing helpers.
class XmlOut {
public:
    explicit XmlOut(std::ostream& out) : out_(out) { out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

    void open(const std::string& tag, const std::string& name_attr = {}) {
        indent();
        out_ << '<' << tag;
        if (!name_attr.empty()) out_ << " name=\"" << name_attr << '"';
        out_ << ">\n";
        ++depth_;
    }
    void close(const std::string& tag) {
        --depth_;
        indent();
        out_ << "</" << tag << ">\n";
    }
    void leaf(const std::string& tag, const std::string& value) {
        indent();
        out_ << '<' << tag << '>' << value << "</" << tag << ">\n";
    }
    void leaf(const std::string& tag, double value) { leaf(tag, format_number(value)); }
    void leaf(const std::string& tag, bool value) { leaf(tag, std::string(value ? "true" : "false")); }
    void leaf(const std::string& tag, int value) { leaf(tag, std::to_string(value)); }

private:
    void indent() {
        for (int i = 0; i < depth_; ++i) out_ << '\t';
    }
    std::ostream& out_;
    int depth_ = 0;
};

ServerSpec read_server_spec(const Fields& f) {
    ServerSpec s;
    s.idle_power = f.number("idleConsumption");
    s.max_power = f.number("maxConsumption");
    s.cores = f.integer("cores");
    s.mips_per_core = f.number("mips");
    s.ram_mb = f.number("ram");
    s.storage_mb = f.number("storage");
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        f.fail(e.what());
    }
    return s;
}

void write_server_spec(XmlOut& x, const ServerSpec& s) {
    x.leaf("idleConsumption", s.idle_power);
    x.leaf("maxConsumption", s.max_power);
    x.leaf("cores", s.cores);
    x.leaf("mips", s.mips_per_core);
    x.leaf("ram", s.ram_mb);
    x.leaf("storage", s.storage_mb);
}

std::ifstream open_input(const std::filesystem::path& folder, const char* name) {
    auto path = folder / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "file", "missing or unreadable input file");
    return in;
}

}  // namespace

std::string to_string(Topology t) {
    switch (t) {
        case Topology::Centralized: return "CENTRALIZED";
        case Topology::Hybrid: return "HYBRID";
        case Topology::Decentralized: return "DECENTRALIZED";
    }
    return "UNKNOWN";
}

std::optional<Topology> parse_topology(std::string_view token) {
    std::string t = upper(trim(std::string(token)));
    if (t == "CENTRALIZED") return Topology::Centralized;
    if (t == "HYBRID") return Topology::Hybrid;
    if (t == "DECENTRALIZED") return Topology::Decentralized;
    return std::nullopt;
}

bool DatacenterEntry::is_server() const { return name.find("dc") != std::string::npos; }

std::size_t DatacentersFile::server_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_server(); }));
}

std::size_t DatacentersFile::ap_count() const { return nodes.size() - server_count(); }

std::vector<CloudDatacenter> parse_cloud(std::istream& in, const std::string& file) {
    auto tree = read_xml(in, file);
    std::vector<CloudDatacenter> out;
    for (const auto& [tag, node] : root(tree, "cloud_datacenters", file)) {
        if (tag != "datacenter") continue;
        Fields f(node, file, "datacenter #" + std::to_string(out.size()));
        CloudDatacenter c;
        c.name = f.maybe_text("<xmlattr>.name").value_or("cloud");
        c.spec = read_server_spec(f);
        out.push_back(c);
    }
    return out;
}

DatacentersFile parse_datacenters(std::istream& in, const std::string& file) {
    auto tree = read_xml(in, file);
    DatacentersFile out;
    std::set<std::string> names;
    for (const auto& [tag, node] : root(tree, "edge_datacenters", file)) {
        if (tag == "datacenter") {
            Fields f(node, file, "datacenter #" + std::to_string(out.nodes.size()));
            DatacenterEntry e;
            e.name = f.text("<xmlattr>.name");
            Fields g(node, file, "datacenter '" + e.name + "'");
            bool server = e.name.find("dc") != std::string::npos;
            if (!server && e.name.find("ap") == std::string::npos) {
                g.fail("name must contain 'dc' (edge datacenter) or 'ap' (access point)");
            }
            if (!names.insert(e.name).second) g.fail("duplicate name");
            e.periphery = g.flag_or("periphery", true);
            e.location = Location{g.number("location.x_pos"), g.number("location.y_pos")};
            if (!std::isfinite(e.location.x) || !std::isfinite(e.location.y)) g.fail("location must be finite");
            if (server) {
                if (auto c = g.maybe_number("cluster")) {
                    if (*c < 0 || *c != std::floor(*c)) g.fail("cluster must be a non-negative integer");
                    e.cluster = static_cast<int>(*c);
                }
                e.cluster_head = g.flag_or("isClusterHead", false);
                e.spec = read_server_spec(g);
            }
            out.nodes.push_back(std::move(e));
        } else if (tag == "network_links") {
            for (const auto& [ltag, lnode] : node) {
                if (ltag != "link") continue;
                Fields f(lnode, file, "link #" + std::to_string(out.links.size()));
                NetworkLinkEntry l;
                l.from = f.text("from");
                l.to = f.text("to");
                l.latency = f.maybe_number("latency");
                l.bandwidth_mbps = f.maybe_number("bandwidth");
                if (!names.count(l.from) || !names.count(l.to)) f.fail("endpoint '" + (names.count(l.from) ? l.to : l.from) + "' is not a declared datacenter");
                if (l.from == l.to) f.fail("self loop");
                if (l.latency && *l.latency < 0) f.fail("latency must be >= 0");
                if (l.bandwidth_mbps && !(*l.bandwidth_mbps > 0)) f.fail("bandwidth must be > 0");
                out.links.push_back(std::move(l));
            }
        }
    }
    // Links may appear before datacenters in hand-written files.
    if (out.server_count() == 0) throw ConfigError(file, "edge_datacenters", "no edge datacenter ('dc') declared");
    return out;
}

std::vector<DeviceTypeSpec> parse_devices(std::istream& in, const std::string& file) {
    auto tree = read_xml(in, file);
    std::vector<DeviceTypeSpec> out;
    double share = 0.0;
    for (const auto& [tag, node] : root(tree, "edge_devices", file)) {
        if (tag != "device") continue;
        Fields f(node, file, "device #" + std::to_string(out.size()));
        DeviceTypeSpec d;
        d.share = f.number("percentage");
        d.mobile = f.flag("mobility");
        d.speed = f.number_or("speed", 0.0);
        d.pause_min = f.number_or("minPauseDuration", 0.0);
        d.pause_max = f.number_or("maxPauseDuration", 0.0);
        d.mobility_min = f.number_or("minMobilityDuration", 0.0);
        d.mobility_max = f.number_or("maxMobilityDuration", 0.0);
        d.battery_powered = f.flag("battery");
        d.battery_capacity_wh = f.number_or("batteryCapacity", 0.0);
        d.initial_battery_percent = f.number_or("initialBatteryLevel", 100.0);
        d.idle_power = f.number("idleConsumption");
        d.max_power = f.number("maxConsumption");
        d.generates_tasks = f.flag("generateTasks");
        d.can_orchestrate = f.flag_or("isOrchestrator", true);
        d.connectivity = f.maybe_text("connectivity").value_or("wifi");
        d.cores = f.integer("cores");
        d.mips_per_core = f.number("mips");
        d.ram_mb = f.number("ram");
        d.storage_mb = f.number("storage");
        d.tx_power = f.number_or("transmissionPower", 1.3);
        d.rx_power = f.number_or("receptionPower", 1.0);
        if (d.connectivity != "wifi" && d.connectivity != "cellular" && d.connectivity != "ethernet") {
            f.fail("connectivity must be wifi, cellular or ethernet");
        }
        if (d.battery_powered && !(d.battery_capacity_wh > 0)) f.fail("battery-powered device needs batteryCapacity > 0");
        if (d.initial_battery_percent < 0 || d.initial_battery_percent > 100) f.fail("initialBatteryLevel must be in [0, 100]");
        try {
            d.validate();
        } catch (const std::invalid_argument& e) {
            f.fail(e.what());
        }
        share += d.share;
        out.push_back(d);
    }
    if (out.empty()) throw ConfigError(file, "edge_devices", "no device type declared");
    check_share_sum(share, file, "edge_devices");
    return out;
}

std::vector<ApplicationProfile> parse_applications(std::istream& in, const std::string& file) {
    auto tree = read_xml(in, file);
    std::vector<ApplicationProfile> out;
    double share = 0.0;
    for (const auto& [tag, node] : root(tree, "applications", file)) {
        if (tag != "application") continue;
        Fields f(node, file, "application #" + std::to_string(out.size()));
        ApplicationProfile a;
        a.name = f.maybe_text("<xmlattr>.name").value_or("app" + std::to_string(out.size()));
        a.poisson_rate = f.number("rate");
        a.device_share = f.number("usagePercentage");
        a.latency_constraint = f.number("latency");
        a.input_min_kb = f.number("minInputSize");
        a.input_max_kb = f.number("maxInputSize");
        a.container_min_kb = f.number_or("minContainerSize", 0.0);
        a.container_max_kb = f.number_or("maxContainerSize", 0.0);
        a.output_ratio_min = f.number("minOutputRatio");
        a.output_ratio_max = f.number("maxOutputRatio");
        a.expected_length = f.number("taskLength");
        try {
            a.validate();
        } catch (const std::invalid_argument& e) {
            f.fail(e.what());
        }
        share += a.device_share;
        out.push_back(a);
    }
    if (out.empty()) throw ConfigError(file, "applications", "no application declared");
    check_share_sum(share, file, "applications");
    return out;
}

SimulationParameters parse_parameters(std::istream& in, const std::string& file) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == '!') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(file, "line " + std::to_string(lineno), "expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(file, key, "missing key");
        return it->second;
    };
    auto num = [&](const std::string& key) {
        try {
            return parse_number(get(key));
        } catch (const std::invalid_argument&) {
            throw ConfigError(file, key, "not a number: '" + get(key) + "'");
        }
    };
    auto positive = [&](const std::string& key) {
        double v = num(key);
        if (!(v > 0)) throw ConfigError(file, key, "must be > 0");
        return v;
    };

    SimulationParameters p;
    p.simulation_time_min = num("simulation_time");
    if (p.simulation_time_min < 0) throw ConfigError(file, "simulation_time", "must be >= 0");
    p.update_interval = positive("update_interval");
    p.network_update_interval = positive("network_update_interval");
    const std::string& eo = get("enable_orchestrators");
    if (eo != "true" && eo != "false") throw ConfigError(file, "enable_orchestrators", "must be true or false");
    p.enable_orchestrators = eo == "true";
    if (p.enable_orchestrators) {
        throw ConfigError(file, "enable_orchestrators", "must be false (devices orchestrate their own tasks)");
    }
    p.man_bandwidth = positive("man_bandwidth");
    p.man_latency = num("man_latency");
    if (p.man_latency < 0) throw ConfigError(file, "man_latency", "must be >= 0");
    p.wifi_bandwidth = positive("wifi_bandwidth");
    p.wifi_latency = num("wifi_latency");
    if (p.wifi_latency < 0) throw ConfigError(file, "wifi_latency", "must be >= 0");
    p.orchestration_architectures = get("orchestration_architectures");
    if (p.orchestration_architectures != "EDGE_ONLY") {
        throw ConfigError(file, "orchestration_architectures", "only EDGE_ONLY is supported");
    }
    const std::string& algo = get("orchestration_algorithms");
    if (algo.find(',') != std::string::npos) {
        throw ConfigError(file, "orchestration_algorithms", "exactly one topology per run");
    }
    auto topo = parse_topology(algo);
    if (!topo) {
        throw ConfigError(file, "orchestration_algorithms",
                          "unknown topology '" + algo + "' (CENTRALIZED, HYBRID or DECENTRALIZED)");
    }
    p.orchestration_algorithms = *topo;
    double devices = num("edge_devices_count");
    if (devices < 0 || devices != std::floor(devices)) throw ConfigError(file, "edge_devices_count", "must be a non-negative integer");
    p.edge_devices_count = static_cast<std::size_t>(devices);
    p.length = positive("length");
    p.width = positive("width");
    return p;
}

void ScenarioConfig::validate() const {
    const std::string file = kDatacentersFile;
    std::optional<ServerSpec> spec;
    std::map<int, int> heads;
    bool any_cluster = false;
    for (const auto& n : datacenters.nodes) {
        if (!n.is_server()) continue;
        if (spec && !(*spec == n.spec)) {
            throw ConfigError(file, "datacenter '" + n.name + "'", "edge servers must share one specification");
        }
        spec = n.spec;
        if (n.cluster) {
            any_cluster = true;
            heads[*n.cluster] += n.cluster_head ? 1 : 0;
        }
    }
    if (parameters.orchestration_algorithms == Topology::Hybrid) {
        for (const auto& n : datacenters.nodes) {
            if (n.is_server() && !n.cluster) {
                throw ConfigError(file, "datacenter '" + n.name + "'", "hybrid topology needs a cluster for every server");
            }
        }
    }
    if (any_cluster) {
        int expected = 0;
        for (auto [cluster, count] : heads) {
            if (cluster != expected++) {
                throw ConfigError(file, "cluster " + std::to_string(cluster), "cluster indices must be contiguous from 0");
            }
            if (count != 1) {
                throw ConfigError(file, "cluster " + std::to_string(cluster), "needs exactly one head, found " + std::to_string(count));
            }
        }
    }
    for (const auto& l : datacenters.links) {
        (void)l;
    }
}

ScenarioConfig parse_inputs(const std::filesystem::path& folder) {
    ScenarioConfig c;
    auto ctx = [&](const char* name) { return (folder / name).string(); };
    {
        auto in = open_input(folder, kCloudFile);
        c.cloud = parse_cloud(in, ctx(kCloudFile));
    }
    {
        auto in = open_input(folder, kDatacentersFile);
        c.datacenters = parse_datacenters(in, ctx(kDatacentersFile));
    }
    {
        auto in = open_input(folder, kDevicesFile);
        c.device_types = parse_devices(in, ctx(kDevicesFile));
    }
    {
        auto in = open_input(folder, kApplicationsFile);
        c.applications = parse_applications(in, ctx(kApplicationsFile));
    }
    {
        auto in = open_input(folder, kParametersFile);
        c.parameters = parse_parameters(in, ctx(kParametersFile));
    }
    c.validate();
    return c;
}

void write_datacenters(const DatacentersFile& file, std::ostream& out) {
    XmlOut x(out);
    x.open("edge_datacenters");
    for (const auto& n : file.nodes) {
        x.open("datacenter", n.name);
        x.leaf("periphery", n.periphery);
        x.open("location");
        x.leaf("x_pos", n.location.x);
        x.leaf("y_pos", n.location.y);
        x.close("location");
        if (n.is_server()) {
            if (n.cluster) x.leaf("cluster", *n.cluster);
            x.leaf("isClusterHead", n.cluster_head);
            write_server_spec(x, n.spec);
        }
        x.close("datacenter");
    }
    x.open("network_links");
    for (const auto& l : file.links) {
        x.open("link");
        x.leaf("from", l.from);
        x.leaf("to", l.to);
        if (l.latency) x.leaf("latency", *l.latency);
        if (l.bandwidth_mbps) x.leaf("bandwidth", *l.bandwidth_mbps);
        x.close("link");
    }
    x.close("network_links");
    x.close("edge_datacenters");
}

void write_cloud(const std::vector<CloudDatacenter>& cloud, std::ostream& out) {
    XmlOut x(out);
    x.open("cloud_datacenters");
    for (const auto& c : cloud) {
        x.open("datacenter", c.name);
        write_server_spec(x, c.spec);
        x.close("datacenter");
    }
    x.close("cloud_datacenters");
}

void write_devices(const std::vector<DeviceTypeSpec>& types, std::ostream& out) {
    XmlOut x(out);
    x.open("edge_devices");
    for (const auto& d : types) {
        x.open("device");
        x.leaf("percentage", d.share);
        x.leaf("mobility", d.mobile);
        x.leaf("speed", d.speed);
        x.leaf("minPauseDuration", d.pause_min);
        x.leaf("maxPauseDuration", d.pause_max);
        x.leaf("minMobilityDuration", d.mobility_min);
        x.leaf("maxMobilityDuration", d.mobility_max);
        x.leaf("battery", d.battery_powered);
        x.leaf("batteryCapacity", d.battery_capacity_wh);
        x.leaf("initialBatteryLevel", d.initial_battery_percent);
        x.leaf("idleConsumption", d.idle_power);
        x.leaf("maxConsumption", d.max_power);
        x.leaf("generateTasks", d.generates_tasks);
        x.leaf("isOrchestrator", d.can_orchestrate);
        x.leaf("connectivity", d.connectivity);
        x.leaf("cores", d.cores);
        x.leaf("mips", d.mips_per_core);
        x.leaf("ram", d.ram_mb);
        x.leaf("storage", d.storage_mb);
        x.leaf("transmissionPower", d.tx_power);
        x.leaf("receptionPower", d.rx_power);
        x.close("device");
    }
    x.close("edge_devices");
}

void write_applications(const std::vector<ApplicationProfile>& apps, std::ostream& out) {
    XmlOut x(out);
    x.open("applications");
    for (const auto& a : apps) {
        x.open("application", a.name);
        x.leaf("rate", a.poisson_rate);
        x.leaf("usagePercentage", a.device_share);
        x.leaf("latency", a.latency_constraint);
        x.leaf("minInputSize", a.input_min_kb);
        x.leaf("maxInputSize", a.input_max_kb);
        x.leaf("minContainerSize", a.container_min_kb);
        x.leaf("maxContainerSize", a.container_max_kb);
        x.leaf("minOutputRatio", a.output_ratio_min);
        x.leaf("maxOutputRatio", a.output_ratio_max);
        x.leaf("taskLength", a.expected_length);
        x.close("application");
    }
    x.close("applications");
}

void write_parameters(const SimulationParameters& p, std::ostream& out) {
    out << "simulation_time=" << format_number(p.simulation_time_min) << '\n'
        << "update_interval=" << format_number(p.update_interval) << '\n'
        << "enable_orchestrators=" << (p.enable_orchestrators ? "true" : "false") << '\n'
        << "network_update_interval=" << format_number(p.network_update_interval) << '\n'
        << "man_bandwidth=" << format_number(p.man_bandwidth) << '\n'
        << "man_latency=" << format_number(p.man_latency) << '\n'
        << "wifi_bandwidth=" << format_number(p.wifi_bandwidth) << '\n'
        << "wifi_latency=" << format_number(p.wifi_latency) << '\n'
        << "orchestration_architectures=" << p.orchestration_architectures << '\n'
        << "orchestration_algorithms=" << to_string(p.orchestration_algorithms) << '\n'
        << "edge_devices_count=" << p.edge_devices_count << '\n'
        << "length=" << format_number(p.length) << '\n'
        << "width=" << format_number(p.width) << '\n';
}

namespace {

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_datacenters_file(const DatacentersFile& file, const std::filesystem::path& path) {
    write_file(path, [&](std::ostream& out) { write_datacenters(file, out); });
}

void write_inputs(const ScenarioConfig& c, const std::filesystem::path& folder) {
    write_file(folder / kCloudFile, [&](std::ostream& out) { write_cloud(c.cloud, out); });
    write_datacenters_file(c.datacenters, folder / kDatacentersFile);
    write_file(folder / kDevicesFile, [&](std::ostream& out) { write_devices(c.device_types, out); });
    write_file(folder / kApplicationsFile, [&](std::ostream& out) { write_applications(c.applications, out); });
    write_file(folder / kParametersFile, [&](std::ostream& out) { write_parameters(c.parameters, out); });
}

}  // namespace edgeprice
