#include "edgeprice/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "edgeprice/csv.hpp"
#include "edgeprice/envgen.hpp"
#include "edgeprice/events.hpp"
#include "edgeprice/node_models.hpp"

namespace edgeprice {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kBitsPerMegabyte = 8e6;
constexpr double kSlotTolerance = 1e-9;

}  // namespace

std::vector<std::size_t> assign_by_share(const std::vector<double>& shares, std::size_t count) {
    std::vector<std::size_t> quota(shares.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        double exact = static_cast<double>(count) * shares[i] / 100.0;
        quota[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += quota[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < count && !remainders.empty(); ++k, ++assigned) {
        ++quota[remainders[k % remainders.size()].second];
    }
    std::vector<std::size_t> owner;
    owner.reserve(count);
    for (std::size_t i = 0; i < quota.size(); ++i) owner.insert(owner.end(), quota[i], i);
    return owner;
}

Scenario::Scenario(ScenarioConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto& nodes = config_.datacenters.nodes;
    const auto& params = config_.parameters;
    std::map<std::string, VertexId> by_name;
    std::vector<std::optional<int>> cluster_of;
    std::vector<bool> head;
    for (const auto& n : nodes) {
        VertexKind kind = n.is_server() ? VertexKind::Server : VertexKind::AccessPoint;
        VertexId v = graph_.add_vertex(Vertex{n.name, n.location, kind});
        by_name[n.name] = v;
        if (n.is_server()) {
            server_vertex_.push_back(v);
            server_spec_ = n.spec;
            cluster_of.push_back(n.cluster);
            head.push_back(n.cluster_head);
        } else {
            access_points_.push_back(v);
        }
    }
    const std::string file = kDatacentersFile;
    if (server_vertex_.empty()) throw ConfigError(file, "edge_datacenters", "no edge server");
    if (access_points_.empty()) throw ConfigError(file, "edge_datacenters", "devices need at least one access point");
    std::vector<envgen::Edge> edges;
    for (const auto& l : config_.datacenters.links) {
        VertexId a = by_name.at(l.from), b = by_name.at(l.to);
        graph_.add_link(a, b, l.bandwidth_mbps.value_or(params.man_bandwidth), l.latency.value_or(params.man_latency));
        edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    if (!graph_.is_connected()) throw ConfigError(file, "network_links", "network graph is not connected");

    double share_sum = 0.0;
    for (const auto& app : config_.applications) {
        expected_length_ += app.expected_length * app.device_share;
        share_sum += app.device_share;
    }
    expected_length_ /= share_sum;

    const std::size_t servers = server_vertex_.size();
    agent_of_server_.assign(servers, 0);
    switch (topology()) {
        case Topology::Decentralized:
            for (ServerIndex s = 0; s < servers; ++s) {
                agents_.push_back(AgentDomain{server_name(s), s, {s}});
                agent_of_server_[s] = s;
            }
            break;
        case Topology::Hybrid: {
            int clusters = 0;
            for (const auto& c : cluster_of) clusters = std::max(clusters, *c + 1);
            for (int k = 0; k < clusters; ++k) {
                AgentDomain d;
                for (ServerIndex s = 0; s < servers; ++s) {
                    if (*cluster_of[s] != k) continue;
                    d.members.push_back(s);
                    if (head[s]) d.pricer = s;
                    agent_of_server_[s] = agents_.size();
                }
                d.id = server_name(d.pricer);
                agents_.push_back(std::move(d));
            }
            break;
        }
        case Topology::Centralized: {
            // Highest hop-count betweenness of the AP a server hangs off.
            auto centrality = envgen::betweenness(graph_.vertex_count(), edges);
            auto score = [&](ServerIndex s) {
                VertexId v = server_vertex_[s];
                std::optional<VertexId> host;
                for (const auto& [u, link] : graph_.neighbors(v)) {
                    if (graph_.vertex(u).kind == VertexKind::AccessPoint && (!host || u < *host)) host = u;
                }
                return centrality[host.value_or(v)];
            };
            ServerIndex best = 0;
            for (ServerIndex s = 1; s < servers; ++s) {
                if (score(s) > score(best)) best = s;
            }
            AgentDomain d{server_name(best), best, {}};
            d.members.resize(servers);
            std::iota(d.members.begin(), d.members.end(), ServerIndex{0});
            agents_.push_back(std::move(d));
            break;
        }
    }
}

const std::string& Scenario::server_name(ServerIndex s) const { return graph_.vertex(server_vertex_.at(s)).name; }

std::vector<DdpgAgent> create_agents(const Scenario& scenario, const AgentHyperparams& hp, std::uint64_t seed) {
    SeedManager seeds(seed);
    std::vector<DdpgAgent> out;
    for (std::size_t a = 0; a < scenario.agents().size(); ++a) {
        out.emplace_back(scenario.agents()[a].id, hp, seeds.derive_seed("init", a));
    }
    return out;
}

std::filesystem::path agent_state_path(const std::filesystem::path& model_dir, const std::string& agent_id) {
    return model_dir / agent_id / "state.cbor";
}

std::vector<DdpgAgent> load_agents(const Scenario& scenario, const AgentHyperparams& hp,
                                   const std::filesystem::path& model_dir, RunMode mode, std::uint64_t seed) {
    SeedManager seeds(seed);
    std::vector<DdpgAgent> out;
    std::vector<std::string> problems, failed;
    for (std::size_t a = 0; a < scenario.agents().size(); ++a) {
        const std::string& id = scenario.agents()[a].id;
        auto path = agent_state_path(model_dir, id);
        if (!std::filesystem::exists(path)) {
            if (mode == RunMode::Evaluate) {
                problems.push_back(id + " (missing " + path.string() + ")");
                failed.push_back(id);
                continue;
            }
            out.emplace_back(id, hp, seeds.derive_seed("init", a));
            continue;
        }
        try {
            out.push_back(DdpgAgent::load(path, id, hp));
        } catch (const AgentStateError& e) {
            if (mode == RunMode::Train) throw;
            problems.push_back(e.what());
            failed.push_back(id);
        }
    }
    if (!problems.empty()) {
        std::string msg = "cannot evaluate without trained models for: ";
        for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
        throw AgentStateError(failed.size() == 1 ? failed.front() : "*", msg);
    }
    return out;
}

void save_agents(const std::vector<DdpgAgent>& agents, const std::filesystem::path& model_dir) {
    for (const auto& a : agents) a.save(agent_state_path(model_dir, a.id()));
}

namespace {

/// Nearest access point by Euclidean distance (ties to the lower vertex id)
/// using a uniform grid.
class ApLocator {
public:
    ApLocator(const ManGraph& graph, const std::vector<VertexId>& aps) : graph_(graph) {
        double min_x = kInfinity, min_y = kInfinity, max_x = -kInfinity, max_y = -kInfinity;
        for (VertexId v : aps) {
            const Location& p = graph.vertex(v).location;
            min_x = std::min(min_x, p.x);
            min_y = std::min(min_y, p.y);
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
        }
        origin_ = {min_x, min_y};
        double extent = std::max({max_x - min_x, max_y - min_y, 1.0});
        auto per_side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(aps.size()))));
        cell_ = extent / static_cast<double>(std::max<std::size_t>(per_side, 1));
        cols_ = static_cast<long>(std::floor((max_x - min_x) / cell_)) + 1;
        rows_ = static_cast<long>(std::floor((max_y - min_y) / cell_)) + 1;
        cells_.resize(static_cast<std::size_t>(cols_ * rows_));
        for (VertexId v : aps) {
            auto [cx, cy] = cell_of(graph.vertex(v).location);
            cells_[static_cast<std::size_t>(cy * cols_ + cx)].push_back(v);
        }
    }

    VertexId nearest(Location p) const {
        auto [qx, qy] = cell_of(p);
        double best_d = kInfinity;
        VertexId best = 0;
        // Cells outside the bounding box are clamped; beyond ring r every
        // unvisited AP is at least r * cell away.
        long max_ring = std::max(cols_, rows_) + 1;
        for (long r = 0; r <= max_ring; ++r) {
            for (long cy = qy - r; cy <= qy + r; ++cy) {
                if (cy < 0 || cy >= rows_) continue;
                for (long cx = qx - r; cx <= qx + r; ++cx) {
                    if (cx < 0 || cx >= cols_) continue;
                    if (std::max(std::abs(cx - qx), std::abs(cy - qy)) != r) continue;
                    for (VertexId v : cells_[static_cast<std::size_t>(cy * cols_ + cx)]) {
                        double d = distance(p, graph_.vertex(v).location);
                        if (d < best_d || (d == best_d && v < best)) {
                            best_d = d;
                            best = v;
                        }
                    }
                }
            }
            if (best_d < static_cast<double>(r) * cell_) break;
        }
        return best;
    }

private:
    std::pair<long, long> cell_of(Location p) const {
        long cx = static_cast<long>(std::floor((p.x - origin_.x) / cell_));
        long cy = static_cast<long>(std::floor((p.y - origin_.y) / cell_));
        return {std::clamp(cx, 0L, cols_ - 1), std::clamp(cy, 0L, rows_ - 1)};
    }

    const ManGraph& graph_;
    Location origin_;
    double cell_ = 1.0;
    long cols_ = 1, rows_ = 1;
    std::vector<std::vector<VertexId>> cells_;
};

struct Device {
    std::size_t type = 0;
    std::size_t app = 0;
    Cpu cpu;
    std::optional<Battery> battery;
    MobilityState mobility;
    VertexId ap = 0;
    ImportanceWeights weights;
    bool alive = true;
    RngStream arrivals, taskgen, moves;
    std::vector<TransferId> downloads;
};

struct Server {
    Cpu cpu;
    double ram_used = 0.0;      // MB
    double storage_used = 0.0;  // MB
    double busy_billed = 0.0;   // busy core-seconds already converted to energy
    double estimate = 0.0;      // published queue estimate for the current slot
};

struct AgentRuntime {
    std::size_t slot = 0;
    bool started = false;
    double price = 0.0;
    Observation state{};     // raw
    Observation fed_state{}; // as seen by the network
    double offloaded_mi = 0.0;
    std::size_t arrivals = 0;
    double cluster_estimate = 0.0;
    double cumulative = 0.0;
};

struct TaskRecord {
    Task task;
    std::size_t app = 0;
    std::optional<std::size_t> agent;
    std::optional<std::size_t> decision_slot;
    std::optional<double> price;
    std::optional<ServerIndex> target;  // server the upload is addressed to
    double upload_end = 0.0;
    double download_end = 0.0;
};

class Episode {
public:
    Episode(const Scenario& scenario, const EpisodeOptions& options, std::vector<DdpgAgent>& agents)
        : sc_(scenario),
          opt_(options),
          cfg_(scenario.config()),
          params_(cfg_.parameters),
          agents_(agents),
          seeds_(options.seed),
          network_(scenario.graph(), params_.wifi_bandwidth, params_.wifi_latency),
          locator_(scenario.graph(), scenario.access_points()),
          area_{params_.length, params_.width},
          horizon_(params_.simulation_seconds()),
          clock_(horizon_) {
        if (agents_.size() != sc_.agents().size()) {
            throw std::invalid_argument("run_episode: agent count does not match the scenario");
        }
        opt_.hyper.validate();
    }

    EpisodeResult run() {
        setup();
        while (!queue_.empty()) {
            Event e = queue_.pop();
            if (e.fire_time < clock_.now()) result_.monotone_time = false;
            clock_.advance_to(e.fire_time);
            trace_.add(e);
            ++result_.events_fired;
            if (e.kind == EventKind::SimulationEnd) {
                finish();
                break;
            }
            dispatch(e);
        }
        return std::move(result_);
    }

private:
    double now() const { return clock_.now(); }

    void schedule(double t, EventKind kind, std::uint64_t subject = 0, std::uint64_t detail = 0) {
        queue_.schedule(Event{t, 0, kind, subject, detail}, now());
    }

    void setup() {
        const std::size_t n = params_.edge_devices_count;
        std::vector<double> type_shares, app_shares;
        for (const auto& t : cfg_.device_types) type_shares.push_back(t.share);
        for (const auto& a : cfg_.applications) app_shares.push_back(a.device_share);
        auto type_of = assign_by_share(type_shares, n);
        auto app_of = assign_by_share(app_shares, n);

        devices_.reserve(n);
        for (std::size_t d = 0; d < n; ++d) {
            const DeviceTypeSpec& type = cfg_.device_types[type_of[d]];
            RngStream weights_rng = seeds_.derive_stream("weights", d);
            Device dev{type_of[d],
                       app_of[d],
                       Cpu(type.cores, type.mips_per_core),
                       std::nullopt,
                       {},
                       0,
                       generate_weights(weights_rng),
                       true,
                       seeds_.derive_stream("arrivals", d),
                       seeds_.derive_stream("taskgen", d),
                       seeds_.derive_stream("mobility", d),
                       {}};
            if (type.battery_powered) {
                double capacity = type.battery_capacity_wh * kJoulesPerWattHour;
                dev.battery = Battery(capacity, capacity * type.initial_battery_percent / 100.0);
            }
            Location start = random_location(area_, dev.moves);
            dev.mobility = start_mobility(type, start, 0.0, dev.moves);
            dev.ap = locator_.nearest(start);
            devices_.push_back(std::move(dev));
        }

        const ServerSpec& spec = sc_.server_spec();
        servers_.assign(sc_.server_count(), Server{Cpu(spec.cores, spec.mips_per_core)});
        runtime_.assign(agents_.size(), AgentRuntime{});
        result_.agent_logs.assign(agents_.size(), {});
        result_.price_updates.assign(agents_.size(), 0);

        for (std::size_t a = 0; a < agents_.size(); ++a) {
            agents_[a].begin_episode(seeds_.derive_stream("noise", a), seeds_.derive_stream("replay", a),
                                     seeds_.derive_stream("explore", a));
        }

        if (horizon_ > 0.0) {
            for (std::size_t a = 0; a < agents_.size(); ++a) schedule(0.0, EventKind::PriceUpdate, a, 0);
            for (std::size_t d = 0; d < devices_.size(); ++d) {
                const DeviceTypeSpec& type = cfg_.device_types[devices_[d].type];
                if (!type.generates_tasks) continue;
                double t = next_arrival(cfg_.applications[devices_[d].app].poisson_rate, 0.0, devices_[d].arrivals);
                if (t <= horizon_) schedule(t, EventKind::TaskGeneration, d);
            }
            if (params_.update_interval <= horizon_) schedule(params_.update_interval, EventKind::MobilityEnergyUpdate, 0, 1);
            if (params_.network_update_interval <= horizon_) {
                schedule(params_.network_update_interval, EventKind::NetworkUpdate, 0, 1);
            }
        }
        next_network_tick_ = params_.network_update_interval;
        schedule(horizon_, EventKind::SimulationEnd);
    }

    void dispatch(const Event& e) {
        switch (e.kind) {
            case EventKind::TaskGeneration: on_task_generation(e.subject); break;
            case EventKind::PriceUpdate: on_price_update(e.subject, e.detail); break;
            case EventKind::MobilityEnergyUpdate: on_mobility_energy(e.detail); break;
            case EventKind::NetworkUpdate: on_network_update(e.detail); break;
            case EventKind::TaskArrivedAtNode: on_task_arrived(e.subject); break;
            case EventKind::ExecutionFinished: on_execution_finished(e.subject, e.detail); break;
            case EventKind::ResultDelivered: on_result_delivered(e.subject); break;
            case EventKind::SimulationEnd: break;
        }
    }

    // ---- task lifecycle -------------------------------------------------

    void terminate(TaskRecord& rec, TaskStatus status) {
        rec.task.advance(status);
        rec.task.finish_time = now();
    }

    double energy_budget(const Device& dev) const { return dev.battery ? dev.battery->remaining() : kInfinity; }

    /// Charges the device; on exhaustion the task fails and the device dies.
    bool charge(DeviceIndex d, double joules) {
        Device& dev = devices_[d];
        device_energy_ += joules;
        if (!dev.battery) return true;
        if (dev.battery->draw(joules)) return true;
        kill_device(d);
        return false;
    }

    void kill_device(DeviceIndex d) {
        Device& dev = devices_[d];
        if (!dev.alive) return;
        dev.alive = false;
        ++dead_devices_;
        for (TaskId id : dev.cpu.clear(now())) {
            TaskRecord& rec = tasks_[id];
            if (!is_terminal(rec.task.status)) terminate(rec, TaskStatus::FailedDeviceDead);
        }
    }

    void on_task_generation(DeviceIndex d) {
        Device& dev = devices_[d];
        if (!dev.alive) return;
        const ApplicationProfile& app = cfg_.applications[dev.app];

        TaskRecord rec;
        rec.task = sample_task(app, d, now(), tasks_.size(), dev.taskgen);
        rec.app = dev.app;
        const TaskId id = rec.task.id;
        tasks_.push_back(std::move(rec));
        decide_and_dispatch(d, id);

        double next = next_arrival(app.poisson_rate, now(), dev.arrivals);
        if (next <= horizon_) schedule(next, EventKind::TaskGeneration, d);
    }

    void decide_and_dispatch(DeviceIndex d, TaskId id) {
        Device& dev = devices_[d];
        TaskRecord& rec = tasks_[id];
        const Task& task = rec.task;
        const DeviceTypeSpec& type = cfg_.device_types[dev.type];
        const ServerSpec& spec = sc_.server_spec();
        const double rate = network_.wifi_rate_estimate(dev.ap);
        const double budget = energy_budget(dev);
        DestinationQuote local = local_quote(task, type, dev.cpu.queued_mi(now()));

        quotes_.clear();
        std::optional<ServerIndex> target;
        std::optional<std::size_t> agent;
        switch (sc_.topology()) {
            case Topology::Decentralized: {
                for (ServerIndex s = 0; s < servers_.size(); ++s) {
                    double prop = network_.device_propagation(dev.ap, sc_.server_vertex(s));
                    quotes_.push_back(remote_quote(task, type, spec, rate, rate, prop, servers_[s].estimate,
                                                   runtime_[sc_.agent_of_server(s)].price));
                }
                auto choice = decide_decentralized(task, dev.weights, budget, local, quotes_, opt_.price_preference);
                if (choice.destination) {
                    target = *choice.destination;
                    agent = sc_.agent_of_server(*target);
                }
                break;
            }
            case Topology::Hybrid: {
                for (std::size_t a = 0; a < runtime_.size(); ++a) {
                    ServerIndex head = sc_.agents()[a].pricer;
                    double prop = network_.device_propagation(dev.ap, sc_.server_vertex(head));
                    quotes_.push_back(remote_quote(task, type, spec, rate, rate, prop, runtime_[a].cluster_estimate,
                                                   runtime_[a].price));
                }
                auto choice = decide_hybrid(task, dev.weights, budget, local, quotes_, opt_.price_preference);
                if (choice.destination) {
                    agent = *choice.destination;
                    target = sc_.agents()[*agent].pricer;
                }
                break;
            }
            case Topology::Centralized: {
                const double platform_price = runtime_.front().price;
                for (ServerIndex s = 0; s < servers_.size(); ++s) {
                    double prop = network_.device_propagation(dev.ap, sc_.server_vertex(s));
                    quotes_.push_back(
                        remote_quote(task, type, spec, rate, rate, prop, servers_[s].estimate, platform_price));
                }
                auto choice = decide_centralized(task, dev.weights, budget, local, quotes_, opt_.price_preference);
                if (choice.destination) {
                    target = *choice.destination;
                    agent = 0;
                }
                break;
            }
        }

        if (!target) {
            run_locally(d, id);
            return;
        }
        AgentRuntime& rt = runtime_[*agent];
        rec.task.offloaded = true;
        rec.task.offload_start = now();
        rec.agent = agent;
        rec.decision_slot = rt.slot;
        rec.price = rt.price;
        rec.target = target;
        rt.offloaded_mi += task.length_mi;

        Route route = network_.device_route(dev.ap, sc_.server_vertex(*target));
        completed_.clear();
        TransferId tid = network_.start(now(), next_network_tick_, id, TransferDirection::UploadInput, route,
                                        rec.task.input_bits, completed_);
        transfers_[tid] = TransferDirection::UploadInput;
        handle_completions();
    }

    void run_locally(DeviceIndex d, TaskId id) {
        Device& dev = devices_[d];
        TaskRecord& rec = tasks_[id];
        rec.task.advance(TaskStatus::Queued);
        if (auto started = dev.cpu.submit(id, rec.task.length_mi, now())) begin_execution(*started, 0);
    }

    /// `where` is 0 for the device CPU, 1 + server index otherwise.
    void begin_execution(const Cpu::Started& started, std::uint64_t where) {
        TaskRecord& rec = tasks_[started.id];
        rec.task.advance(TaskStatus::Executing);
        rec.task.exec_start = now();
        schedule(started.finish, EventKind::ExecutionFinished, started.id, where);
    }

    void handle_completions() {
        for (const auto& c : completed_) {
            auto it = transfers_.find(c.id);
            TransferDirection dir = it->second;
            transfers_.erase(it);
            TaskRecord& rec = tasks_[c.task];
            if (dir == TransferDirection::UploadInput) {
                rec.upload_end = c.time;
                schedule(c.time + c.propagation, EventKind::TaskArrivedAtNode, c.task);
            } else {
                rec.download_end = c.time;
                auto& dl = devices_[rec.task.origin_device].downloads;
                dl.erase(std::remove(dl.begin(), dl.end(), c.id), dl.end());
                schedule(c.time + c.propagation, EventKind::ResultDelivered, c.task);
            }
        }
        completed_.clear();
    }

    void on_task_arrived(TaskId id) {
        TaskRecord& rec = tasks_[id];
        const DeviceIndex d = rec.task.origin_device;
        rec.task.arrival_time = now();
        const ServerIndex target = *rec.target;
        runtime_[sc_.agent_of_server(target)].arrivals += 1;
        if (!devices_[d].alive) {
            terminate(rec, TaskStatus::FailedDeviceDead);
            return;
        }
        const DeviceTypeSpec& type = cfg_.device_types[devices_[d].type];
        if (!charge(d, type.tx_power * (rec.upload_end - *rec.task.offload_start))) {
            if (!is_terminal(rec.task.status)) terminate(rec, TaskStatus::FailedEnergy);
            return;
        }

        ServerIndex exec = target;
        if (sc_.topology() == Topology::Hybrid) {
            const auto& members = sc_.agents()[sc_.agent_of_server(target)].members;
            lengths_.clear();
            for (ServerIndex m : members) lengths_.push_back(servers_[m].cpu.queue_length());
            exec = members[allocate_in_cluster(lengths_)];
        }
        rec.task.destination = exec;

        Server& server = servers_[exec];
        const ServerSpec& spec = sc_.server_spec();
        const double container_mb = rec.task.container_bits / kBitsPerMegabyte;
        if (server.ram_used + container_mb > spec.ram_mb || server.storage_used + container_mb > spec.storage_mb) {
            rec.task.rejected = true;
            terminate(rec, TaskStatus::FailedLatency);
            return;
        }
        server.ram_used += container_mb;
        server.storage_used += container_mb;
        rec.task.advance(TaskStatus::Queued);
        if (auto started = server.cpu.submit(id, rec.task.length_mi, now())) begin_execution(*started, 1 + exec);
    }

    void on_execution_finished(TaskId id, std::uint64_t where) {
        TaskRecord& rec = tasks_[id];
        if (is_terminal(rec.task.status)) return;  // device died meanwhile
        const DeviceIndex d = rec.task.origin_device;
        rec.task.exec_end = now();

        if (where == 0) {
            Device& dev = devices_[d];
            if (auto next = dev.cpu.finish(id, now())) begin_execution(*next, 0);
            const DeviceTypeSpec& type = cfg_.device_types[dev.type];
            double e0 = local_exec_energy(type.max_power, rec.task.length_mi, type.cores, type.mips_per_core);
            if (!charge(d, e0)) {
                if (!is_terminal(rec.task.status)) terminate(rec, TaskStatus::FailedEnergy);
                return;
            }
            bool on_time = now() - rec.task.creation_time <= rec.task.max_delay;
            terminate(rec, on_time ? TaskStatus::DoneSuccess : TaskStatus::FailedLatency);
            return;
        }

        const ServerIndex s = static_cast<ServerIndex>(where - 1);
        Server& server = servers_[s];
        if (auto next = server.cpu.finish(id, now())) begin_execution(*next, where);
        const double container_mb = rec.task.container_bits / kBitsPerMegabyte;
        server.ram_used = std::max(0.0, server.ram_used - container_mb);
        server.storage_used = std::max(0.0, server.storage_used - container_mb);

        Device& dev = devices_[d];
        if (!dev.alive) {
            terminate(rec, TaskStatus::FailedDeviceDead);
            return;
        }
        rec.task.download_start = now();
        Route route = network_.device_route(dev.ap, sc_.server_vertex(s));
        completed_.clear();
        TransferId tid = network_.start(now(), next_network_tick_, id, TransferDirection::DownloadResult, route,
                                        rec.task.output_bits, completed_);
        transfers_[tid] = TransferDirection::DownloadResult;
        if (network_.in_flight(tid)) dev.downloads.push_back(tid);
        handle_completions();
    }

    void on_result_delivered(TaskId id) {
        TaskRecord& rec = tasks_[id];
        if (is_terminal(rec.task.status)) return;
        const DeviceIndex d = rec.task.origin_device;
        if (!devices_[d].alive) {
            terminate(rec, TaskStatus::FailedDeviceDead);
            return;
        }
        const DeviceTypeSpec& type = cfg_.device_types[devices_[d].type];
        if (!charge(d, type.rx_power * (rec.download_end - *rec.task.download_start))) {
            if (!is_terminal(rec.task.status)) terminate(rec, TaskStatus::FailedEnergy);
            return;
        }
        rec.task.delivery_time = now();
        bool on_time = now() - rec.task.creation_time <= rec.task.max_delay;
        terminate(rec, on_time ? TaskStatus::DoneSuccess : TaskStatus::FailedLatency);
    }

    // ---- periodic updates -----------------------------------------------

    void on_mobility_energy(std::uint64_t round) {
        ++result_.mobility_rounds;
        const double dt = params_.update_interval;
        for (DeviceIndex d = 0; d < devices_.size(); ++d) {
            Device& dev = devices_[d];
            if (!dev.alive) continue;
            const DeviceTypeSpec& type = cfg_.device_types[dev.type];
            if (!is_static(type)) {
                Location p = update_mobility(dev.mobility, type, area_, now(), dt, dev.moves);
                VertexId ap = locator_.nearest(p);
                if (ap != dev.ap) {
                    dev.ap = ap;
                    reroute_downloads(d);
                }
            }
            double idle = dt * type.idle_power;
            if (!charge(d, idle)) continue;
            if (dev.battery && dev.battery->remaining() < idle) kill_device(d);
        }
        const ServerSpec& spec = sc_.server_spec();
        for (Server& s : servers_) {
            double busy = s.cpu.busy_core_seconds(now());
            server_energy_ += integrated_energy(spec.idle_power, spec.max_power, dt, busy - s.busy_billed, spec.cores);
            s.busy_billed = busy;
        }
        double next = static_cast<double>(round + 1) * dt;
        if (next <= horizon_) schedule(next, EventKind::MobilityEnergyUpdate, 0, round + 1);
    }

    void reroute_downloads(DeviceIndex d) {
        Device& dev = devices_[d];
        auto ids = dev.downloads;
        completed_.clear();
        for (TransferId tid : ids) {
            ServerIndex s = *tasks_[network_.transfer(tid).task].task.destination;
            network_.reroute(tid, now(), next_network_tick_, network_.device_route(dev.ap, sc_.server_vertex(s)),
                             completed_);
        }
        handle_completions();
    }

    void on_network_update(std::uint64_t round) {
        ++result_.network_rounds;
        const double dt = params_.network_update_interval;
        next_network_tick_ = static_cast<double>(round + 1) * dt;
        completed_ = network_.tick(now(), dt);
        handle_completions();
        if (next_network_tick_ <= horizon_) schedule(next_network_tick_, EventKind::NetworkUpdate, 0, round + 1);
    }

    // ---- pricing --------------------------------------------------------

    double slot_reward(std::size_t a) const {
        const AgentRuntime& rt = runtime_[a];
        const auto& members = sc_.agents()[a].members;
        const AgentHyperparams& hp = opt_.hyper;
        if (sc_.topology() == Topology::Decentralized) {
            return reward_decentralized(rt.price, rt.offloaded_mi, sc_.server_spec(), hp.energy_cost, hp.slot_length);
        }
        return reward_cluster(rt.price, rt.offloaded_mi, members.size(), sc_.server_spec(), hp.energy_cost,
                              hp.slot_length);
    }

    Observation observe(std::size_t a, double previous_arrival_rate) const {
        const auto& members = sc_.agents()[a].members;
        double queued = 0.0;
        for (ServerIndex s : members) queued += static_cast<double>(servers_[s].cpu.queue_length());
        return {queued / static_cast<double>(members.size()), previous_arrival_rate};
    }

    Observation feed(std::size_t a, const Observation& raw) const {
        if (!opt_.hyper.normalize_state) return raw;
        const ServerSpec& spec = sc_.server_spec();
        double members = static_cast<double>(sc_.agents()[a].members.size());
        // Queue length per core and offered load as a fraction of capacity.
        return {raw[0] / spec.cores,
                raw[1] * sc_.expected_task_length() / (members * spec.total_mips())};
    }

    /// Logs the slot that just ended and stores its transition.
    void close_slot(std::size_t a, const Observation& next_raw) {
        AgentRuntime& rt = runtime_[a];
        double r = slot_reward(a);
        rt.cumulative += r;
        result_.agent_logs[a].push_back(AgentSlotRow{rt.slot, rt.state, rt.price, rt.offloaded_mi, r, rt.cumulative});
        if (learning()) {
            agents_[a].remember(Transition{rt.fed_state, action_from_price(rt.price), r, feed(a, next_raw)});
        }
    }

    bool learning() const { return opt_.mode == RunMode::Train && opt_.policy == PricingPolicy::Agent; }

    void on_price_update(std::size_t a, std::uint64_t slot) {
        AgentRuntime& rt = runtime_[a];
        const double tau = opt_.hyper.slot_length;
        double lambda = 0.0;
        if (rt.started) lambda = static_cast<double>(rt.arrivals) / tau;
        Observation raw = observe(a, lambda);
        if (rt.started) {
            close_slot(a, raw);
            if (learning()) {
                for (std::size_t k = 0; k < opt_.hyper.updates_per_slot; ++k) agents_[a].update();
            }
        }

        rt.slot = static_cast<std::size_t>(slot);
        rt.started = true;
        rt.state = raw;
        rt.fed_state = feed(a, raw);
        rt.offloaded_mi = 0.0;
        rt.arrivals = 0;
        DdpgAgent& agent = agents_[a];
        switch (opt_.policy) {
            case PricingPolicy::Agent: {
                ActMode mode = ActMode::Greedy;
                if (opt_.mode == RunMode::Train) mode = agent.random_phase(rt.slot) ? ActMode::Random : ActMode::Explore;
                rt.price = agent.act(rt.fed_state, mode);
                break;
            }
            case PricingPolicy::UniformRandom: rt.price = agent.act(rt.fed_state, ActMode::Random); break;
            case PricingPolicy::Fixed: rt.price = opt_.fixed_price; break;
        }
        ++result_.price_updates[a];
        publish_estimates(a);

        double next = static_cast<double>(slot + 1) * tau;
        if (next < horizon_) schedule(next, EventKind::PriceUpdate, a, slot + 1);
    }

    void publish_estimates(std::size_t a) {
        const ServerSpec& spec = sc_.server_spec();
        const auto& members = sc_.agents()[a].members;
        double total = 0.0;
        for (ServerIndex s : members) {
            double q = servers_[s].cpu.queued_mi(now());
            servers_[s].estimate = server_queue_estimate(q, spec.cores, spec.mips_per_core);
            total += q;
        }
        runtime_[a].cluster_estimate = cluster_queue_estimate(total, members.size(), spec.cores, spec.mips_per_core);
    }

    void finish() {
        const double tau = opt_.hyper.slot_length;
        for (std::size_t a = 0; a < runtime_.size(); ++a) {
            AgentRuntime& rt = runtime_[a];
            if (!rt.started) continue;
            double slot_end = static_cast<double>(rt.slot + 1) * tau;
            if (slot_end > horizon_ + kSlotTolerance) continue;  // partial trailing slot
            close_slot(a, observe(a, static_cast<double>(rt.arrivals) / tau));
        }
        if (opt_.mode == RunMode::Train && opt_.policy == PricingPolicy::Agent) {
            for (auto& agent : agents_) agent.end_episode();
        }

        result_.tasks.reserve(tasks_.size());
        for (const auto& rec : tasks_) result_.tasks.push_back(to_row(rec));
        result_.summary = summarize(result_.tasks, tasks_.size());
        for (const auto& log : result_.agent_logs) {
            if (!log.empty()) result_.summary.total_return += log.back().cumulative;
        }
        result_.summary.server_energy = server_energy_;
        result_.summary.device_energy = device_energy_;
        result_.summary.dead_devices = dead_devices_;
        for (auto n : result_.price_updates) result_.summary.price_updates += n;
        if (horizon_ > 0.0) {
            double util = 0.0;
            for (const Server& s : servers_) {
                util += s.cpu.busy_core_seconds(horizon_) / (s.cpu.cores() * horizon_);
            }
            result_.summary.mean_cpu_utilization = 100.0 * util / static_cast<double>(servers_.size());
        }
        result_.trace_hash = trace_.value();
    }

    TaskLogRow to_row(const TaskRecord& rec) const {
        const Task& t = rec.task;
        TaskLogRow r;
        r.id = t.id;
        r.device = t.origin_device;
        r.application = cfg_.applications[rec.app].name;
        r.creation_time = t.creation_time;
        r.length_mi = t.length_mi;
        r.input_bits = t.input_bits;
        r.output_bits = t.output_bits;
        r.container_bits = t.container_bits;
        r.max_delay = t.max_delay;
        r.offloaded = t.offloaded;
        if (rec.agent) r.agent = sc_.agents()[*rec.agent].id;
        if (rec.decision_slot) r.decision_slot = static_cast<double>(*rec.decision_slot);
        r.price = rec.price;
        if (t.destination) {
            r.destination = sc_.server_name(*t.destination);
        } else if (!t.offloaded) {
            r.destination = "local";
        }
        r.rejected = t.rejected;
        r.status = t.status;
        r.offload_start = t.offload_start;
        r.arrival_time = t.arrival_time;
        r.exec_start = t.exec_start;
        r.exec_end = t.exec_end;
        r.download_start = t.download_start;
        r.delivery_time = t.delivery_time;
        r.finish_time = t.finish_time;
        return r;
    }

    const Scenario& sc_;
    EpisodeOptions opt_;
    const ScenarioConfig& cfg_;
    const SimulationParameters& params_;
    std::vector<DdpgAgent>& agents_;
    SeedManager seeds_;
    Network network_;
    ApLocator locator_;
    Area area_;
    double horizon_;
    Clock clock_;
    EventQueue queue_;
    TraceHash trace_;

    std::vector<Device> devices_;
    std::vector<Server> servers_;
    std::vector<AgentRuntime> runtime_;
    std::vector<TaskRecord> tasks_;
    std::map<TransferId, TransferDirection> transfers_;
    std::vector<TransferCompletion> completed_;
    std::vector<DestinationQuote> quotes_;
    std::vector<std::size_t> lengths_;
    double next_network_tick_ = 0.0;
    double server_energy_ = 0.0;
    double device_energy_ = 0.0;
    std::size_t dead_devices_ = 0;
    EpisodeResult result_;
};

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << "0x" << std::hex;
    s.width(16);
    s.fill('0');
    s << v;
    return s.str();
}

}  // namespace

EpisodeResult run_episode(const Scenario& scenario, const EpisodeOptions& options, std::vector<DdpgAgent>& agents) {
    Episode episode(scenario, options, agents);
    EpisodeResult result = episode.run();
    if (options.output_dir) write_episode(scenario, options, result, *options.output_dir);
    return result;
}

void write_episode(const Scenario& scenario, const EpisodeOptions& options, const EpisodeResult& result,
                   const std::filesystem::path& dir) {
    if (options.write_tasks) {
        CsvWriter tasks(dir / "tasks.csv", task_log_header());
        for (const auto& row : result.tasks) tasks.row(task_log_cells(row));
    }
    {
        const ServerSpec& spec = scenario.server_spec();
        CsvWriter info(dir / "agents.csv", {"agent", "topology", "members", "member_names", "idle_power", "max_power",
                                            "cores", "mips_per_core", "energy_cost", "slot_length", "price_updates"});
        for (std::size_t a = 0; a < scenario.agents().size(); ++a) {
            const auto& domain = scenario.agents()[a];
            std::string names;
            for (std::size_t i = 0; i < domain.members.size(); ++i) {
                names += (i ? ";" : "") + scenario.server_name(domain.members[i]);
            }
            info.row({domain.id, to_string(scenario.topology()), std::to_string(domain.members.size()), names,
                      format_number(spec.idle_power), format_number(spec.max_power), std::to_string(spec.cores),
                      format_number(spec.mips_per_core), format_number(options.hyper.energy_cost),
                      format_number(options.hyper.slot_length), std::to_string(result.price_updates[a])});
        }
    }
    for (std::size_t a = 0; a < scenario.agents().size(); ++a) {
        CsvWriter log(dir / "agents" / (scenario.agents()[a].id + ".csv"),
                      {"slot", "queue_length", "arrival_rate", "price", "offloaded_mi", "reward", "cumulative_reward"});
        for (const auto& row : result.agent_logs[a]) {
            log.row({std::to_string(row.slot), format_number(row.state[0]), format_number(row.state[1]),
                     format_number(row.price), format_number(row.offloaded_mi), format_number(row.reward),
                     format_number(row.cumulative)});
        }
    }
    write_summary(result.summary, dir / "summary.csv", {{"event_trace_hash", hex64(result.trace_hash)}});
}

}  // namespace edgeprice
