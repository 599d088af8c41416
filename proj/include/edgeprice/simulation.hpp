#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgeprice/agents.hpp"
#include "edgeprice/config.hpp"
#include "edgeprice/metrics.hpp"
#include "edgeprice/network.hpp"
#include "edgeprice/orchestration.hpp"

namespace edgeprice {

enum class RunMode { Train, Evaluate };

enum class PricingPolicy {
    Agent,          // DDPG actor (with exploration when training)
    UniformRandom,  // U[0, 1] every slot, no learning
    Fixed,          // constant price, no learning
};

/// A pricing agent's domain: one server, one cluster, or the whole platform.
struct AgentDomain {
    std::string id;                      // name of the server that prices
    ServerIndex pricer = 0;              // server hosting the agent (cluster head)
    std::vector<ServerIndex> members;    // sorted
};

/// Parsed inputs turned into a network, server set and agent layout.
/// Immutable and reusable across episodes.
class Scenario {
public:
    explicit Scenario(ScenarioConfig config);

    const ScenarioConfig& config() const { return config_; }
    Topology topology() const { return config_.parameters.orchestration_algorithms; }
    const ServerSpec& server_spec() const { return server_spec_; }
    std::size_t server_count() const { return server_vertex_.size(); }
    const std::string& server_name(ServerIndex s) const;
    VertexId server_vertex(ServerIndex s) const { return server_vertex_.at(s); }
    const std::vector<VertexId>& access_points() const { return access_points_; }
    const std::vector<AgentDomain>& agents() const { return agents_; }
    std::size_t agent_of_server(ServerIndex s) const { return agent_of_server_.at(s); }
    const ManGraph& graph() const { return graph_; }
    double expected_task_length() const { return expected_length_; }

private:
    ScenarioConfig config_;
    ManGraph graph_;
    ServerSpec server_spec_;
    std::vector<VertexId> server_vertex_;
    std::vector<VertexId> access_points_;
    std::vector<AgentDomain> agents_;
    std::vector<std::size_t> agent_of_server_;
    double expected_length_ = 0.0;
};

struct EpisodeOptions {
    RunMode mode = RunMode::Evaluate;
    std::uint64_t seed = 0;
    AgentHyperparams hyper;
    PricingPolicy policy = PricingPolicy::Agent;
    double fixed_price = 0.5;
    double price_preference = kDefaultPricePreference;
    std::optional<std::filesystem::path> output_dir;  // CSV tree, when set
    bool write_tasks = true;                          // tasks.csv in the tree
};

struct AgentSlotRow {
    std::size_t slot = 0;
    Observation state{};  // raw, before any normalization
    double price = 0.0;
    double offloaded_mi = 0.0;
    double reward = 0.0;
    double cumulative = 0.0;
};

struct EpisodeResult {
    RunSummary summary;
    std::vector<TaskLogRow> tasks;
    std::vector<std::vector<AgentSlotRow>> agent_logs;  // per agent, complete slots
    std::vector<std::size_t> price_updates;             // PriceUpdate handlings per agent
    std::size_t mobility_rounds = 0;
    std::size_t network_rounds = 0;
    std::size_t events_fired = 0;
    bool monotone_time = true;
    std::uint64_t trace_hash = 0;
};

/// Fresh agents seeded from derive_seed("init", agent index).
std::vector<DdpgAgent> create_agents(const Scenario& scenario, const AgentHyperparams& hp, std::uint64_t seed);

/// <model_dir>/<agent id>/state.cbor
std::filesystem::path agent_state_path(const std::filesystem::path& model_dir, const std::string& agent_id);

/// Loads every agent. In evaluate mode a missing or unreadable file is an
/// error naming every affected agent; in train mode missing agents start
/// fresh.
std::vector<DdpgAgent> load_agents(const Scenario& scenario, const AgentHyperparams& hp,
                                   const std::filesystem::path& model_dir, RunMode mode, std::uint64_t seed);

void save_agents(const std::vector<DdpgAgent>& agents, const std::filesystem::path& model_dir);

/// One episode. `agents` must match scenario.agents(); they are updated in
/// train mode and their episode counter is advanced.
EpisodeResult run_episode(const Scenario& scenario, const EpisodeOptions& options, std::vector<DdpgAgent>& agents);

/// Writes tasks.csv, agents.csv, agents/<id>.csv and summary.csv.
void write_episode(const Scenario& scenario, const EpisodeOptions& options, const EpisodeResult& result,
                   const std::filesystem::path& dir);

/// Deterministic block assignment of `count` items to shares (percent) by
/// largest remainder; returns the owner of each item.
std::vector<std::size_t> assign_by_share(const std::vector<double>& shares, std::size_t count);

}  // namespace edgeprice
