#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "edgeprice/csv.hpp"
#include "edgeprice/simulation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace edgeprice;

namespace {

EpisodeResult run(const Scenario& scenario, EpisodeOptions opts = {}) {
    auto agents = create_agents(scenario, opts.hyper, opts.seed);
    return run_episode(scenario, opts, agents);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("share assignment") {
    auto owners = assign_by_share({30, 40, 20, 10}, 10);
    std::map<std::size_t, int> counts;
    for (auto o : owners) ++counts[o];
    CHECK(counts[0] == 3);
    CHECK(counts[1] == 4);
    CHECK(counts[2] == 2);
    CHECK(counts[3] == 1);
    CHECK(std::is_sorted(owners.begin(), owners.end()));

    auto seven = assign_by_share({30, 40, 20, 10}, 7);
    CHECK(seven.size() == 7);
    CHECK(assign_by_share({50, 50}, 0).empty());
}

TEST_CASE("agent layout per topology") {
    auto c = fixtures::make_config({.servers = 5, .clusters = 2});
    Scenario dec(c);
    CHECK(dec.agents().size() == 5);
    for (std::size_t s = 0; s < 5; ++s) CHECK(dec.agents()[dec.agent_of_server(s)].members == std::vector<ServerIndex>{s});

    c.parameters.orchestration_algorithms = Topology::Hybrid;
    Scenario hyb(c);
    CHECK(hyb.agents().size() == 2);
    std::size_t members = 0;
    for (const auto& a : hyb.agents()) {
        members += a.members.size();
        CHECK(std::count(a.members.begin(), a.members.end(), a.pricer) == 1);
        CHECK(c.datacenters.nodes[a.pricer].cluster_head);
        CHECK(a.id == hyb.server_name(a.pricer));
    }
    CHECK(members == 5);

    c.parameters.orchestration_algorithms = Topology::Centralized;
    Scenario cen(c);
    REQUIRE(cen.agents().size() == 1);
    CHECK(cen.agents()[0].members.size() == 5);
}

TEST_CASE("zero-length episode") {
    Scenario s(fixtures::make_config({.minutes = 0}));
    auto r = run(s);
    CHECK(r.summary.generated == 0);
    CHECK(r.tasks.empty());
    for (auto n : r.price_updates) CHECK(n == 0);
    for (const auto& log : r.agent_logs) CHECK(log.empty());
}

TEST_CASE("one minute run") {
    Scenario s(fixtures::make_config({.servers = 2, .devices = 10, .minutes = 1}));
    auto r = run(s);
    CHECK(r.monotone_time);
    for (auto n : r.price_updates) CHECK(n == 12);
    for (const auto& log : r.agent_logs) CHECK(log.size() == 12);
    CHECK(r.mobility_rounds == 60);
    CHECK(r.summary.generated > 400);
    CHECK(r.summary.generated < 800);
    CHECK_NOTHROW(summarize(r.tasks, r.summary.generated));
    CHECK(r.summary.server_energy >= 2 * 60 * 105 - 1e-6);
    CHECK(r.summary.device_energy > 0);
    for (const auto& t : r.tasks) {
        if (!t.finish_time) continue;
        REQUIRE(*t.finish_time >= t.creation_time);
        if (t.status == TaskStatus::DoneSuccess) REQUIRE(*t.finish_time - t.creation_time <= t.max_delay + 1e-12);
        if (t.offloaded && t.delivery_time) {
            REQUIRE(*t.offload_start <= *t.arrival_time);
            REQUIRE(*t.arrival_time <= *t.exec_start);
            REQUIRE(*t.exec_start < *t.exec_end);
            REQUIRE(*t.exec_end <= *t.download_start);
            REQUIRE(*t.download_start < *t.delivery_time);
        }
    }
}

TEST_CASE("determinism and seed sensitivity") {
    Scenario s(fixtures::make_config({.servers = 3, .devices = 15, .minutes = 2}));
    EpisodeOptions opts;
    opts.seed = 42;
    auto a = run(s, opts);
    auto b = run(s, opts);
    CHECK(a.trace_hash == b.trace_hash);
    CHECK(a.summary.generated == b.summary.generated);
    REQUIRE(a.tasks.size() == b.tasks.size());
    for (std::size_t i = 0; i < a.tasks.size(); ++i) REQUIRE(task_log_cells(a.tasks[i]) == task_log_cells(b.tasks[i]));

    opts.seed = 43;
    CHECK(run(s, opts).trace_hash != a.trace_hash);
}

TEST_CASE("training episodes are deterministic too") {
    Scenario s(fixtures::make_config({.servers = 2, .devices = 10, .minutes = 2}));
    EpisodeOptions opts;
    opts.mode = RunMode::Train;
    opts.seed = 5;
    opts.hyper.batch_size = 4;
    opts.hyper.random_steps = 5;
    auto first = create_agents(s, opts.hyper, 5);
    auto second = create_agents(s, opts.hyper, 5);
    auto a = run_episode(s, opts, first);
    auto b = run_episode(s, opts, second);
    CHECK(a.trace_hash == b.trace_hash);
    CHECK(first[0].actor().flat() == second[0].actor().flat());
    CHECK(first[0].updates() > 0);
    CHECK(first[0].episodes_completed() == 1);
}

TEST_CASE("logged rewards match the task log") {
    for (auto topology : {Topology::Decentralized, Topology::Hybrid, Topology::Centralized}) {
        Scenario s(fixtures::make_config({.servers = 4, .clusters = 2, .devices = 30, .minutes = 2, .topology = topology}));
        auto dir = fixtures::scratch_dir("reward-oracle");
        EpisodeOptions opts;
        opts.seed = 8;
        opts.policy = PricingPolicy::UniformRandom;
        opts.price_preference = 1.0;  // cheap enough that devices do offload
        opts.output_dir = dir;
        auto r = run(s, opts);
        CHECK(r.summary.offloaded > 0);
        auto [worst, checked] = oracles::reward_check(dir);
        CHECK(checked == 24 * s.agents().size());
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("arrival rate state counts the previous slot") {
    Scenario s(fixtures::make_config({.servers = 2, .devices = 30, .minutes = 2}));
    EpisodeOptions opts;
    opts.seed = 3;
    opts.policy = PricingPolicy::Fixed;
    opts.fixed_price = 0.0;
    auto r = run(s, opts);
    REQUIRE(r.summary.offloaded > 0);
    const double tau = opts.hyper.slot_length;
    for (std::size_t a = 0; a < s.agents().size(); ++a) {
        const auto& log = r.agent_logs[a];
        CHECK(log[0].state[1] == 0.0);
        const std::string& name = s.server_name(s.agents()[a].members[0]);
        for (std::size_t k = 1; k < log.size(); ++k) {
            double lo = (k - 1) * tau, hi = k * tau;
            std::size_t count = 0;
            for (const auto& t : r.tasks) count += t.destination == name && t.arrival_time && *t.arrival_time >= lo && *t.arrival_time < hi;
            REQUIRE(log[k].state[1] == doctest::Approx(count / tau));
            REQUIRE(log[k].price == 0.0);
        }
    }
}

TEST_CASE("tiny batteries kill devices without breaking conservation") {
    auto c = fixtures::make_config({.servers = 1, .devices = 10, .minutes = 1});
    for (auto& d : c.device_types) d.battery_capacity_wh = 0.002;
    Scenario s(c);
    auto r = run(s);
    CHECK(r.summary.dead_devices > 0);
    CHECK_NOTHROW(summarize(r.tasks, r.summary.generated));
    std::map<DeviceIndex, double> last_creation;
    for (const auto& t : r.tasks) last_creation[t.device] = std::max(last_creation[t.device], t.creation_time);
    CHECK(r.summary.generated < 300);
}

TEST_CASE("episode output tree") {
    Scenario s(fixtures::make_config({.servers = 2, .devices = 5, .minutes = 1}));
    auto dir = fixtures::scratch_dir("episode-tree");
    EpisodeOptions opts;
    opts.output_dir = dir;
    auto r = run(s, opts);
    CHECK(std::filesystem::exists(dir / "tasks.csv"));
    CHECK(std::filesystem::exists(dir / "agents.csv"));
    CHECK(std::filesystem::exists(dir / "agents" / (s.agents()[0].id + ".csv")));
    CHECK(read_task_log(dir / "tasks.csv").size() == r.summary.generated);
    auto summary = read_summary(dir / "summary.csv");
    CHECK(summary.front().first == "tasks_generated");
    CHECK(slurp(dir / "summary.csv").find("event_trace_hash,0x") != std::string::npos);
}

TEST_CASE("agent state loading") {
    Scenario s(fixtures::make_config({.servers = 2, .devices = 5, .minutes = 1}));
    auto models = fixtures::scratch_dir("models");
    AgentHyperparams hp;
    try {
        load_agents(s, hp, models, RunMode::Evaluate, 0);
        FAIL("loaded missing agents");
    } catch (const AgentStateError& e) {
        CHECK(std::string(e.what()).find("dc0") != std::string::npos);
        CHECK(std::string(e.what()).find("dc1") != std::string::npos);
    }
    auto fresh = load_agents(s, hp, models, RunMode::Train, 0);
    CHECK(fresh.size() == 2);
    save_agents(fresh, models);
    CHECK(std::filesystem::exists(agent_state_path(models, "dc1")));
    auto loaded = load_agents(s, hp, models, RunMode::Evaluate, 0);
    CHECK(loaded[1].actor().flat() == fresh[1].actor().flat());

    std::filesystem::resize_file(agent_state_path(models, "dc1"), 10);
    try {
        load_agents(s, hp, models, RunMode::Evaluate, 0);
        FAIL("loaded a corrupt agent");
    } catch (const AgentStateError& e) {
        CHECK(e.agent() == "dc1");
    }
}
