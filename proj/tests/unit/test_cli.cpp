#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edgeprice/cli.hpp"
#include "fixtures.hpp"

using namespace edgeprice;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    if (out_text) *out_text = out.str() + err.str();
    return code;
}

}  // namespace

TEST_CASE("evaluation mode is the default") {
    auto dir = fixtures::config_dir("desk").string();
    auto r = parse_cli({"simulate", "--input", dir, "--output", "x"});
    CHECK(r.command == "simulate");
    CHECK(r.mode == RunMode::Evaluate);
    CHECK(parse_cli({"simulate", "--input", dir, "--output", "x", "--train"}).mode == RunMode::Train);
}

TEST_CASE("hyperparameter flags") {
    auto dir = fixtures::config_dir("desk").string();
    auto r = parse_cli({"train", "--input", dir, "--output", "o", "--models", "m", "--actor-lr", "5e-4", "--critic-lr",
                        "5e-4", "--gamma", "0.9", "--batch-size", "32", "--replay-size", "500", "--tau", "0.01",
                        "--updates-per-slot", "2", "--noise-theta", "0.2", "--noise-sigma", "0.1", "--random-steps",
                        "7", "--random-episodes", "1", "--energy-cost", "2e-5", "--slot-length", "10",
                        "--normalize-state", "--reward-scale", "0.001", "--hidden-units", "32", "--seed", "9",
                        "--episodes", "3"});
    CHECK(r.hyper.actor_lr == 5e-4);
    CHECK(r.hyper.critic_lr == 5e-4);
    CHECK(r.hyper.gamma == 0.9);
    CHECK(r.hyper.batch_size == 32);
    CHECK(r.hyper.replay_capacity == 500);
    CHECK(r.hyper.tau == 0.01);
    CHECK(r.hyper.updates_per_slot == 2);
    CHECK(r.hyper.noise_theta == 0.2);
    CHECK(r.hyper.noise_sigma == 0.1);
    CHECK(r.hyper.random_steps == 7);
    CHECK(r.hyper.random_episodes == 1);
    CHECK(r.hyper.energy_cost == 2e-5);
    CHECK(r.hyper.slot_length == 10);
    CHECK(r.hyper.normalize_state);
    CHECK(r.hyper.reward_scale == 0.001);
    CHECK(r.hyper.hidden_units == 32);
    CHECK(r.seed == 9);
    CHECK(r.episodes == 3);
}

TEST_CASE("bad arguments are usage errors") {
    auto dir = fixtures::config_dir("desk").string();
    CHECK_THROWS_AS(parse_cli({"simulate", "--input", dir, "--output", "x", "--bogus"}), UsageError);
    CHECK_THROWS_AS(parse_cli({"simulate", "--output", "x"}), UsageError);
    CHECK_THROWS_AS(parse_cli({"simulate", "--input", dir, "--output", "x", "--gamma", "abc"}), UsageError);
    CHECK_THROWS_AS(parse_cli({}), UsageError);
    CHECK_THROWS_AS(parse_cli({"train", "--input", dir, "--output", "x"}), UsageError);
    std::string text;
    CHECK(run({"--help"}, &text) == 0);
    CHECK(text.find("simulate") != std::string::npos);
    CHECK(run({"simulate", "--nope"}) != 0);
}

TEST_CASE("simulate twice with one seed gives identical trees") {
    auto root = fixtures::scratch_dir("cli-sim");
    auto input = fixtures::config_dir("smoke").string();
    for (const char* name : {"a", "b"}) {
        REQUIRE(run({"simulate", "--input", input, "--output", (root / name).string(), "--seed", "42", "--minutes", "1"}) ==
                0);
    }
    for (const char* f : {"tasks.csv", "summary.csv", "agents.csv", "agents/dc0.csv"}) {
        CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));
    }
}

TEST_CASE("simulate with models: evaluate needs them, training writes them") {
    auto root = fixtures::scratch_dir("cli-models");
    auto input = fixtures::config_dir("smoke").string();
    std::vector<std::string> base{"simulate", "--input", input, "--output", (root / "o").string(), "--models",
                                  (root / "m").string(), "--minutes", "0.5"};
    std::string text;
    CHECK(run(base, &text) == 1);
    CHECK(text.find("dc0") != std::string::npos);
    auto train = base;
    train.push_back("--train");
    CHECK(run(train) == 0);
    CHECK(std::filesystem::exists(root / "m" / "smoke-decentralized" / "dc0" / "state.cbor"));
    CHECK(run(base) == 0);
}

TEST_CASE("envgen and summarize commands") {
    auto root = fixtures::scratch_dir("cli-envgen");
    std::string text;
    CHECK(run({"envgen", "--side", "300", "--servers", "3", "--clusters", "2", "--out", root.string()}, &text) == 0);
    CHECK(std::filesystem::exists(root / "edge_datacenters.xml"));
    CHECK(run({"envgen", "--servers", "3", "--clusters", "5", "--out", root.string()}) != 0);

    auto input = fixtures::config_dir("smoke").string();
    REQUIRE(run({"simulate", "--input", input, "--output", (root / "r1").string(), "--minutes", "0.5"}) == 0);
    REQUIRE(run({"simulate", "--input", input, "--output", (root / "r2").string(), "--minutes", "0.5", "--seed", "1"}) == 0);
    CHECK(run({"summarize", "--input", root.string(), "--output", (root / "agg.csv").string()}) == 0);
    CHECK(std::filesystem::exists(root / "agg.csv"));
    CHECK(run({"summarize", "--input", (root / "r1" / "tasks.csv").string()}, &text) == 0);
    CHECK(text.find("tasks_generated") != std::string::npos);
}
