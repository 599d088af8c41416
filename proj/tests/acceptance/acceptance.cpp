// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <iomanip>
#include <numeric>
#include <set>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "edgeprice/campaign.hpp"
#include "edgeprice/cli.hpp"
#include "edgeprice/envgen.hpp"
#include "edgeprice/simulation.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace edgeprice;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << std::fixed
              << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::endl;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Relative path -> contents for every file under `root`.
std::map<std::string, std::string> tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());
    }
    return files;
}

Outcome determinism() {
    auto root = fixtures::scratch_dir("accept-determinism");
    auto input = fixtures::config_dir("desk").string();
    double slowest = 0.0;
    for (const char* run : {"a", "b"}) {
        std::ostringstream out, err;
        auto start = std::chrono::steady_clock::now();
        int code = run_cli({"simulate", "--input", input, "--output", (root / run).string(), "--seed", "42"}, out, err);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        if (code != 0) return {false, "simulate failed: " + err.str()};
    }
    auto a = tree(root / "a");
    auto b = tree(root / "b");
    bool same = a == b && !a.empty();
    return {same && slowest < 60.0, std::to_string(a.size()) + " files " + (same ? "byte-identical" : "DIFFER") +
                                        ", slowest run " + fmt(slowest) + " s (limit 60 s)"};
}

Outcome slot_count() {
    auto c = fixtures::make_config({.servers = 3, .clusters = 2, .devices = 3, .minutes = 60});
    std::string detail;
    bool ok = true;
    for (auto t : {Topology::Decentralized, Topology::Hybrid, Topology::Centralized}) {
        c.parameters.orchestration_algorithms = t;
        Scenario s(c);
        auto agents = create_agents(s, {}, 1);
        auto r = run_episode(s, EpisodeOptions{}, agents);
        for (auto n : r.price_updates) ok = ok && n == 720;
        detail += to_string(t) + " " + std::to_string(r.price_updates.size()) + " agents x " +
                  std::to_string(r.price_updates.front()) + "; ";
    }
    return {ok, detail + "expected 720 per agent"};
}

Outcome ap_placement() {
    auto n = envgen::place_aps(1100, 45).size();
    return {n >= 222 && n <= 272, std::to_string(n) + " APs (band [222, 272])"};
}

Outcome reward_oracle() {
    auto input = fixtures::config_dir("desk");
    double worst = 0.0;
    std::size_t slots = 0;
    for (auto t : {Topology::Decentralized, Topology::Hybrid, Topology::Centralized}) {
        auto config = parse_inputs(input);
        config.parameters.orchestration_algorithms = t;
        Scenario s(config);
        auto dir = fixtures::scratch_dir("accept-reward");
        EpisodeOptions opts;
        opts.seed = 42;
        opts.output_dir = dir;
        auto agents = create_agents(s, {}, 42);
        run_episode(s, opts, agents);
        auto [w, n] = oracles::reward_check(dir);
        worst = std::max(worst, w);
        slots += n;
    }
    return {worst < 1e-9 && slots > 0, std::to_string(slots) + " agent-slots, max |delta| " + fmt(worst) + " (limit 1e-9)"};
}

Outcome decision_oracle() {
    RngStream rng(2024);
    Task task;
    task.max_delay = 0.5;
    auto quote = [&](bool local) {
        DestinationQuote q{rng.uniform(0.01, 2.0), rng.uniform(0.0, 2.0), 0.0};
        if (!local) q.price = std::floor(rng.uniform(0, 5)) / 4.0;
        if (rng.uniform01() < 0.1) q.delay = 0.5;  // provoke exact ties
        return q;
    };
    std::size_t mismatches = 0;
    const int n = 10000;
    for (int topology = 0; topology < 3; ++topology) {
        for (int i = 0; i < n; ++i) {
            auto w = generate_weights(rng);
            if (rng.uniform01() < 0.05) w = {1.0, 0.0, 0.0};
            double budget = rng.uniform01() < 0.1 ? std::numeric_limits<double>::infinity() : rng.uniform(0.5, 2.5);
            auto local = quote(true);
            std::vector<DestinationQuote> remote;
            std::size_t count = 1 + rng.below(6);
            for (std::size_t j = 0; j < count; ++j) remote.push_back(quote(false));
            OffloadDecision d;
            long want;
            if (topology == 0) {
                d = decide_decentralized(task, w, budget, local, remote);
                want = oracles::enumerate_flat(0.5, w, budget, local, remote, kDefaultPricePreference);
            } else if (topology == 1) {
                d = decide_hybrid(task, w, budget, local, remote);
                want = oracles::enumerate_flat(0.5, w, budget, local, remote, kDefaultPricePreference);
            } else {
                d = decide_centralized(task, w, budget, local, remote);
                want = oracles::enumerate_centralized(0.5, w, budget, local, remote, kDefaultPricePreference);
            }
            long got = d.destination ? static_cast<long>(*d.destination) : -1;
            mismatches += got != want;
        }
    }
    return {mismatches == 0, "3 x " + std::to_string(n) + " instances, " + std::to_string(mismatches) + " mismatches"};
}

Outcome gradient_check() {
    RngStream rng(77);
    auto batch = [&](int rows, int cols, double scale) {
        Matrix m(rows, cols);
        for (int c = 0; c < cols; ++c) {
            for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-scale, scale);
        }
        return m;
    };
    gradcheck::Report total;
    auto merge = [&](const gradcheck::Report& r) {
        total.worst = std::max(total.worst, r.worst);
        total.checked += r.checked;
        total.skipped += r.skipped;
    };
    for (int net = 0; net < 3; ++net) {
        Mlp actor({2, 64, 64, 1}, OutputActivation::Tanh, rng, 3e-3);
        Mlp critic({3, 64, 64, 1}, OutputActivation::Linear, rng);
        for (int b = 0; b < 3; ++b) {
            Matrix states = batch(2, 16, 3.0);
            Matrix inputs = batch(3, 16, 3.0);
            Matrix targets = batch(1, 16, 3.0);
            Mlp::Gradients cg, ag;
            critic_loss(critic, inputs, targets, &cg);
            merge(gradcheck::check(
                critic, gradcheck::flatten(cg), [&] { return critic_loss(critic, inputs, targets, nullptr); },
                [&] { return gradcheck::relu_pattern(critic, inputs); }));
            actor_loss(actor, critic, states, &ag);
            merge(gradcheck::check(
                actor, gradcheck::flatten(ag), [&] { return actor_loss(actor, critic, states, nullptr); },
                [&] {
                    auto p = gradcheck::relu_pattern(actor, states);
                    auto q = gradcheck::relu_pattern(critic, gradcheck::actor_critic_input(actor, states));
                    p.insert(p.end(), q.begin(), q.end());
                    return p;
                }));
        }
    }
    return {total.worst < 1e-4 && total.checked > 0,
            "3 nets x 3 batches, actor and critic, " + std::to_string(total.checked) + " coordinates (" +
                std::to_string(total.skipped) + " on ReLU kinks skipped), max relative error " + fmt(total.worst) +
                " (limit 1e-4)"};
}

Outcome soft_update() {
    RngStream rng(5);
    Mlp online({2, 64, 64, 1}, OutputActivation::Tanh, rng, 3e-3);
    Mlp target({2, 64, 64, 1}, OutputActivation::Tanh, rng, 3e-3);
    const double tau = 0.005;
    auto o = online.flat();
    auto t0 = target.flat();
    double worst = 0.0;
    for (int k = 1; k <= 100; ++k) {
        target.soft_update(online, tau);
        auto t = target.flat();
        double factor = std::pow(1 - tau, k);
        for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs((t[i] - o[i]) - factor * (t0[i] - o[i])));
    }
    return {worst < 1e-9, "k = 100, tau = 0.005, max deviation from (1-tau)^k " + fmt(worst) + " (limit 1e-9)"};
}

Outcome samplers() {
    RngStream rng(11);
    auto app = fixtures::standard_application();
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_task(app, 0, 0.0, i, rng).length_mi;
    double mean = sum / n;
    bool length_ok = std::abs(mean - 2000.0) <= 3 * 2000.0 / std::sqrt(n);

    auto arrivals = poisson_arrivals(1.0, 3600.0, rng).size();
    bool poisson_ok = std::abs(static_cast<double>(arrivals) - 3600.0) <= 3 * 60.0;

    bool exact = true;
    double means[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
        auto w = generate_weights(rng);
        exact = exact && w.delay + w.energy + w.price == 1.0 && w.delay >= 0 && w.energy >= 0 && w.price >= 0;
        means[0] += w.delay / n;
        means[1] += w.energy / n;
        means[2] += w.price / n;
    }
    bool moments = true;
    for (double m : means) moments = moments && std::abs(m - 1.0 / 3.0) <= 0.01;
    return {length_ok && poisson_ok && exact && moments,
            "length mean " + fmt(mean) + " (2000 +- 19), arrivals " + std::to_string(arrivals) +
                " (3600 +- 180), simplex sums exact: " + (exact ? "yes" : "no") + ", component means " +
                fmt(means[0]) + "/" + fmt(means[1]) + "/" + fmt(means[2])};
}

Outcome conservation() {
    RngStream rng(99);
    std::size_t total = 0;
    for (int i = 0; i < 20; ++i) {
        fixtures::ScenarioShape shape;
        shape.servers = 1 + rng.below(6);
        shape.clusters = 1 + rng.below(shape.servers);
        shape.devices = 1 + rng.below(40);
        shape.minutes = rng.uniform(0.2, 3.0);
        shape.side = rng.uniform(100, 400);
        shape.topology = static_cast<Topology>(rng.below(3));
        shape.layout_seed = rng.next();
        shape.extra_edges = rng.below(4);
        auto c = fixtures::make_config(shape);
        if (c.datacenters.ap_count() < shape.servers) continue;
        if (rng.uniform01() < 0.3) {
            for (auto& d : c.device_types) d.battery_capacity_wh = rng.uniform(0.001, 0.05);
        }
        c.applications[0].latency_constraint = rng.uniform(0.1, 2.0);
        c.applications[0].poisson_rate = rng.uniform(0.2, 3.0);
        Scenario s(c);
        EpisodeOptions opts;
        opts.seed = rng.next();
        opts.policy = static_cast<PricingPolicy>(rng.below(3));
        opts.fixed_price = rng.uniform01();
        opts.price_preference = rng.uniform(0.01, 2.0);
        opts.mode = rng.uniform01() < 0.5 ? RunMode::Train : RunMode::Evaluate;
        opts.hyper.batch_size = 8;
        opts.hyper.hidden_units = 16;
        auto agents = create_agents(s, opts.hyper, opts.seed);
        auto r = run_episode(s, opts, agents);
        auto check = summarize(r.tasks, r.summary.generated);
        std::size_t accounted =
            check.local_success + check.local_failed + check.edge_success + check.edge_failed + check.unfinished;
        if (accounted != r.summary.generated) {
            return {false, "config " + std::to_string(i) + ": " + std::to_string(r.summary.generated) +
                               " generated vs " + std::to_string(accounted) + " accounted"};
        }
        total += r.summary.generated;
    }
    return {true, "20 fuzzed configs, " + std::to_string(total) + " tasks, generated = finished + unfinished in each"};
}

Outcome envgen_reductions() {
    RngStream rng(31);
    double worst_mst = 0.0, worst_btw = 0.0;
    std::size_t cluster_mismatch = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 3 + rng.below(40);
        std::vector<Location> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(0, 1000), rng.uniform(0, 1000)});
        auto tree = envgen::build_twst(pts, 1.0);
        double len = 0.0;
        for (auto [a, b] : tree) len += distance(pts[a], pts[b]);
        worst_mst = std::max(worst_mst, std::abs(len - oracles::kruskal_length(pts)));

        std::size_t m = 3 + rng.below(10);
        std::vector<Location> small(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(std::min(m, n)));
        m = small.size();
        auto edges = envgen::add_links(small, envgen::build_twst(small, rng.uniform01()), {1, 1, 1}, rng.below(m), rng);
        auto fast = envgen::betweenness(m, edges);
        auto slow = oracles::brute_betweenness(m, edges);
        for (std::size_t v = 0; v < m; ++v) worst_btw = std::max(worst_btw, std::abs(fast[v] - slow[v]));

        std::vector<std::size_t> hosts(m);
        std::iota(hosts.begin(), hosts.end(), 0);
        auto dist = envgen::server_distances(small, edges, hosts);
        std::size_t k = 1 + rng.below(m);
        std::set<std::set<std::size_t>> got;
        for (const auto& g : envgen::average_linkage(dist, k)) got.insert(std::set<std::size_t>(g.begin(), g.end()));
        cluster_mismatch += got != oracles::lance_williams(dist, k);
    }
    bool ok = worst_mst < 1e-9 && worst_btw < 1e-9 && cluster_mismatch == 0;
    return {ok, "50 instances: MST length max |delta| " + fmt(worst_mst) + ", betweenness max |delta| " +
                    fmt(worst_btw) + ", clustering mismatches " + std::to_string(cluster_mismatch)};
}

Outcome price_monotonicity() {
    RngStream rng(17);
    Task task;
    task.max_delay = 0.5;
    std::size_t flips = 0, checked = 0;
    while (checked < 1000) {
        auto w = generate_weights(rng);
        if (!(w.price > 0.0)) continue;
        DestinationQuote local{rng.uniform(0.01, 2), rng.uniform(0, 1), 0};
        std::vector<DestinationQuote> servers;
        for (int j = 0; j < 5; ++j) servers.push_back({rng.uniform(0.01, 2), rng.uniform(0, 1), rng.uniform01() * 0.02});
        std::size_t j = rng.below(5);
        int topology = static_cast<int>(checked % 3);
        auto decide = [&](const std::vector<DestinationQuote>& q) {
            if (topology == 2) return decide_centralized(task, w, 1.5, local, q).destination;
            if (topology == 1) return decide_hybrid(task, w, 1.5, local, q).destination;
            return decide_decentralized(task, w, 1.5, local, q).destination;
        };
        auto before = decide(servers);
        servers[j].price += rng.uniform(1e-4, 0.05);
        auto after = decide(servers);
        flips += before != std::optional<std::size_t>(j) && after == std::optional<std::size_t>(j);
        ++checked;
    }
    return {flips == 0, std::to_string(checked) + " instances, " + std::to_string(flips) + " flips toward the raised price"};
}

Outcome learning_smoke() {
    Scenario s(parse_inputs(fixtures::config_dir("smoke")));
    if (s.agents().size() != 1 || s.config().parameters.edge_devices_count != 20 ||
        s.topology() != Topology::Decentralized) {
        return {false, "smoke config is not 1 server / 20 devices / decentralized"};
    }
    auto root = fixtures::scratch_dir("accept-learning");
    CampaignOptions c;
    c.output = root / "out";
    c.models = root / "models";
    c.scenario_name = "smoke";
    c.seed = 2024;
    c.train_episodes = 20;
    c.eval_episodes = 5;
    run_training(s, c);
    run_evaluation(s, c);

    auto evaluation = CsvTable::read(c.output / "evaluate" / "episodes.csv");
    double trained = 0.0;
    for (std::size_t r = 0; r < evaluation.rows.size(); ++r) trained += evaluation.number(r, "total_return");
    trained /= static_cast<double>(evaluation.rows.size());

    double baseline = 0.0;
    for (std::size_t i = 0; i < c.eval_episodes; ++i) {
        EpisodeOptions opts;
        opts.seed = evaluation_seed(c.seed, i);
        opts.policy = PricingPolicy::UniformRandom;
        auto agents = create_agents(s, c.hyper, c.seed);
        baseline += run_episode(s, opts, agents).summary.total_return;
    }
    baseline /= static_cast<double>(c.eval_episodes);
    return {trained >= baseline && evaluation.rows.size() == 5,
            "mean evaluation return trained " + fmt(trained) + " vs uniform-random " + fmt(baseline) + " over 5 seeds"};
}

}  // namespace

int main() {
    criterion("determinism (desk config, seed 42, two runs)", determinism);
    criterion("slot count (60 min, 5 s slots)", slot_count);
    criterion("AP placement (side 1100, coverage 45)", ap_placement);
    criterion("reward oracle (desk run, every agent and slot)", reward_oracle);
    criterion("decision oracle (brute-force argmin per topology)", decision_oracle);
    criterion("gradient check (central differences, h = 1e-5)", gradient_check);
    criterion("soft-update decay", soft_update);
    criterion("samplers", samplers);
    criterion("conservation (fuzzed configs)", conservation);
    criterion("envgen reductions (MST, betweenness, clustering)", envgen_reductions);
    criterion("price monotonicity", price_monotonicity);
    criterion("learning smoke test (1 server, 20 devices)", learning_smoke);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
