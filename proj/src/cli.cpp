#include "edgeprice/cli.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "edgeprice/campaign.hpp"
#include "edgeprice/csv.hpp"

namespace edgeprice {

namespace {

void add_hyperparameters(CLI::App* cmd, CliRequest& r) {
    AgentHyperparams& h = r.hyper;
    cmd->add_option("--replay-size", h.replay_capacity, "Experience replay capacity")->capture_default_str();
    cmd->add_option("--batch-size", h.batch_size, "Mini-batch size")->capture_default_str();
    cmd->add_option("--gamma", h.gamma, "Discount factor")->capture_default_str();
    cmd->add_option("--actor-lr", h.actor_lr, "Actor learning rate")->capture_default_str();
    cmd->add_option("--critic-lr", h.critic_lr, "Critic learning rate")->capture_default_str();
    cmd->add_option("--tau", h.tau, "Target network blend factor")->capture_default_str();
    cmd->add_option("--updates-per-slot", h.updates_per_slot, "Model updates at each slot start")
        ->capture_default_str();
    cmd->add_option("--noise-theta", h.noise_theta, "Exploration noise mean reversion")->capture_default_str();
    cmd->add_option("--noise-sigma", h.noise_sigma, "Exploration noise volatility")->capture_default_str();
    cmd->add_option("--random-steps", h.random_steps, "Uniformly random slots in early episodes")
        ->capture_default_str();
    cmd->add_option("--random-episodes", h.random_episodes, "Episodes that start with random slots")
        ->capture_default_str();
    cmd->add_option("--energy-cost", h.energy_cost, "Energy cost per joule in the reward")->capture_default_str();
    cmd->add_option("--slot-length", h.slot_length, "Price slot length in seconds")->capture_default_str();
    cmd->add_flag("--normalize-state", h.normalize_state, "Scale state features by capacity");
    cmd->add_option("--reward-scale", h.reward_scale, "Reward multiplier for learning only")->capture_default_str();
    cmd->add_option("--hidden-units", h.hidden_units, "Units per hidden layer")->capture_default_str();
    cmd->add_option("--price-preference", r.price_preference, "Device reference price per MI")
        ->capture_default_str();
}

void add_scenario_args(CLI::App* cmd, CliRequest& r, bool models_required) {
    cmd->add_option("--input", r.input, "Folder with the five input files")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--output", r.output, "Output folder")->required();
    auto* m = cmd->add_option("--models", r.models, "Model root folder");
    if (models_required) m->required();
    cmd->add_option("--seed", r.seed, "Master seed")->capture_default_str();
    cmd->add_option("--topology", r.topology, "CENTRALIZED | HYBRID | DECENTRALIZED (overrides the input)");
    cmd->add_option("--scenario", r.scenario, "Scenario name for model folders (default <input>-<topology>)");
    cmd->add_option("--devices", r.devices, "Override edge_devices_count");
    cmd->add_option("--minutes", r.minutes, "Override simulation_time");
    add_hyperparameters(cmd, r);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        out.push_back(parse_number(text.substr(start, end - start)));
        start = end + 1;
    }
    return out;
}

Scenario load_scenario(CliRequest& r) {
    ScenarioConfig config = parse_inputs(r.input);
    if (!r.topology.empty()) {
        auto t = parse_topology(r.topology);
        if (!t) throw std::invalid_argument("unknown topology '" + r.topology + "'");
        config.parameters.orchestration_algorithms = *t;
    }
    if (r.devices > 0) config.parameters.edge_devices_count = r.devices;
    if (r.minutes >= 0.0) config.parameters.simulation_time_min = r.minutes;
    r.hyper.validate();
    if (r.scenario.empty()) {
        auto path = std::filesystem::path(r.input).lexically_normal();
        auto base = path.filename().string();
        if (base.empty()) base = path.parent_path().filename().string();
        r.scenario = base + "-" + lower(to_string(config.parameters.orchestration_algorithms));
    }
    return Scenario(std::move(config));
}

void print_summary(std::ostream& out, const RunSummary& s) {
    for (const auto& [name, value] : s.metrics()) out << name << ',' << format_optional(value) << '\n';
}

void simulate(CliRequest& r, std::ostream& out) {
    Scenario scenario = load_scenario(r);
    EpisodeOptions opts;
    opts.mode = r.mode;
    opts.seed = r.seed;
    opts.hyper = r.hyper;
    opts.price_preference = r.price_preference;
    opts.policy = r.policy;
    opts.fixed_price = r.fixed_price;
    opts.output_dir = r.output;
    bool persist = !r.models.empty() && r.policy == PricingPolicy::Agent;
    std::filesystem::path model_dir = std::filesystem::path(r.models) / r.scenario;
    std::vector<DdpgAgent> agents = persist ? load_agents(scenario, opts.hyper, model_dir, opts.mode, opts.seed)
                                            : create_agents(scenario, opts.hyper, opts.seed);
    EpisodeResult result = run_episode(scenario, opts, agents);
    if (persist && opts.mode == RunMode::Train) save_agents(agents, model_dir);
    print_summary(out, result.summary);
}

void generate(const CliRequest& r, std::ostream& out) {
    r.generator.validate();
    std::filesystem::path path(r.output);
    if (std::filesystem::is_directory(path) || path.extension() != ".xml") path /= kDatacentersFile;
    DatacentersFile file = envgen::generate(r.generator);
    envgen::emit_datacenters_file(file, path);
    out << "wrote " << path.string() << ": " << file.ap_count() << " APs, " << file.server_count() << " servers, "
        << file.links.size() << " links\n";
}

void campaign(CliRequest& r, std::ostream& err) {
    Scenario scenario = load_scenario(r);
    CampaignOptions c;
    c.output = r.output;
    c.models = r.models;
    c.scenario_name = r.scenario;
    c.seed = r.seed;
    c.hyper = r.hyper;
    c.price_preference = r.price_preference;
    c.resume = r.resume;
    c.progress = [&err](const std::string& line) { err << line << '\n'; };
    if (r.command == "tune") {
        if (r.episodes) c.tune_train_episodes = r.episodes;
        if (r.eval_episodes) c.tune_eval_episodes = r.eval_episodes;
        if (!r.lr_grid.empty()) c.actor_lrs = c.critic_lrs = r.lr_grid;
        run_tuning(scenario, c);
    } else if (r.command == "train") {
        if (r.episodes) c.train_episodes = r.episodes;
        run_training(scenario, c);
    } else {
        if (r.episodes) c.eval_episodes = r.episodes;
        run_evaluation(scenario, c);
    }
}

void summarize_runs(const CliRequest& r, std::ostream& out) {
    std::filesystem::path in(r.input);
    if (std::filesystem::is_regular_file(in)) {
        RunSummary s = summarize(read_task_log(in));
        if (r.output.empty()) {
            print_summary(out, s);
        } else {
            write_summary(s, r.output);
        }
        return;
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().filename() == "summary.csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no summary.csv under " + in.string());
    std::filesystem::path target = r.output.empty() ? in / "aggregate.csv" : std::filesystem::path(r.output);
    write_aggregate(files, target);
    out << "aggregated " << files.size() << " runs into " << target.string() << '\n';
}

}  // namespace

CliRequest parse_cli(const std::vector<std::string>& args) {
    CliRequest r;
    CLI::App app{"Edge offloading and resource pricing simulator", "edgeprice"};
    app.require_subcommand(1);

    bool train = false;
    std::string policy = "agent";
    auto* sim = app.add_subcommand("simulate", "Run one episode (evaluation mode unless --train)");
    add_scenario_args(sim, r, false);
    sim->add_flag("--train", train, "Training mode: explore, update and save the agents");
    sim->add_option("--policy", policy, "agent | random | fixed")
        ->check(CLI::IsMember({"agent", "random", "fixed"}))
        ->capture_default_str();
    sim->add_option("--price", r.fixed_price, "Price for --policy fixed")->check(CLI::Range(0.0, 1.0));

    envgen::GenParams& g = r.generator;
    std::string profile = "high";
    auto* gen = app.add_subcommand("envgen", "Generate edge_datacenters.xml");
    gen->add_option("--side", g.side, "Square side in meters")->capture_default_str();
    gen->add_option("--coverage", g.coverage, "AP cell radius in meters")->capture_default_str();
    gen->add_option("--servers", g.server_count, "Edge server count")->capture_default_str();
    gen->add_option("--clusters", g.cluster_count, "Server clusters")->capture_default_str();
    gen->add_option("--twst-weight", g.twst_weight, "Spanning tree weight in [0, 1]")->capture_default_str();
    gen->add_option("--extra-edges", g.extra_edges, "Links added to the tree")->capture_default_str();
    gen->add_option("--w1", g.link_weights[0], "Link adding weight: inverse distance")->capture_default_str();
    gen->add_option("--w2", g.link_weights[1], "Link adding weight: degree product")->capture_default_str();
    gen->add_option("--w3", g.link_weights[2], "Link adding weight: uniform")->capture_default_str();
    gen->add_option("--seed", g.seed, "Seed")->capture_default_str();
    gen->add_option("--man-bandwidth", g.man_bandwidth, "MAN link bandwidth (Mbps)")->capture_default_str();
    gen->add_option("--man-latency", g.man_latency, "MAN link latency (s)")->capture_default_str();
    gen->add_option("--profile", profile, "Server spec: high (few large) | low (many small)")
        ->check(CLI::IsMember({"high", "low"}))
        ->capture_default_str();
    gen->add_option("--out", r.output, "Output file or folder")->required();

    std::string lr_grid;
    auto* tune = app.add_subcommand("tune", "Learning-rate grid: train and evaluate each combination");
    add_scenario_args(tune, r, true);
    tune->add_option("--episodes", r.episodes, "Training episodes per combination (default 10)");
    tune->add_option("--eval-episodes", r.eval_episodes, "Evaluation episodes per combination (default 5)");
    tune->add_option("--lr-grid", lr_grid, "Comma-separated learning rates for both nets");
    auto* train_cmd = app.add_subcommand("train", "Train the agents over many episodes");
    add_scenario_args(train_cmd, r, true);
    train_cmd->add_option("--episodes", r.episodes, "Training episodes (default 100)");
    train_cmd->add_flag("--resume", r.resume, "Continue from saved models");
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate trained agents");
    add_scenario_args(evaluate, r, true);
    evaluate->add_option("--episodes", r.episodes, "Evaluation episodes (default 5)");

    auto* sum = app.add_subcommand("summarize", "Aggregate summary.csv files or summarize a task log");
    sum->add_option("--input", r.input, "Folder searched for summary.csv, or a tasks.csv")
        ->required()
        ->check(CLI::ExistingPath);
    sum->add_option("--output", r.output, "Output CSV (default stdout for task logs)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (!lr_grid.empty()) r.lr_grid = parse_list(lr_grid);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, err;
        int code = app.exit(e, out, err);
        throw UsageError(code, out.str() + err.str());
    } catch (const std::exception& e) {
        throw UsageError(2, std::string("error: ") + e.what() + '\n');
    }

    for (auto* cmd : app.get_subcommands()) r.command = cmd->get_name();
    if (train) r.mode = RunMode::Train;
    if (r.command == "train" || r.command == "tune") r.mode = RunMode::Train;
    if (policy == "random") r.policy = PricingPolicy::UniformRandom;
    if (policy == "fixed") r.policy = PricingPolicy::Fixed;
    if (profile == "low") g.server_spec = ServerSpec{45.0, 95.0, 6, 10000.0, 16000.0, 256000.0};
    return r;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliRequest r;
    try {
        r = parse_cli(args);
    } catch (const UsageError& e) {
        (e.exit_code() == 0 ? out : err) << e.text();
        return e.exit_code();
    }
    try {
        if (r.command == "simulate") {
            simulate(r, out);
        } else if (r.command == "envgen") {
            generate(r, out);
        } else if (r.command == "summarize") {
            summarize_runs(r, out);
        } else {
            campaign(r, err);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace edgeprice
