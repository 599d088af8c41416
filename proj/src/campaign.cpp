#include "edgeprice/campaign.hpp"

#include <charconv>

#include <cstdio>
#include <map>

#include "edgeprice/csv.hpp"

namespace edgeprice {

namespace {

struct EpisodeRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    RunSummary summary;
    std::vector<double> agent_return;
    std::vector<double> agent_mean_price;
};

EpisodeRecord record(std::size_t index, std::uint64_t seed, const EpisodeResult& r) {
    EpisodeRecord e{index, seed, r.summary, {}, {}};
    for (const auto& log : r.agent_logs) {
        double price = 0.0;
        for (const auto& row : log) price += row.price;
        e.agent_return.push_back(log.empty() ? 0.0 : log.back().cumulative);
        e.agent_mean_price.push_back(log.empty() ? 0.0 : price / static_cast<double>(log.size()));
    }
    return e;
}

std::vector<std::string> episodes_header(const RunSummary& example) {
    std::vector<std::string> h{"episode", "seed"};
    for (const auto& [name, value] : example.metrics()) h.push_back(name);
    return h;
}

void write_episodes(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records) {
    CsvWriter out(path, episodes_header(RunSummary{}));
    for (const auto& e : records) {
        std::vector<std::string> row{std::to_string(e.index), std::to_string(e.seed)};
        for (const auto& [name, value] : e.summary.metrics()) row.push_back(format_optional(value));
        out.row(row);
    }
}

void write_progress(const std::filesystem::path& path, const Scenario& scenario,
                    const std::vector<EpisodeRecord>& records) {
    CsvWriter out(path, {"episode", "agent", "episode_return", "mean_price"});
    for (const auto& e : records) {
        double total = 0.0;
        for (std::size_t a = 0; a < e.agent_return.size(); ++a) {
            out.row({std::to_string(e.index), scenario.agents()[a].id, format_number(e.agent_return[a]),
                     format_number(e.agent_mean_price[a])});
            total += e.agent_return[a];
        }
        out.row({std::to_string(e.index), "total", format_number(total), ""});
    }
}

EpisodeOptions episode_options(const CampaignOptions& c, RunMode mode, std::uint64_t seed,
                               const std::filesystem::path& dir, bool tasks) {
    EpisodeOptions o;
    o.mode = mode;
    o.seed = seed;
    o.hyper = c.hyper;
    o.price_preference = c.price_preference;
    o.output_dir = dir;
    o.write_tasks = tasks;
    return o;
}

void report(const CampaignOptions& c, const std::string& what) {
    if (c.progress) c.progress(what);
}

std::vector<EpisodeRecord> train_into(const Scenario& scenario, const CampaignOptions& c,
                                      const std::filesystem::path& root, const std::filesystem::path& model_dir,
                                      std::size_t episodes) {
    auto agents = c.resume ? load_agents(scenario, c.hyper, model_dir, RunMode::Train, c.seed)
                           : create_agents(scenario, c.hyper, c.seed);
    std::vector<EpisodeRecord> records;
    for (std::size_t i = 0; i < episodes; ++i) {
        std::uint64_t seed = training_seed(c.seed, i);
        auto opts = episode_options(c, RunMode::Train, seed, root / episode_dir(i), false);
        EpisodeResult r = run_episode(scenario, opts, agents);
        save_agents(agents, model_dir);
        records.push_back(record(i, seed, r));
        report(c, "train " + episode_dir(i) + " return " + format_number(r.summary.total_return));
        if (c.snapshot_every > 0 && (i + 1) % c.snapshot_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "progress_%03zu.csv", i + 1);
            write_progress(root / "snapshots" / name, scenario, records);
        }
    }
    write_episodes(root / "episodes.csv", records);
    write_progress(root / "progress.csv", scenario, records);
    return records;
}

std::vector<EpisodeRecord> evaluate_into(const Scenario& scenario, const CampaignOptions& c,
                                         const std::filesystem::path& root, const std::filesystem::path& model_dir,
                                         std::size_t episodes) {
    auto trained = load_agents(scenario, c.hyper, model_dir, RunMode::Evaluate, c.seed);
    std::vector<EpisodeRecord> records;
    std::vector<std::filesystem::path> summaries;
    for (std::size_t i = 0; i < episodes; ++i) {
        auto agents = trained;  // evaluation never changes the models
        std::uint64_t seed = evaluation_seed(c.seed, i);
        auto dir = root / episode_dir(i);
        EpisodeResult r = run_episode(scenario, episode_options(c, RunMode::Evaluate, seed, dir, true), agents);
        records.push_back(record(i, seed, r));
        summaries.push_back(dir / "summary.csv");
        report(c, "evaluate " + episode_dir(i) + " return " + format_number(r.summary.total_return));
    }
    write_episodes(root / "episodes.csv", records);
    write_progress(root / "progress.csv", scenario, records);
    write_aggregate(summaries, root / "aggregate.csv");
    return records;
}

}  // namespace

std::uint64_t training_seed(std::uint64_t master, std::size_t index) {
    return SeedManager(master).derive_seed("episode", index);
}

std::uint64_t evaluation_seed(std::uint64_t master, std::size_t index) {
    return SeedManager(master).derive_seed("evaluation", index);
}

std::string episode_dir(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "episode_%03zu", index);
    return buf;
}

std::string combo_name(double actor_lr, double critic_lr) {
    auto fixed = [](double v) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
        return std::string(buf, res.ptr);
    };
    return "actor-" + fixed(actor_lr) + "_critic-" + fixed(critic_lr);
}

void run_training(const Scenario& scenario, const CampaignOptions& options) {
    train_into(scenario, options, options.output / "train", options.models / options.scenario_name,
               options.train_episodes);
}

void run_evaluation(const Scenario& scenario, const CampaignOptions& options) {
    evaluate_into(scenario, options, options.output / "evaluate", options.models / options.scenario_name,
                  options.eval_episodes);
}

void run_tuning(const Scenario& scenario, const CampaignOptions& options) {
    const auto root = options.output / "tune";
    CsvWriter results(root / "results.csv",
                      {"combo", "actor_lr", "critic_lr", "agent", "mean_return", "half_width", "n"});
    for (double actor_lr : options.actor_lrs) {
        for (double critic_lr : options.critic_lrs) {
            CampaignOptions c = options;
            c.hyper.actor_lr = actor_lr;
            c.hyper.critic_lr = critic_lr;
            const std::string combo = combo_name(actor_lr, critic_lr);
            report(c, "tune " + combo);
            auto model_dir = options.models / "tune" / combo / options.scenario_name;
            train_into(scenario, c, root / combo / "train", model_dir, options.tune_train_episodes);
            auto evals = evaluate_into(scenario, c, root / combo / "evaluate", model_dir, options.tune_eval_episodes);

            const std::size_t agents = scenario.agents().size();
            std::vector<double> totals;
            for (const auto& e : evals) {
                double t = 0.0;
                for (double v : e.agent_return) t += v;
                totals.push_back(t);
            }
            auto emit = [&](const std::string& agent, const std::vector<double>& values) {
                Aggregate a = aggregate(values);
                results.row({combo, format_number(actor_lr), format_number(critic_lr), agent, format_number(a.mean),
                             format_number(a.half_width), std::to_string(a.n)});
            };
            if (!evals.empty()) {
                emit("total", totals);
                for (std::size_t a = 0; a < agents; ++a) {
                    std::vector<double> values;
                    for (const auto& e : evals) values.push_back(e.agent_return[a]);
                    emit(scenario.agents()[a].id, values);
                }
            }
        }
    }
}

}  // namespace edgeprice
