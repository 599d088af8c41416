#include "edgeprice/agents.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace edgeprice {

namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "edgeprice-agent";
constexpr int kVersion = 1;
constexpr double kFinalActorRange = 3e-3;

Matrix state_matrix(const std::vector<Observation>& states) {
    Matrix m(kObservationSize, static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j)
        for (int i = 0; i < kObservationSize; ++i) m(i, static_cast<Eigen::Index>(j)) = states[j][i];
    return m;
}

Matrix with_actions(const Matrix& states, const Matrix& actions) {
    Matrix m(states.rows() + actions.rows(), states.cols());
    m << states, actions;
    return m;
}

}  // namespace

void AgentHyperparams::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("hyperparameter " + what); };
    if (replay_capacity == 0) fail("replay-size must be >= 1");
    if (batch_size == 0) fail("batch-size must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) fail("tau must be in (0, 1]");
    if (!(actor_lr > 0.0)) fail("actor-lr must be > 0");
    if (!(critic_lr > 0.0)) fail("critic-lr must be > 0");
    if (!(noise_theta >= 0.0)) fail("noise-theta must be >= 0");
    if (!(noise_sigma >= 0.0)) fail("noise-sigma must be >= 0");
    if (!(energy_cost >= 0.0)) fail("energy-cost must be >= 0");
    if (!(slot_length > 0.0)) fail("slot-length must be > 0");
    if (!(reward_scale > 0.0)) fail("reward-scale must be > 0");
    if (hidden_units < 1) fail("hidden units must be >= 1");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
    if (items_.size() < capacity_) {
        items_.push_back(t);
    } else {
        items_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::ordered() const {
    if (items_.size() < capacity_) return items_;
    std::vector<Transition> out(items_.begin() + static_cast<std::ptrdiff_t>(next_), items_.end());
    out.insert(out.end(), items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(next_));
    return out;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t batch, RngStream& rng) const {
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(items_.size()));
    return idx;
}

double OuNoise::sample(RngStream& rng) {
    x_ += theta_ * (mu_ - x_) + sigma_ * rng.normal();
    return x_;
}

double reward_decentralized(double price, double offloaded_mi, const ServerSpec& spec, double energy_cost,
                            double slot_length) {
    return reward_cluster(price, offloaded_mi, 1, spec, energy_cost, slot_length);
}

double reward_cluster(double price, double offloaded_mi, std::size_t members, const ServerSpec& spec,
                      double energy_cost, double slot_length) {
    double fixed = static_cast<double>(members) * slot_length * spec.idle_power;
    double dynamic = (spec.max_power - spec.idle_power) * offloaded_mi / spec.total_mips();
    return price * offloaded_mi - energy_cost * (fixed + dynamic);
}

double critic_loss(const Mlp& critic, const Matrix& inputs, const Matrix& targets, Mlp::Gradients* grads) {
    Mlp::Cache cache;
    Matrix q = critic.forward(inputs, cache);
    Matrix diff = q - targets;
    const double n = static_cast<double>(inputs.cols());
    if (grads) *grads = critic.backward(cache, 2.0 * diff / n);
    return diff.squaredNorm() / n;
}

double actor_loss(const Mlp& actor, const Mlp& critic, const Matrix& states, Mlp::Gradients* grads) {
    Mlp::Cache actor_cache, critic_cache;
    Matrix actions = actor.forward(states, actor_cache);
    Matrix q = critic.forward(with_actions(states, actions), critic_cache);
    const double n = static_cast<double>(states.cols());
    if (grads) {
        Matrix seed = Matrix::Constant(1, states.cols(), -1.0 / n);
        Mlp::Gradients cg = critic.backward(critic_cache, seed);
        Matrix d_action = cg.input.bottomRows(actions.rows());
        *grads = actor.backward(actor_cache, d_action);
    }
    return -q.sum() / n;
}

DdpgAgent::DdpgAgent(std::string id, const AgentHyperparams& hp, std::uint64_t init_seed)
    : id_(std::move(id)), hp_(hp), replay_(hp.replay_capacity), noise_(hp.noise_theta, hp.noise_sigma) {
    hp_.validate();
    RngStream init(init_seed);
    const int h = hp_.hidden_units;
    actor_ = Mlp({kObservationSize, h, h, 1}, OutputActivation::Tanh, init, kFinalActorRange);
    critic_ = Mlp({kObservationSize + 1, h, h, 1}, OutputActivation::Linear, init);
    target_actor_ = actor_;
    target_critic_ = critic_;
    actor_opt_ = Adam(actor_, hp_.actor_lr);
    critic_opt_ = Adam(critic_, hp_.critic_lr);
}

void DdpgAgent::begin_episode(RngStream noise, RngStream replay, RngStream explore) {
    noise_rng_ = noise;
    replay_rng_ = replay;
    explore_rng_ = explore;
}

bool DdpgAgent::random_phase(std::size_t step) const {
    if (episodes_ < hp_.random_episodes) return step < hp_.random_steps;
    return step == 0;
}

double DdpgAgent::greedy_price(const Observation& s) const {
    Matrix x = state_matrix({s});
    return price_from_action(actor_.forward(x)(0, 0));
}

double DdpgAgent::act(const Observation& s, ActMode mode) {
    ++steps_;
    switch (mode) {
        case ActMode::Random: return explore_rng_.uniform01();
        case ActMode::Greedy: return greedy_price(s);
        case ActMode::Explore: return std::clamp(greedy_price(s) + noise_.sample(noise_rng_), 0.0, 1.0);
    }
    return 0.0;
}

void DdpgAgent::remember(Transition t) {
    t.reward *= hp_.reward_scale;
    replay_.push(t);
}

bool DdpgAgent::update() {
    if (replay_.size() < hp_.batch_size) return false;
    auto idx = replay_.sample(hp_.batch_size, replay_rng_);
    const auto b = static_cast<Eigen::Index>(idx.size());
    Matrix s(kObservationSize, b), s2(kObservationSize, b), a(1, b), r(1, b);
    for (Eigen::Index j = 0; j < b; ++j) {
        const Transition& t = replay_.at(idx[static_cast<std::size_t>(j)]);
        for (int i = 0; i < kObservationSize; ++i) {
            s(i, j) = t.state[i];
            s2(i, j) = t.next[i];
        }
        a(0, j) = t.action;
        r(0, j) = t.reward;
    }

    Matrix next_q = target_critic_.forward(with_actions(s2, target_actor_.forward(s2)));
    Matrix y = r + hp_.gamma * next_q;
    Mlp::Gradients cg;
    critic_loss(critic_, with_actions(s, a), y, &cg);
    critic_opt_.step(critic_, cg);

    Mlp::Gradients ag;
    actor_loss(actor_, critic_, s, &ag);
    actor_opt_.step(actor_, ag);

    soft_update_targets();
    ++updates_;
    return true;
}

void DdpgAgent::soft_update_targets() {
    target_actor_.soft_update(actor_, hp_.tau);
    target_critic_.soft_update(critic_, hp_.tau);
}

namespace {

json net_to_json(const Mlp& net) {
    return json{{"sizes", net.sizes()},
                {"output", net.output_activation() == OutputActivation::Tanh ? "tanh" : "linear"},
                {"params", net.flat()}};
}

void net_from_json(Mlp& net, const json& j) {
    if (j.at("sizes").get<std::vector<int>>() != net.sizes()) throw std::invalid_argument("network shape mismatch");
    net.set_flat(j.at("params").get<std::vector<double>>());
}

json adam_to_json(const Adam& opt) {
    return json{{"steps", opt.steps()}, {"m", opt.first_moment()}, {"v", opt.second_moment()}};
}

void adam_from_json(Adam& opt, const json& j) {
    opt.restore(j.at("steps").get<long>(), j.at("m").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
}

}  // namespace

void DdpgAgent::save(const std::filesystem::path& file) const {
    std::vector<double> states, actions, rewards, nexts;
    for (const auto& t : replay_.ordered()) {
        states.insert(states.end(), t.state.begin(), t.state.end());
        nexts.insert(nexts.end(), t.next.begin(), t.next.end());
        actions.push_back(t.action);
        rewards.push_back(t.reward);
    }
    json j{{"format", kFormat},
           {"version", kVersion},
           {"agent", id_},
           {"actor", net_to_json(actor_)},
           {"critic", net_to_json(critic_)},
           {"target_actor", net_to_json(target_actor_)},
           {"target_critic", net_to_json(target_critic_)},
           {"actor_optimizer", adam_to_json(actor_opt_)},
           {"critic_optimizer", adam_to_json(critic_opt_)},
           {"replay", {{"states", states}, {"actions", actions}, {"rewards", rewards}, {"next_states", nexts}}},
           {"noise", noise_.value()},
           {"episodes", episodes_},
           {"steps", steps_},
           {"updates", updates_}};
    std::vector<std::uint8_t> bytes = json::to_cbor(j);
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw AgentStateError(id_, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw AgentStateError(id_, "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, file);
}

DdpgAgent DdpgAgent::load(const std::filesystem::path& file, const std::string& id, const AgentHyperparams& hp) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw AgentStateError(id, "missing model file " + file.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::from_cbor(bytes);
    } catch (const json::exception& e) {
        throw AgentStateError(id, "corrupt model file " + file.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormat) throw std::invalid_argument("not an agent state file");
        if (j.at("version").get<int>() != kVersion) {
            throw std::invalid_argument("unsupported version " + j.at("version").dump());
        }
        DdpgAgent agent(id, hp, 0);
        net_from_json(agent.actor_, j.at("actor"));
        net_from_json(agent.critic_, j.at("critic"));
        net_from_json(agent.target_actor_, j.at("target_actor"));
        net_from_json(agent.target_critic_, j.at("target_critic"));
        adam_from_json(agent.actor_opt_, j.at("actor_optimizer"));
        adam_from_json(agent.critic_opt_, j.at("critic_optimizer"));
        const json& r = j.at("replay");
        auto states = r.at("states").get<std::vector<double>>();
        auto nexts = r.at("next_states").get<std::vector<double>>();
        auto actions = r.at("actions").get<std::vector<double>>();
        auto rewards = r.at("rewards").get<std::vector<double>>();
        const std::size_t n = actions.size();
        if (rewards.size() != n || states.size() != n * kObservationSize || nexts.size() != n * kObservationSize) {
            throw std::invalid_argument("inconsistent replay arrays");
        }
        for (std::size_t i = 0; i < n; ++i) {
            Transition t;
            for (int k = 0; k < kObservationSize; ++k) {
                t.state[k] = states[i * kObservationSize + k];
                t.next[k] = nexts[i * kObservationSize + k];
            }
            t.action = actions[i];
            t.reward = rewards[i];
            agent.replay_.push(t);  // already scaled when first stored
        }
        agent.noise_.set_value(j.at("noise").get<double>());
        agent.episodes_ = j.at("episodes").get<std::size_t>();
        agent.steps_ = j.at("steps").get<std::uint64_t>();
        agent.updates_ = j.at("updates").get<std::uint64_t>();
        return agent;
    } catch (const json::exception& e) {
        throw AgentStateError(id, "corrupt model file " + file.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw AgentStateError(id, "incompatible model file " + file.string() + ": " + e.what());
    }
}

}  // namespace edgeprice
