#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgeprice/domain.hpp"
#include "edgeprice/nn.hpp"
#include "edgeprice/rng.hpp"

namespace edgeprice {

struct AgentHyperparams {
    std::size_t replay_capacity = 100000;
    std::size_t batch_size = 64;
    double gamma = 0.95;
    double actor_lr = 5e-4;
    double critic_lr = 5e-4;
    double tau = 0.005;
    std::size_t updates_per_slot = 1;
    double noise_theta = 0.15;
    double noise_sigma = 0.2;
    std::size_t random_steps = 500;
    std::size_t random_episodes = 4;
    double energy_cost = 1e-5;  // per joule
    double slot_length = 5.0;   // seconds
    bool normalize_state = false;
    double reward_scale = 1.0;  // applied to stored transitions only
    int hidden_units = 64;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// (queue length, previous-slot arrival rate).
using Observation = std::array<double, 2>;
inline constexpr int kObservationSize = 2;

struct Transition {
    Observation state{};
    double action = 0.0;  // actor output scale, [-1, 1]
    double reward = 0.0;
    Observation next{};
};

/// Ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 100000);

    void push(const Transition& t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return items_.at(i); }
    /// Insertion order, oldest first.
    std::vector<Transition> ordered() const;
    std::vector<std::size_t> sample(std::size_t batch, RngStream& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> items_;
    std::size_t next_ = 0;
};

/// Mean-reverting noise x += theta (mu - x) + sigma N(0, 1), one step per slot.
class OuNoise {
public:
    OuNoise(double theta = 0.15, double sigma = 0.2, double mu = 0.0) : theta_(theta), sigma_(sigma), mu_(mu) {}

    double sample(RngStream& rng);
    double value() const { return x_; }
    void set_value(double x) { x_ = x; }

private:
    double theta_, sigma_, mu_;
    double x_ = 0.0;
};

/// Revenue minus energy cost of one server over one slot.
double reward_decentralized(double price, double offloaded_mi, const ServerSpec& spec, double energy_cost,
                            double slot_length);

/// Same for a group of `members` servers sharing one price.
double reward_cluster(double price, double offloaded_mi, std::size_t members, const ServerSpec& spec,
                      double energy_cost, double slot_length);

inline double price_from_action(double raw) { return (raw + 1.0) / 2.0; }
inline double action_from_price(double price) { return 2.0 * price - 1.0; }

/// Mean squared error of critic(inputs) against targets; fills gradients
/// when `grads` is non-null.
double critic_loss(const Mlp& critic, const Matrix& inputs, const Matrix& targets, Mlp::Gradients* grads);

/// -mean critic(s, actor(s)); fills the actor's gradients when non-null.
double actor_loss(const Mlp& actor, const Mlp& critic, const Matrix& states, Mlp::Gradients* grads);

class AgentStateError : public std::runtime_error {
public:
    AgentStateError(const std::string& agent, const std::string& what)
        : std::runtime_error("agent '" + agent + "': " + what), agent_(agent) {}
    const std::string& agent() const { return agent_; }

private:
    std::string agent_;
};

enum class ActMode { Explore, Greedy, Random };

class DdpgAgent {
public:
    DdpgAgent(std::string id, const AgentHyperparams& hp, std::uint64_t init_seed);

    const std::string& id() const { return id_; }
    const AgentHyperparams& hyperparams() const { return hp_; }

    /// Fresh noise, replay-sampling and exploration streams for an episode.
    void begin_episode(RngStream noise, RngStream replay, RngStream explore);
    void end_episode() { ++episodes_; }

    /// Whether the slot at `step` of the current episode acts uniformly at
    /// random while training.
    bool random_phase(std::size_t step) const;

    double greedy_price(const Observation& s) const;
    /// Price in [0, 1].
    double act(const Observation& s, ActMode mode);

    void remember(Transition t);
    /// One DDPG step; false when the replay holds fewer than a batch.
    bool update();

    std::size_t episodes_completed() const { return episodes_; }
    std::uint64_t steps() const { return steps_; }
    std::uint64_t updates() const { return updates_; }

    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& target_actor() const { return target_actor_; }
    const Mlp& target_critic() const { return target_critic_; }
    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    const ReplayBuffer& replay() const { return replay_; }
    const OuNoise& noise() const { return noise_; }

    /// Soft-blends both targets toward the online nets.
    void soft_update_targets();

    void save(const std::filesystem::path& file) const;
    /// Throws AgentStateError on a missing, truncated or incompatible file.
    static DdpgAgent load(const std::filesystem::path& file, const std::string& id, const AgentHyperparams& hp);

private:
    std::string id_;
    AgentHyperparams hp_;
    Mlp actor_, critic_, target_actor_, target_critic_;
    Adam actor_opt_, critic_opt_;
    ReplayBuffer replay_;
    OuNoise noise_;
    RngStream noise_rng_, replay_rng_, explore_rng_;
    std::size_t episodes_ = 0;
    std::uint64_t steps_ = 0;
    std::uint64_t updates_ = 0;
};

}  // namespace edgeprice
