#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace edgeprice {

/// Event kinds in tie-break priority order: at equal fire times an earlier
/// kind fires first.
enum class EventKind : std::uint8_t {
    TaskGeneration = 0,
    PriceUpdate,
    MobilityEnergyUpdate,
    NetworkUpdate,
    TaskArrivedAtNode,
    ExecutionFinished,
    ResultDelivered,
    SimulationEnd,
};

std::string_view to_string(EventKind kind);

struct Event {
    double fire_time = 0.0;
    std::uint64_t sequence = 0;  // assigned by the queue
    EventKind kind = EventKind::SimulationEnd;
    std::uint64_t subject = 0;   // device, agent, task, ... depending on kind
    std::uint64_t detail = 0;
};

class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Simulation clock for one episode.
class Clock {
public:
    explicit Clock(double episode_length) : episode_length_(episode_length) {}

    double now() const { return now_; }
    double episode_length() const { return episode_length_; }

    /// Throws ContractViolation if time would run backwards.
    void advance_to(double t);

private:
    double now_ = 0.0;
    double episode_length_;
};

/// Priority queue ordered by (fire_time, kind, sequence).
class EventQueue {
public:
    /// Enqueues `event` and returns its sequence number. Scheduling before
    /// `now` is a contract violation.
    std::uint64_t schedule(Event event, double now);

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    Event pop();

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
            if (a.kind != b.kind) return a.kind > b.kind;
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
};

/// Order-sensitive FNV-1a digest of fired events.
class TraceHash {
public:
    void add(const Event& e);
    std::uint64_t value() const { return hash_; }

private:
    void mix(std::uint64_t word);
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace edgeprice
