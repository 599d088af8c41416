#include "edgeprice/events.hpp"

#include <bit>
#include <string>

namespace edgeprice {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::TaskGeneration: return "TaskGeneration";
        case EventKind::PriceUpdate: return "PriceUpdate";
        case EventKind::MobilityEnergyUpdate: return "MobilityEnergyUpdate";
        case EventKind::NetworkUpdate: return "NetworkUpdate";
        case EventKind::TaskArrivedAtNode: return "TaskArrivedAtNode";
        case EventKind::ExecutionFinished: return "ExecutionFinished";
        case EventKind::ResultDelivered: return "ResultDelivered";
        case EventKind::SimulationEnd: return "SimulationEnd";
    }
    return "Unknown";
}

void Clock::advance_to(double t) {
    if (t < now_) {
        throw ContractViolation("clock moved backwards: " + std::to_string(t) + " < " + std::to_string(now_));
    }
    now_ = t;
}

std::uint64_t EventQueue::schedule(Event event, double now) {
    if (!(event.fire_time >= now)) {
        throw ContractViolation("event " + std::string(to_string(event.kind)) + " scheduled into the past: " +
                                std::to_string(event.fire_time) + " < now " + std::to_string(now));
    }
    event.sequence = next_sequence_++;
    heap_.push(event);
    return event.sequence;
}

Event EventQueue::pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
}

void TraceHash::mix(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
        hash_ ^= (word >> (8 * i)) & 0xffu;
        hash_ *= 0x100000001b3ULL;
    }
}

void TraceHash::add(const Event& e) {
    mix(std::bit_cast<std::uint64_t>(e.fire_time));
    mix(static_cast<std::uint64_t>(e.kind));
    mix(e.subject);
    mix(e.detail);
}

}  // namespace edgeprice
