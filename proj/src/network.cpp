#include "edgeprice/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace edgeprice {

namespace {

constexpr double kLatencyEps = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

VertexId ManGraph::add_vertex(Vertex v) {
    vertices_.push_back(std::move(v));
    adjacency_.emplace_back();
    fields_.clear();
    return vertices_.size() - 1;
}

LinkId ManGraph::add_link(VertexId a, VertexId b, double bandwidth_mbps, double latency) {
    if (a >= vertices_.size() || b >= vertices_.size() || a == b) {
        throw std::invalid_argument("link endpoints invalid");
    }
    if (!(bandwidth_mbps > 0.0) || !(latency >= 0.0)) {
        throw std::invalid_argument("link between '" + vertices_[a].name + "' and '" + vertices_[b].name +
                                    "' needs bandwidth > 0 and latency >= 0");
    }
    links_.push_back(Link{a, b, bandwidth_mbps, latency, {}});
    LinkId id = links_.size() - 1;
    adjacency_[a].emplace_back(b, id);
    adjacency_[b].emplace_back(a, id);
    for (auto& adj : {std::ref(adjacency_[a]), std::ref(adjacency_[b])}) {
        std::sort(adj.get().begin(), adj.get().end());
    }
    fields_.clear();
    return id;
}

bool ManGraph::is_connected() const {
    if (vertices_.empty()) return true;
    std::vector<bool> seen(vertices_.size(), false);
    std::vector<VertexId> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        VertexId u = stack.back();
        stack.pop_back();
        for (auto [v, l] : adjacency_[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == vertices_.size();
}

const ManGraph::DistanceField& ManGraph::field_to(VertexId dst) const {
    if (auto it = fields_.find(dst); it != fields_.end()) return it->second;

    DistanceField f;
    f.latency.assign(vertices_.size(), kInf);
    f.hops.assign(vertices_.size(), std::numeric_limits<std::size_t>::max());
    using Item = std::tuple<double, std::size_t, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    f.latency[dst] = 0.0;
    f.hops[dst] = 0;
    pq.emplace(0.0, 0, dst);
    while (!pq.empty()) {
        auto [d, h, u] = pq.top();
        pq.pop();
        if (d > f.latency[u] || (d == f.latency[u] && h > f.hops[u])) continue;
        for (auto [v, l] : adjacency_[u]) {
            double nd = d + links_[l].latency;
            std::size_t nh = h + 1;
            bool better = nd < f.latency[v] - kLatencyEps ||
                          (std::abs(nd - f.latency[v]) <= kLatencyEps && nh < f.hops[v]);
            if (better) {
                f.latency[v] = nd;
                f.hops[v] = nh;
                pq.emplace(nd, nh, v);
            }
        }
    }
    return fields_.emplace(dst, std::move(f)).first->second;
}

Route ManGraph::route(VertexId src, VertexId dst) const {
    Route r;
    r.vertices.push_back(src);
    if (src == dst) return r;
    const DistanceField& f = field_to(dst);
    if (f.latency.at(src) == kInf) {
        throw std::runtime_error("no route from '" + vertices_[src].name + "' to '" + vertices_[dst].name + "'");
    }
    VertexId u = src;
    while (u != dst) {
        // Neighbors are sorted by id, so the first consistent one is the
        // lexicographically smallest continuation.
        std::optional<std::pair<VertexId, LinkId>> next;
        for (auto [v, l] : adjacency_[u]) {
            if (f.hops[v] + 1 != f.hops[u]) continue;
            if (std::abs(f.latency[u] - (links_[l].latency + f.latency[v])) > kLatencyEps) continue;
            if (!next || v < next->first ||
                (v == next->first && links_[l].latency < links_[next->second].latency)) {
                next = std::make_pair(v, l);
            }
        }
        if (!next) throw std::logic_error("route reconstruction failed");
        r.links.push_back(next->second);
        r.vertices.push_back(next->first);
        r.propagation += links_[next->second].latency;
        u = next->first;
    }
    return r;
}

Network::Network(ManGraph graph, double wifi_bandwidth_mbps, double wifi_latency)
    : graph_(std::move(graph)), wifi_bandwidth_(wifi_bandwidth_mbps), wifi_latency_(wifi_latency) {
    if (!(wifi_bandwidth_ > 0.0) || !(wifi_latency_ >= 0.0)) {
        throw std::invalid_argument("Wi-Fi needs bandwidth > 0 and latency >= 0");
    }
    wifi_of_vertex_.resize(graph_.vertex_count());
    for (VertexId v = 0; v < graph_.vertex_count(); ++v) {
        if (graph_.vertex(v).kind == VertexKind::AccessPoint) {
            wifi_of_vertex_[v] = graph_.link_count() + wifi_links_.size();
            wifi_links_.push_back(Link{v, v, wifi_bandwidth_, wifi_latency_, {}});
        }
    }
}

LinkId Network::wifi_link(VertexId ap) const {
    const auto& l = wifi_of_vertex_.at(ap);
    if (!l) throw std::invalid_argument("vertex '" + graph_.vertex(ap).name + "' is not an access point");
    return *l;
}

const Link& Network::link_ref(LinkId l) const {
    if (l < graph_.link_count()) return graph_.links_[l];
    return wifi_links_.at(l - graph_.link_count());
}

Link& Network::link_mut(LinkId l) {
    if (l < graph_.link_count()) return graph_.links_[l];
    return wifi_links_.at(l - graph_.link_count());
}

Route Network::device_route(VertexId ap, VertexId dst) const {
    Route r = graph_.route(ap, dst);
    r.links.insert(r.links.begin(), wifi_link(ap));
    r.propagation += wifi_latency_;
    return r;
}

double Network::device_propagation(VertexId ap, VertexId dst) const {
    const auto& f = graph_.field_to(dst);
    if (f.latency.at(ap) == kInf) throw std::runtime_error("no route to '" + graph_.vertex(dst).name + "'");
    return f.latency[ap] + wifi_latency_;
}

double Network::wifi_rate_estimate(VertexId ap) const {
    std::size_t n = std::max<std::size_t>(1, link_ref(wifi_link(ap)).active.size());
    return wifi_bandwidth_ * kBitsPerMegabit / static_cast<double>(n);
}

double Network::fair_rate(const std::vector<LinkId>& path) const {
    double rate = kInf;
    for (LinkId l : path) {
        const Link& link = link_ref(l);
        std::size_t n = std::max<std::size_t>(1, link.active.size());
        rate = std::min(rate, link.bandwidth_mbps * kBitsPerMegabit / static_cast<double>(n));
    }
    return rate;
}

void Network::attach(Transfer& t) {
    for (LinkId l : t.path) link_mut(l).active.insert(t.id);
}

void Network::detach(const Transfer& t) {
    for (LinkId l : t.path) link_mut(l).active.erase(t.id);
}

bool Network::try_commit(Transfer& t, double now, double tick_end, std::vector<TransferCompletion>& completed) {
    double needed = t.rate == kInf ? 0.0 : t.remaining / t.rate;
    if (t.remaining <= 0.0 || now + needed < tick_end) {
        completed.push_back(TransferCompletion{t.id, t.task, now + needed, t.propagation});
        return true;
    }
    return false;
}

TransferId Network::start(double now, double tick_end, TaskId task, TransferDirection dir, const Route& route,
                          double bits, std::vector<TransferCompletion>& completed) {
    Transfer t;
    t.id = next_id_++;
    t.task = task;
    t.direction = dir;
    t.path = route.links;
    t.total_bits = bits;
    t.remaining = bits;
    t.started = now;
    t.last_update = now;
    t.propagation = route.propagation;
    attach(t);
    t.rate = fair_rate(t.path);
    const TransferId id = t.id;
    if (try_commit(t, now, tick_end, completed)) {
        detach(t);
    } else {
        transfers_.emplace(id, std::move(t));
    }
    return id;
}

std::vector<TransferCompletion> Network::tick(double now, double dt) {
    std::vector<TransferCompletion> completed;
    for (auto& [id, t] : transfers_) {
        t.remaining = std::max(0.0, t.remaining - t.rate * (now - t.last_update));
        t.last_update = now;
    }
    // Rates for the whole tick are fixed before anything is released.
    for (auto& [id, t] : transfers_) t.rate = fair_rate(t.path);
    for (auto it = transfers_.begin(); it != transfers_.end();) {
        if (try_commit(it->second, now, now + dt, completed)) {
            detach(it->second);
            it = transfers_.erase(it);
        } else {
            ++it;
        }
    }
    return completed;
}

bool Network::reroute(TransferId id, double now, double tick_end, const Route& route,
                      std::vector<TransferCompletion>& completed) {
    auto it = transfers_.find(id);
    if (it == transfers_.end()) return false;
    Transfer& t = it->second;
    t.remaining = std::max(0.0, t.remaining - t.rate * (now - t.last_update));
    t.last_update = now;
    detach(t);
    t.path = route.links;
    t.propagation = route.propagation;
    attach(t);
    t.rate = fair_rate(t.path);
    if (try_commit(t, now, tick_end, completed)) {
        detach(t);
        transfers_.erase(it);
    }
    return true;
}

}  // namespace edgeprice
