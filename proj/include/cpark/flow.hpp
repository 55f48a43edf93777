#ifndef CPARK_FLOW_HPP
#define CPARK_FLOW_HPP

#include <algorithm>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

namespace cpark::flow {

/// Dinic max-flow on integer capacities, with support for edge lower bounds
/// through the usual super-source/super-sink reduction.
class BoundedFlow {
public:
    static constexpr int kInf = std::numeric_limits<int>::max() / 4;

    explicit BoundedFlow(int nodes) : graph_(static_cast<std::size_t>(nodes) + 2), excess_(static_cast<std::size_t>(nodes) + 2, 0) {
        super_source_ = nodes;
        super_sink_ = nodes + 1;
    }

    /// Adds u -> v carrying between lower and upper units; returns an edge handle.
    int add_edge(int u, int v, int lower, int upper) {
        const int id = push(u, v, upper - lower);
        lower_.push_back(lower);
        excess_[static_cast<std::size_t>(v)] += lower;
        excess_[static_cast<std::size_t>(u)] -= lower;
        return id;
    }

    /// Maximum s -> t flow respecting every lower bound, or nullopt when no
    /// feasible flow exists.
    std::optional<long long> max_flow(int s, int t) {
        long long required = 0;
        for (int v = 0; v < super_source_; ++v) {
            const int e = excess_[static_cast<std::size_t>(v)];
            if (e > 0) {
                push(super_source_, v, e);
                required += e;
            } else if (e < 0) {
                push(v, super_sink_, -e);
            }
        }
        const int back = push(t, s, kInf);
        if (dinic(super_source_, super_sink_) != required) return std::nullopt;

        Edge& loop = edge(back);
        const long long base = kInf - loop.cap;
        loop.cap = 0;
        edge(back ^ 1).cap = 0;
        for (int special : {super_source_, super_sink_})
            for (int id : graph_[static_cast<std::size_t>(special)]) {
                edge(id).cap = 0;
                edge(id ^ 1).cap = 0;
            }
        return base + dinic(s, t);
    }

    /// Flow on an edge added with add_edge, including its lower bound.
    int flow_on(int handle) const {
        const std::size_t user = static_cast<std::size_t>(handle / 2);
        return edges_[static_cast<std::size_t>(handle ^ 1)].cap + lower_[user];
    }

private:
    struct Edge {
        int to;
        int cap;
    };

    Edge& edge(int id) { return edges_[static_cast<std::size_t>(id)]; }

    int push(int u, int v, int cap) {
        const int id = static_cast<int>(edges_.size());
        edges_.push_back({v, cap});
        graph_[static_cast<std::size_t>(u)].push_back(id);
        edges_.push_back({u, 0});
        graph_[static_cast<std::size_t>(v)].push_back(id + 1);
        return id;
    }

    long long dinic(int s, int t) {
        long long total = 0;
        const std::size_t n = graph_.size();
        std::vector<int> level(n);
        std::vector<std::size_t> it(n);
        while (true) {
            std::fill(level.begin(), level.end(), -1);
            std::queue<int> q;
            level[static_cast<std::size_t>(s)] = 0;
            q.push(s);
            while (!q.empty()) {
                const int u = q.front();
                q.pop();
                for (int id : graph_[static_cast<std::size_t>(u)]) {
                    const Edge& e = edges_[static_cast<std::size_t>(id)];
                    if (e.cap > 0 && level[static_cast<std::size_t>(e.to)] < 0) {
                        level[static_cast<std::size_t>(e.to)] = level[static_cast<std::size_t>(u)] + 1;
                        q.push(e.to);
                    }
                }
            }
            if (level[static_cast<std::size_t>(t)] < 0) return total;
            std::fill(it.begin(), it.end(), 0);
            while (const int pushed = augment(s, t, kInf, level, it)) total += pushed;
        }
    }

    int augment(int u, int t, int limit, const std::vector<int>& level, std::vector<std::size_t>& it) {
        if (u == t) return limit;
        auto& adj = graph_[static_cast<std::size_t>(u)];
        for (std::size_t& i = it[static_cast<std::size_t>(u)]; i < adj.size(); ++i) {
            const int id = adj[i];
            Edge& e = edges_[static_cast<std::size_t>(id)];
            if (e.cap <= 0 || level[static_cast<std::size_t>(e.to)] != level[static_cast<std::size_t>(u)] + 1) continue;
            const int pushed = augment(e.to, t, std::min(limit, e.cap), level, it);
            if (pushed > 0) {
                e.cap -= pushed;
                edges_[static_cast<std::size_t>(id ^ 1)].cap += pushed;
                return pushed;
            }
        }
        return 0;
    }

    std::vector<std::vector<int>> graph_;
    std::vector<Edge> edges_;
    std::vector<int> lower_;
    std::vector<int> excess_;
    int super_source_ = 0;
    int super_sink_ = 0;
};

}  // namespace cpark::flow

#endif  // CPARK_FLOW_HPP
