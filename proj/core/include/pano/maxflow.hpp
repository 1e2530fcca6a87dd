#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace pano {

/// Boykov-Kolmogorov augmenting-path max-flow on a graph with two implicit
/// terminals. Built for the grid-shaped graphs of expansion moves: two
/// search trees are grown from the terminals and reused across
/// augmentations.
///
/// Capacities are doubles; a residual capacity counts as saturated only when
/// it is exactly zero, so the bottleneck arc of every augmentation saturates
/// exactly.
class MaxFlow {
public:
    enum class Segment { Source, Sink };

    explicit MaxFlow(int node_count = 0);

    int add_node();
    int node_count() const { return static_cast<int>(nodes_.size()); }

    /// Adds capacity from the source to `node` and from `node` to the sink.
    /// Both must be non-negative. Only their difference is kept; the common
    /// part is counted as flow immediately.
    void add_terminal_weights(int node, double source_cap, double sink_cap);

    /// Adds a pair of directed arcs i->j and j->i.
    void add_edge(int i, int j, double cap_ij, double cap_ji);

    double solve();
    double flow() const { return flow_; }

    /// Segment of a node in the minimum cut. Nodes reachable from neither
    /// tree report Source.
    Segment segment(int node) const;

private:
    static constexpr int kNone = -1;
    static constexpr int kTerminal = -2;
    static constexpr int kOrphan = -3;
    static constexpr int kInfiniteDistance = 1 << 30;

    struct Node {
        int first = -1;
        int parent = kNone;
        int timestamp = 0;
        int distance = 0;
        bool is_sink = false;
        bool active = false;
        double tr_cap = 0.0;
    };

    struct Arc {
        int head = 0;
        int next = -1;
        double r_cap = 0.0;
    };

    static int sister(int a) { return a ^ 1; }

    void set_active(int i);
    int next_active();
    void augment(int middle_arc);
    void process_source_orphan(int i);
    void process_sink_orphan(int i);

    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::deque<int> active_;
    std::deque<int> orphans_;
    double flow_ = 0.0;
    int time_ = 0;
};

}  // namespace pano
