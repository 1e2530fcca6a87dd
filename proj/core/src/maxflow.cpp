#include "pano/maxflow.hpp"

#include <algorithm>
#include <stdexcept>

namespace pano {

MaxFlow::MaxFlow(int node_count) : nodes_(static_cast<std::size_t>(std::max(node_count, 0))) {}

int MaxFlow::add_node() {
    nodes_.emplace_back();
    return static_cast<int>(nodes_.size()) - 1;
}

void MaxFlow::add_terminal_weights(int node, double source_cap, double sink_cap) {
    if (source_cap < 0.0 || sink_cap < 0.0) throw std::invalid_argument("terminal capacities must be >= 0");
    Node &n = nodes_.at(static_cast<std::size_t>(node));
    const double delta = n.tr_cap;
    if (delta > 0.0) {
        source_cap += delta;
    } else {
        sink_cap -= delta;
    }
    flow_ += std::min(source_cap, sink_cap);
    n.tr_cap = source_cap - sink_cap;
}

void MaxFlow::add_edge(int i, int j, double cap_ij, double cap_ji) {
    if (i == j) throw std::invalid_argument("self loops are not allowed");
    if (cap_ij < 0.0 || cap_ji < 0.0) throw std::invalid_argument("edge capacities must be >= 0");
    Node &ni = nodes_.at(static_cast<std::size_t>(i));
    Node &nj = nodes_.at(static_cast<std::size_t>(j));
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back(Arc{j, ni.first, cap_ij});
    arcs_.push_back(Arc{i, nj.first, cap_ji});
    ni.first = a;
    nj.first = a + 1;
}

void MaxFlow::set_active(int i) {
    if (!nodes_[i].active) {
        nodes_[i].active = true;
        active_.push_back(i);
    }
}

int MaxFlow::next_active() {
    while (!active_.empty()) {
        const int i = active_.front();
        active_.pop_front();
        nodes_[i].active = false;
        if (nodes_[i].parent != kNone) return i;
    }
    return -1;
}

void MaxFlow::augment(int middle) {
    double bottleneck = arcs_[middle].r_cap;

    // Source tree: flow runs from the terminal down to the middle arc's tail.
    int i = arcs_[sister(middle)].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[sister(a)].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, nodes_[i].tr_cap);

    // Sink tree.
    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[a].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

    arcs_[sister(middle)].r_cap += bottleneck;
    arcs_[middle].r_cap -= bottleneck;

    i = arcs_[sister(middle)].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        arcs_[a].r_cap += bottleneck;
        arcs_[sister(a)].r_cap -= bottleneck;
        if (arcs_[sister(a)].r_cap == 0.0) {
            nodes_[i].parent = kOrphan;
            orphans_.push_front(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr_cap -= bottleneck;
    if (nodes_[i].tr_cap == 0.0) {
        nodes_[i].parent = kOrphan;
        orphans_.push_front(i);
    }

    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        arcs_[sister(a)].r_cap += bottleneck;
        arcs_[a].r_cap -= bottleneck;
        if (arcs_[a].r_cap == 0.0) {
            nodes_[i].parent = kOrphan;
            orphans_.push_front(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr_cap += bottleneck;
    if (nodes_[i].tr_cap == 0.0) {
        nodes_[i].parent = kOrphan;
        orphans_.push_front(i);
    }

    flow_ += bottleneck;
}

void MaxFlow::process_source_orphan(int i) {
    int best_arc = kNone;
    int best_dist = kInfiniteDistance;

    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        if (arcs_[sister(a0)].r_cap == 0.0) continue;
        int j = arcs_[a0].head;
        if (nodes_[j].is_sink || nodes_[j].parent == kNone) continue;

        // Walk toward the root to check that j still hangs off the source.
        int d = 0;
        for (;;) {
            if (nodes_[j].timestamp == time_) {
                d += nodes_[j].distance;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].timestamp = time_;
                nodes_[j].distance = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDistance;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfiniteDistance) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs_[a0].head; nodes_[j].timestamp != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].timestamp = time_;
                nodes_[j].distance = d--;
            }
        }
    }

    if (best_arc != kNone) {
        nodes_[i].parent = best_arc;
        nodes_[i].timestamp = time_;
        nodes_[i].distance = best_dist + 1;
        return;
    }

    nodes_[i].parent = kNone;
    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (nodes_[j].is_sink || a == kNone) continue;
        if (arcs_[sister(a0)].r_cap != 0.0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

void MaxFlow::process_sink_orphan(int i) {
    int best_arc = kNone;
    int best_dist = kInfiniteDistance;

    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        if (arcs_[a0].r_cap == 0.0) continue;
        int j = arcs_[a0].head;
        if (!nodes_[j].is_sink || nodes_[j].parent == kNone) continue;

        int d = 0;
        for (;;) {
            if (nodes_[j].timestamp == time_) {
                d += nodes_[j].distance;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].timestamp = time_;
                nodes_[j].distance = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDistance;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfiniteDistance) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs_[a0].head; nodes_[j].timestamp != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].timestamp = time_;
                nodes_[j].distance = d--;
            }
        }
    }

    if (best_arc != kNone) {
        nodes_[i].parent = best_arc;
        nodes_[i].timestamp = time_;
        nodes_[i].distance = best_dist + 1;
        return;
    }

    nodes_[i].parent = kNone;
    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (!nodes_[j].is_sink || a == kNone) continue;
        if (arcs_[a0].r_cap != 0.0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

double MaxFlow::solve() {
    active_.clear();
    orphans_.clear();
    time_ = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        Node &n = nodes_[k];
        n.active = false;
        n.timestamp = 0;
        if (n.tr_cap != 0.0) {
            n.is_sink = n.tr_cap < 0.0;
            n.parent = kTerminal;
            n.distance = 1;
            set_active(static_cast<int>(k));
        } else {
            n.parent = kNone;
            n.is_sink = false;
        }
    }

    int current = -1;
    for (;;) {
        int i = current;
        if (i != -1 && nodes_[i].parent == kNone) i = -1;
        if (i == -1) {
            i = next_active();
            if (i == -1) break;
        }

        int found = kNone;
        if (!nodes_[i].is_sink) {
            for (int a = nodes_[i].first; a != -1; a = arcs_[a].next) {
                if (arcs_[a].r_cap == 0.0) continue;
                const int j = arcs_[a].head;
                if (nodes_[j].parent == kNone) {
                    nodes_[j].is_sink = false;
                    nodes_[j].parent = sister(a);
                    nodes_[j].timestamp = nodes_[i].timestamp;
                    nodes_[j].distance = nodes_[i].distance + 1;
                    set_active(j);
                } else if (nodes_[j].is_sink) {
                    found = a;
                    break;
                } else if (nodes_[j].timestamp <= nodes_[i].timestamp && nodes_[j].distance > nodes_[i].distance) {
                    nodes_[j].parent = sister(a);
                    nodes_[j].timestamp = nodes_[i].timestamp;
                    nodes_[j].distance = nodes_[i].distance + 1;
                }
            }
        } else {
            for (int a = nodes_[i].first; a != -1; a = arcs_[a].next) {
                if (arcs_[sister(a)].r_cap == 0.0) continue;
                const int j = arcs_[a].head;
                if (nodes_[j].parent == kNone) {
                    nodes_[j].is_sink = true;
                    nodes_[j].parent = sister(a);
                    nodes_[j].timestamp = nodes_[i].timestamp;
                    nodes_[j].distance = nodes_[i].distance + 1;
                    set_active(j);
                } else if (!nodes_[j].is_sink) {
                    found = sister(a);
                    break;
                } else if (nodes_[j].timestamp <= nodes_[i].timestamp && nodes_[j].distance > nodes_[i].distance) {
                    nodes_[j].parent = sister(a);
                    nodes_[j].timestamp = nodes_[i].timestamp;
                    nodes_[j].distance = nodes_[i].distance + 1;
                }
            }
        }

        ++time_;
        if (found != kNone) {
            current = i;
            augment(found);
            while (!orphans_.empty()) {
                const int o = orphans_.front();
                orphans_.pop_front();
                if (nodes_[o].is_sink) {
                    process_sink_orphan(o);
                } else {
                    process_source_orphan(o);
                }
            }
        } else {
            current = -1;
        }
    }
    return flow_;
}

MaxFlow::Segment MaxFlow::segment(int node) const {
    const Node &n = nodes_.at(static_cast<std::size_t>(node));
    if (n.parent != kNone && n.is_sink) return Segment::Sink;
    return Segment::Source;
}

}  // namespace pano
