#ifndef FREESPACE_MAXFLOW_HPP
#define FREESPACE_MAXFLOW_HPP

// Max-flow / min-cut by augmenting paths with search-tree reuse
// (Boykov & Kolmogorov). Two search trees grow from the terminals; when they
// touch, the path is augmented, saturated tree edges turn their children into
// orphans, and orphans are re-adopted or freed instead of rebuilding the
// trees from scratch. Suited to sparse grid graphs with short paths.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

namespace freespace {

template <typename Cap>
class BkMaxflow {
 public:
  using NodeId = int;

  enum class Segment { kSource, kSink };

  explicit BkMaxflow(std::size_t node_hint = 0, std::size_t edge_hint = 0) {
    nodes_.reserve(node_hint);
    arcs_.reserve(2 * edge_hint);
  }

  NodeId add_node() {
    nodes_.push_back(Node{});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void add_nodes(std::size_t count) { nodes_.resize(nodes_.size() + count); }

  std::size_t node_count() const { return nodes_.size(); }

  /// Terminal capacities; only their difference enters the graph, the common
  /// part is added to the flow directly.
  void add_tweights(NodeId i, Cap cap_source, Cap cap_sink) {
    Node& n = nodes_[i];
    const Cap delta = n.tr_cap;
    if (delta > 0) {
      cap_source += delta;
    } else {
      cap_sink -= delta;
    }
    flow_ += cap_source < cap_sink ? cap_source : cap_sink;
    n.tr_cap = cap_source - cap_sink;
  }

  /// Directed capacities i->j and j->i.
  void add_edge(NodeId i, NodeId j, Cap cap, Cap rev_cap) {
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back(Arc{j, nodes_[i].first, cap});
    nodes_[i].first = a;
    arcs_.push_back(Arc{i, nodes_[j].first, rev_cap});
    nodes_[j].first = a + 1;
  }

  Cap maxflow() {
    init();
    NodeId current = kNone;
    for (;;) {
      NodeId i = current;
      if (i != kNone) {
        nodes_[i].active = false;
        if (nodes_[i].parent == kNone) i = kNone;
      }
      if (i == kNone) {
        i = next_active();
        if (i == kNone) break;
      }

      const int bridge = grow(i);
      ++time_;
      if (bridge != kNone) {
        nodes_[i].active = true;  // keep i current without re-queueing
        current = i;
        augment(bridge);
        adopt_orphans();
      } else {
        current = kNone;
      }
    }
    return flow_;
  }

  Cap flow() const { return flow_; }

  /// Side of the minimum cut after maxflow(). Nodes in neither tree belong to
  /// the sink side.
  Segment what_segment(NodeId i) const {
    const Node& n = nodes_[i];
    return (n.parent != kNone && !n.is_sink) ? Segment::kSource : Segment::kSink;
  }

 private:
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;
  static constexpr int kInfiniteDist = std::numeric_limits<int>::max();

  struct Arc {
    NodeId head;
    int next;
    Cap r_cap;
  };

  struct Node {
    int first = kNone;
    int parent = kNone;
    // > 0: residual from the source; < 0: residual to the sink.
    Cap tr_cap = 0;
    std::int64_t ts = 0;
    int dist = 0;
    bool is_sink = false;
    bool active = false;
  };

  static int sister(int a) { return a ^ 1; }

  void init() {
    active_.clear();
    orphans_.clear();
    time_ = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      Node& n = nodes_[k];
      n.active = false;
      n.ts = 0;
      if (n.tr_cap > 0) {
        n.is_sink = false;
        n.parent = kTerminal;
        n.dist = 1;
        set_active(static_cast<NodeId>(k));
      } else if (n.tr_cap < 0) {
        n.is_sink = true;
        n.parent = kTerminal;
        n.dist = 1;
        set_active(static_cast<NodeId>(k));
      } else {
        n.parent = kNone;
      }
    }
  }

  void set_active(NodeId i) {
    if (!nodes_[i].active) {
      nodes_[i].active = true;
      active_.push_back(i);
    }
  }

  NodeId next_active() {
    while (!active_.empty()) {
      const NodeId i = active_.front();
      active_.pop_front();
      nodes_[i].active = false;
      if (nodes_[i].parent != kNone) return i;
    }
    return kNone;
  }

  // Expands the tree containing i. Returns an arc from the source tree to
  // the sink tree, or kNone if i's neighborhood is exhausted.
  int grow(NodeId i) {
    Node& ni = nodes_[i];
    if (!ni.is_sink) {
      for (int a = ni.first; a != kNone; a = arcs_[a].next) {
        if (!(arcs_[a].r_cap > 0)) continue;
        const NodeId j = arcs_[a].head;
        Node& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.is_sink = false;
          nj.parent = sister(a);
          nj.ts = ni.ts;
          nj.dist = ni.dist + 1;
          set_active(j);
        } else if (nj.is_sink) {
          return a;
        } else if (nj.ts <= ni.ts && nj.dist > ni.dist) {
          nj.parent = sister(a);
          nj.ts = ni.ts;
          nj.dist = ni.dist + 1;
        }
      }
    } else {
      for (int a = ni.first; a != kNone; a = arcs_[a].next) {
        if (!(arcs_[sister(a)].r_cap > 0)) continue;
        const NodeId j = arcs_[a].head;
        Node& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.is_sink = true;
          nj.parent = sister(a);
          nj.ts = ni.ts;
          nj.dist = ni.dist + 1;
          set_active(j);
        } else if (!nj.is_sink) {
          return sister(a);
        } else if (nj.ts <= ni.ts && nj.dist > ni.dist) {
          nj.parent = sister(a);
          nj.ts = ni.ts;
          nj.dist = ni.dist + 1;
        }
      }
    }
    return kNone;
  }

  void set_orphan_front(NodeId i) {
    nodes_[i].parent = kOrphan;
    orphans_.push_front(i);
  }

  void set_orphan_rear(NodeId i) {
    nodes_[i].parent = kOrphan;
    orphans_.push_back(i);
  }

  void augment(int bridge) {
    // Bottleneck along source branch, bridge, sink branch.
    Cap bottleneck = arcs_[bridge].r_cap;
    NodeId i = arcs_[sister(bridge)].head;
    for (;;) {
      const int a = nodes_[i].parent;
      if (a == kTerminal) break;
      if (arcs_[sister(a)].r_cap < bottleneck) bottleneck = arcs_[sister(a)].r_cap;
      i = arcs_[a].head;
    }
    if (nodes_[i].tr_cap < bottleneck) bottleneck = nodes_[i].tr_cap;

    i = arcs_[bridge].head;
    for (;;) {
      const int a = nodes_[i].parent;
      if (a == kTerminal) break;
      if (arcs_[a].r_cap < bottleneck) bottleneck = arcs_[a].r_cap;
      i = arcs_[a].head;
    }
    if (-nodes_[i].tr_cap < bottleneck) bottleneck = -nodes_[i].tr_cap;

    arcs_[sister(bridge)].r_cap += bottleneck;
    arcs_[bridge].r_cap -= bottleneck;

    i = arcs_[sister(bridge)].head;
    for (;;) {
      const int a = nodes_[i].parent;
      if (a == kTerminal) break;
      arcs_[a].r_cap += bottleneck;
      arcs_[sister(a)].r_cap -= bottleneck;
      if (!(arcs_[sister(a)].r_cap > 0)) set_orphan_front(i);
      i = arcs_[a].head;
    }
    nodes_[i].tr_cap -= bottleneck;
    if (!(nodes_[i].tr_cap > 0)) set_orphan_front(i);

    i = arcs_[bridge].head;
    for (;;) {
      const int a = nodes_[i].parent;
      if (a == kTerminal) break;
      arcs_[sister(a)].r_cap += bottleneck;
      arcs_[a].r_cap -= bottleneck;
      if (!(arcs_[a].r_cap > 0)) set_orphan_front(i);
      i = arcs_[a].head;
    }
    nodes_[i].tr_cap += bottleneck;
    if (!(nodes_[i].tr_cap < 0)) set_orphan_front(i);

    flow_ += bottleneck;
  }

  void adopt_orphans() {
    while (!orphans_.empty()) {
      const NodeId i = orphans_.front();
      orphans_.pop_front();
      process_orphan(i, nodes_[i].is_sink);
    }
  }

  // Residual capacity that lets the orphan i hang below its neighbor via
  // arc a0 (a0 points from i to the neighbor).
  Cap adoption_capacity(int a0, bool sink_tree) const {
    return sink_tree ? arcs_[a0].r_cap : arcs_[sister(a0)].r_cap;
  }

  void process_orphan(NodeId i, bool sink_tree) {
    int best_arc = kNone;
    int best_dist = kInfiniteDist;

    for (int a0 = nodes_[i].first; a0 != kNone; a0 = arcs_[a0].next) {
      if (!(adoption_capacity(a0, sink_tree) > 0)) continue;
      NodeId j = arcs_[a0].head;
      if (nodes_[j].is_sink != sink_tree || nodes_[j].parent == kNone) continue;

      // Walk to the root to check j still hangs from the terminal.
      int d = 0;
      for (;;) {
        Node& nj = nodes_[j];
        if (nj.ts == time_) {
          d += nj.dist;
          break;
        }
        const int a = nj.parent;
        ++d;
        if (a == kTerminal) {
          nj.ts = time_;
          nj.dist = 1;
          break;
        }
        if (a == kOrphan) {
          d = kInfiniteDist;
          break;
        }
        j = arcs_[a].head;
      }
      if (d == kInfiniteDist) continue;
      if (d < best_dist) {
        best_arc = a0;
        best_dist = d;
      }
      for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
        nodes_[j].ts = time_;
        nodes_[j].dist = d--;
      }
    }

    if (best_arc != kNone) {
      nodes_[i].parent = best_arc;
      nodes_[i].ts = time_;
      nodes_[i].dist = best_dist + 1;
      return;
    }

    nodes_[i].parent = kNone;
    for (int a0 = nodes_[i].first; a0 != kNone; a0 = arcs_[a0].next) {
      const NodeId j = arcs_[a0].head;
      Node& nj = nodes_[j];
      if (nj.is_sink != sink_tree || nj.parent == kNone) continue;
      if (adoption_capacity(a0, sink_tree) > 0) set_active(j);
      const int a = nj.parent;
      if (a != kTerminal && a != kOrphan && arcs_[a].head == i) set_orphan_rear(j);
    }
  }

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<NodeId> active_;
  std::deque<NodeId> orphans_;
  Cap flow_ = 0;
  std::int64_t time_ = 0;
};

}  // namespace freespace

#endif  // FREESPACE_MAXFLOW_HPP
