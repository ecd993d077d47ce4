#include "nnext/geometry.hpp"

#include <algorithm>
#include <queue>

namespace nnext {

KdTree2::KdTree2(std::vector<Point2> pts) : pts_(std::move(pts)) {
    if (pts_.empty()) return;
    std::vector<int> idx(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) idx[i] = int(i);
    nodes_.reserve(pts_.size());
    root_ = build(idx, 0, int(pts_.size()), 0);
}

int KdTree2::build(std::vector<int>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 2;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi, [&](int a, int b) {
        const double va = axis == 0 ? pts_[a].x1 : pts_[a].x2;
        const double vb = axis == 0 ? pts_[b].x1 : pts_[b].x2;
        if (va != vb) return va < vb;
        return a < b;
    });
    Node n;
    n.axis = axis;
    n.point = idx[mid];
    const int self = int(nodes_.size());
    nodes_.push_back(n);
    const int l = build(idx, lo, mid, depth + 1);
    const int r = build(idx, mid + 1, hi, depth + 1);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
}

namespace {
struct HeapEntry {
    double d2;
    int index;
    // max-heap on (distance, index): pop the worst candidate first
    bool operator<(const HeapEntry& o) const {
        if (d2 != o.d2) return d2 < o.d2;
        return index < o.index;
    }
};
} // namespace

std::vector<int> KdTree2::nearest(Point2 q, std::size_t k) const {
    std::vector<int> out;
    if (k == 0 || pts_.empty()) return out;
    k = std::min(k, pts_.size());
    std::priority_queue<HeapEntry> heap;

    auto visit = [&](auto&& self, int node) -> void {
        if (node < 0) return;
        const Node& n = nodes_[node];
        const Point2& p = pts_[n.point];
        const double dx = q.x1 - p.x1, dy = q.x2 - p.x2;
        const double d2 = dx * dx + dy * dy;
        HeapEntry e{d2, n.point};
        if (heap.size() < k) {
            heap.push(e);
        } else if (e < heap.top()) {
            heap.pop();
            heap.push(e);
        }
        const double delta = n.axis == 0 ? q.x1 - p.x1 : q.x2 - p.x2;
        const int near = delta < 0 ? n.left : n.right;
        const int far = delta < 0 ? n.right : n.left;
        self(self, near);
        if (heap.size() < k || delta * delta <= heap.top().d2) self(self, far);
    };
    visit(visit, root_);

    std::vector<HeapEntry> tmp;
    tmp.reserve(heap.size());
    while (!heap.empty()) {
        tmp.push_back(heap.top());
        heap.pop();
    }
    std::sort(tmp.begin(), tmp.end(), [](const HeapEntry& a, const HeapEntry& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        return a.index < b.index;
    });
    out.reserve(tmp.size());
    for (const auto& e : tmp) out.push_back(e.index);
    return out;
}

double KdTree2::distance(Point2 q) const {
    if (pts_.empty()) return kInf;
    double best = kInf;
    auto visit = [&](auto&& self, int node) -> void {
        if (node < 0) return;
        const Node& n = nodes_[node];
        const Point2& p = pts_[n.point];
        const double dx = q.x1 - p.x1, dy = q.x2 - p.x2;
        best = std::min(best, dx * dx + dy * dy);
        const double delta = n.axis == 0 ? q.x1 - p.x1 : q.x2 - p.x2;
        const int near = delta < 0 ? n.left : n.right;
        const int far = delta < 0 ? n.right : n.left;
        self(self, near);
        if (delta * delta <= best) self(self, far);
    };
    visit(visit, root_);
    return std::sqrt(best);
}

std::vector<int> KdTree2::range(const Box2& box) const {
    std::vector<int> out;
    auto visit = [&](auto&& self, int node) -> void {
        if (node < 0) return;
        const Node& n = nodes_[node];
        const Point2& p = pts_[n.point];
        if (box.contains(p)) out.push_back(n.point);
        const double v = n.axis == 0 ? p.x1 : p.x2;
        const double lo = n.axis == 0 ? box.lo1 : box.lo2;
        const double hi = n.axis == 0 ? box.hi1 : box.hi2;
        if (lo <= v) self(self, n.left);
        if (v <= hi) self(self, n.right);
    };
    visit(visit, root_);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace nnext
