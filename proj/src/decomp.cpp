#include "nnext/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace nnext {

namespace {

struct ProbeKey {
    std::uint64_t a, b;
    bool operator==(const ProbeKey&) const = default;
};
struct ProbeKeyHash {
    std::size_t operator()(const ProbeKey& k) const {
        return std::size_t(k.a * 0x9e3779b97f4a7c15ull ^ k.b);
    }
};

ProbeKey probe_key(Point2 p) {
    ProbeKey k;
    std::memcpy(&k.a, &p.x1, sizeof(double));
    std::memcpy(&k.b, &p.x2, sizeof(double));
    return k;
}

// Certified diameter interval per probe point; thresholds shrink as squares
// do, so lower bounds from early exits stay reusable.
struct DiamCache {
    struct Entry {
        double lb = 0.0;
        double ub = kInf;
    };
    std::unordered_map<ProbeKey, Entry, ProbeKeyHash> map;

    bool at_least(Point2 x, const KdTree2& tree, const Config& cfg, double threshold) {
        Entry& e = map[probe_key(x)];
        if (e.lb >= threshold) return true;
        if (e.ub < threshold) return false;
        if (diameter_at_least(x, tree, cfg, threshold)) {
            e.lb = std::max(e.lb, threshold);
            return true;
        }
        e.ub = std::min(e.ub, threshold);
        return false;
    }
};

std::array<Point2, 5> box_probes(const Box2& b) {
    return {Point2{b.lo1, b.lo2}, Point2{b.hi1, b.lo2}, Point2{b.lo1, b.hi2}, Point2{b.hi1, b.hi2},
            Point2{0.5 * (b.lo1 + b.hi1), 0.5 * (b.lo2 + b.hi2)}};
}

} // namespace

Decomposition Decomposition::build(const std::vector<Point2>& points, const Config& cfg) {
    cfg.validate();
    for (const Point2& p : points)
        if (!finite(p)) throw input_error("decomposition: non-finite point");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j]) throw input_error("decomposition: duplicate point");

    Decomposition dec;
    dec.cfg_ = cfg;
    dec.tree_ = KdTree2(points);

    const double unit = cfg.unit_scale;
    Box2 raw{0.0, 0.0, unit, unit};
    if (!points.empty()) {
        raw = {points[0].x1, points[0].x2, points[0].x1, points[0].x2};
        for (const Point2& p : points) {
            raw.lo1 = std::min(raw.lo1, p.x1);
            raw.lo2 = std::min(raw.lo2, p.x2);
            raw.hi1 = std::max(raw.hi1, p.x1);
            raw.hi2 = std::max(raw.hi2, p.x2);
        }
    }
    const auto snap_lo = [&](double v) { return std::int64_t(std::floor(v / unit)) - 3; };
    const auto snap_hi = [&](double v) { return std::int64_t(std::floor(v / unit)) + 3; };
    const std::int64_t i0 = snap_lo(raw.lo1), i1 = snap_hi(raw.hi1);
    const std::int64_t j0 = snap_lo(raw.lo2), j1 = snap_hi(raw.hi2);
    dec.domain_ = {double(i0) * unit, double(j0) * unit, double(i1 + 1) * unit, double(j1 + 1) * unit};

    DiamCache cache;

    // splits a node into four children (structure only)
    auto split_node = [&](int node) {
        const SquareKey key = dec.nodes_[node].key;
        const auto kids = key.children();
        for (int c = 0; c < 4; ++c) {
            TreeNode child;
            child.key = kids[c];
            dec.nodes_.push_back(child);
            dec.nodes_[node].children[c] = int(dec.nodes_.size()) - 1;
        }
        dec.nodes_[node].leaf = -2; // internal
    };

    struct Pending {
        int node;
        bool parent_diam_split;
        Point2 witness;
    };
    std::deque<Pending> work;

    for (std::int64_t i = i0; i <= i1; ++i) {
        for (std::int64_t j = j0; j <= j1; ++j) {
            TreeNode root;
            root.key = {i, j, 0};
            dec.nodes_.push_back(root);
            const int node = int(dec.nodes_.size()) - 1;
            dec.roots_[{i, j}] = node;
            work.push_back({node, false, Point2{}});
        }
    }

    // main refinement: a square with data in its doubled box must pass the
    // diameter test everywhere on the probe set or be subdivided
    auto refine = [&](Pending start) {
        std::deque<Pending> local{start};
        while (!local.empty()) {
            Pending cur = local.front();
            local.pop_front();
            TreeNode& tn = dec.nodes_[cur.node];
            const Square sq{tn.key, unit};
            const std::vector<int> data2q = dec.tree_.range(sq.dilated(2.0));

            bool keep = data2q.empty();
            Point2 witness{};
            if (!keep) {
                if (tn.key.k <= -cfg.max_depth)
                    throw decomposition_error("decomposition: max depth exceeded at square (" +
                                              std::to_string(tn.key.i) + "," + std::to_string(tn.key.j) +
                                              "," + std::to_string(tn.key.k) + ")");
                const double threshold = cfg.C0 * sq.side();
                keep = true;
                for (const Point2& p : box_probes(sq.dilated(2.0))) {
                    if (!cache.at_least(p, dec.tree_, cfg, threshold)) {
                        keep = false;
                        witness = p;
                        break;
                    }
                }
                if (keep) {
                    for (int idx : data2q) {
                        const Point2 p = dec.tree_.points()[idx];
                        if (!cache.at_least(p, dec.tree_, cfg, threshold)) {
                            keep = false;
                            witness = p;
                            break;
                        }
                    }
                }
            }

            if (keep) {
                DecompSquare leaf;
                leaf.sq = sq;
                leaf.data_2q = data2q;
                leaf.parent_diam_split = cur.parent_diam_split;
                leaf.parent_witness = cur.witness;
                dec.squares_.push_back(std::move(leaf));
                dec.nodes_[cur.node].leaf = int(dec.squares_.size()) - 1;
            } else {
                split_node(cur.node);
                for (int c = 0; c < 4; ++c)
                    local.push_back({dec.nodes_[cur.node].children[c], true, witness});
            }
        }
    };

    while (!work.empty()) {
        refine(work.front());
        work.pop_front();
    }

    // balance pass: touching leaves must have side ratio <= 4
    {
        std::unordered_map<int, int> leaf_node; // leaf index -> tree node
        for (std::size_t t = 0; t < dec.nodes_.size(); ++t)
            if (dec.nodes_[t].leaf >= 0) leaf_node[dec.nodes_[t].leaf] = int(t);

        auto touching_leaves = [&](const Square& sq) {
            std::vector<int> out;
            const double eps = 1e-9 * sq.side();
            Box2 probe = sq.box();
            probe.lo1 -= eps;
            probe.lo2 -= eps;
            probe.hi1 += eps;
            probe.hi2 += eps;
            for (const auto& [rk, rnode] : dec.roots_) dec.collect_touching(rnode, probe, out);
            return out;
        };

        auto split_leaf = [&](int leaf) {
            const int node = leaf_node.at(leaf);
            const std::size_t before = dec.squares_.size();
            const std::size_t nodes_before = dec.nodes_.size();
            dec.nodes_[std::size_t(node)].leaf = -2;
            dec.squares_[std::size_t(leaf)].sq.unit_scale = 0.0; // retire
            leaf_node.erase(leaf);
            split_node(node);
            for (int c = 0; c < 4; ++c)
                refine({dec.nodes_[std::size_t(node)].children[c], false, Point2{}});
            std::vector<int> fresh;
            for (std::size_t t = before; t < dec.squares_.size(); ++t) fresh.push_back(int(t));
            for (std::size_t t = nodes_before; t < dec.nodes_.size(); ++t)
                if (dec.nodes_[t].leaf >= 0) leaf_node[dec.nodes_[t].leaf] = int(t);
            return fresh;
        };

        std::deque<int> bal;
        for (std::size_t i = 0; i < dec.squares_.size(); ++i) bal.push_back(int(i));
        while (!bal.empty()) {
            const int idx = bal.front();
            bal.pop_front();
            if (dec.squares_[std::size_t(idx)].sq.unit_scale == 0.0) continue;
            const Square sq = dec.squares_[std::size_t(idx)].sq;
            const double eps = 1e-9 * sq.side();
            for (int other : touching_leaves(sq)) {
                if (other == idx) continue;
                if (dec.squares_[std::size_t(other)].sq.unit_scale == 0.0) continue;
                if (dec.squares_[std::size_t(other)].sq.side() > 4.0 * sq.side() + eps) {
                    for (int f : split_leaf(other)) bal.push_back(f);
                    bal.push_back(idx);
                } else if (sq.side() > 4.0 * dec.squares_[std::size_t(other)].sq.side() + eps) {
                    for (int f : split_leaf(idx)) bal.push_back(f);
                    bal.push_back(other);
                    break; // idx is retired now
                }
            }
        }
    }

    // compact retired leaves
    {
        std::vector<DecompSquare> keep;
        std::vector<int> remap(dec.squares_.size(), -1);
        for (std::size_t i = 0; i < dec.squares_.size(); ++i) {
            if (dec.squares_[i].sq.unit_scale == 0.0) continue;
            remap[i] = int(keep.size());
            keep.push_back(std::move(dec.squares_[i]));
        }
        dec.squares_ = std::move(keep);
        for (TreeNode& n : dec.nodes_)
            if (n.leaf >= 0) n.leaf = remap[std::size_t(n.leaf)];
    }

    // labels
    for (DecompSquare& s : dec.squares_) {
        if (!s.data_2q.empty()) {
            s.kind = SquareKind::Data;
        } else if (s.sq.key.k < 0) {
            const Square parent{s.sq.key.parent(), unit};
            const std::vector<int> up = dec.tree_.range(parent.dilated(2.0));
            s.kind = up.empty() ? SquareKind::Far : SquareKind::Relay;
        } else {
            s.kind = SquareKind::Far;
        }
    }

    // representative points: 5x5 interior scan, farthest from the data
    for (DecompSquare& s : dec.squares_) {
        const Point2 c = s.sq.corner();
        const double d = s.sq.side();
        double best = -1.0;
        Point2 bp = s.sq.center();
        for (int a = 0; a < 5; ++a) {
            for (int b = 0; b < 5; ++b) {
                const Point2 p{c.x1 + (0.1 + 0.2 * a) * d, c.x2 + (0.1 + 0.2 * b) * d};
                const double dist = dec.tree_.distance(p);
                if (dist > best) {
                    best = dist;
                    bp = p;
                }
            }
        }
        s.rep = bp;
        s.rep_distance = best == kInf ? d : best;
        if (s.kind == SquareKind::Data && s.rep_distance < d / 8.0)
            throw decomposition_error("decomposition: representative point too close to the data");
    }

    // relay map: lowest data index in the doubled parent, then its leaf
    for (std::size_t i = 0; i < dec.squares_.size(); ++i) {
        DecompSquare& s = dec.squares_[i];
        if (s.kind != SquareKind::Relay) continue;
        const Square parent{s.sq.key.parent(), unit};
        const std::vector<int> up = dec.tree_.range(parent.dilated(2.0));
        if (up.empty()) throw decomposition_error("decomposition: relay square with no nearby data");
        const Point2 target = dec.tree_.points()[up.front()];
        const int leaf = dec.locate(target);
        if (leaf < 0 || dec.squares_[std::size_t(leaf)].kind != SquareKind::Data)
            throw decomposition_error("decomposition: relay target is not a data square");
        s.relay = leaf;
    }

    // neighbor lists
    for (std::size_t i = 0; i < dec.squares_.size(); ++i) {
        const Square sq = dec.squares_[i].sq;
        const double eps = 1e-9 * sq.side();
        Box2 probe = sq.box();
        probe.lo1 -= eps;
        probe.lo2 -= eps;
        probe.hi1 += eps;
        probe.hi2 += eps;
        std::vector<int> touching;
        for (const auto& [rk, rnode] : dec.roots_) dec.collect_touching(rnode, probe, touching);
        std::sort(touching.begin(), touching.end());
        touching.erase(std::remove(touching.begin(), touching.end(), int(i)), touching.end());
        dec.squares_[i].neighbors = std::move(touching);
    }

    // straightenings for data squares
    dec.straightenings_.resize(dec.squares_.size());
    for (std::size_t i = 0; i < dec.squares_.size(); ++i) {
        DecompSquare& s = dec.squares_[i];
        if (s.kind != SquareKind::Data) continue;
        Straightening st;
        const std::vector<int>& idx = s.data_2q;
        if (idx.size() == 1) {
            st.rotation = Rot2{};
        } else {
            const Point2 probe = dec.tree_.points()[idx.front()];
            const DiameterResult dr = local_jet_diameter_full(probe, dec.tree_, cfg);
            const Point2 g = dr.achieving.grad;
            st.rotation = norm2(g) > 0.0 ? Rot2::with_second_axis(g) : Rot2{};
        }
        std::vector<std::pair<double, double>> ts;
        ts.reserve(idx.size());
        for (int t : idx) {
            const Point2 u = st.rotation.apply(dec.tree_.points()[t]);
            ts.emplace_back(u.x1, u.x2);
        }
        std::sort(ts.begin(), ts.end());
        st.t_center = ts.front().first;
        st.s_center = ts.front().second;
        OneDData curve_data;
        for (const auto& [t, sv] : ts) {
            if (!curve_data.knots.empty() && t - (st.t_center + curve_data.knots.back()) <=
                                                 cfg.grid_eps * std::max(1.0, s.sq.side())) {
                if (std::abs(sv - st.s_center - curve_data.values.back()) >
                    cfg.grid_eps * std::max(1.0, s.sq.side()))
                    throw decomposition_error("decomposition: local data is not a graph after rotation");
                continue;
            }
            curve_data.knots.push_back(t - st.t_center);
            curve_data.values.push_back(sv - st.s_center);
        }
        st.curve = extend_linear(curve_data);
        // observed curve bounds over the doubled square's t-window
        {
            const Box2 b2 = s.sq.dilated(2.0);
            double tlo = kInf, thi = -kInf;
            for (const Point2& corner : box_probes(b2)) {
                const double t = st.rotation.apply(corner).x1;
                tlo = std::min(tlo, t);
                thi = std::max(thi, t);
            }
            for (int m = 0; m <= 64; ++m) {
                const double t = tlo + (thi - tlo) * m / 64.0;
                const OneDEval e = st.curve.eval(t - st.t_center);
                st.max_slope = std::max(st.max_slope, std::abs(e.d1));
                st.max_curvature = std::max(st.max_curvature, std::abs(e.d2));
            }
        }
        dec.straightenings_[i] = std::move(st);
    }

    return dec;
}

int Decomposition::locate_node(Point2 x) const {
    if (!(x.x1 >= domain_.lo1 && x.x1 < domain_.hi1 && x.x2 >= domain_.lo2 && x.x2 < domain_.hi2))
        return -1;
    const double unit = cfg_.unit_scale;
    const std::int64_t i = std::int64_t(std::floor(x.x1 / unit));
    const std::int64_t j = std::int64_t(std::floor(x.x2 / unit));
    const auto it = roots_.find({i, j});
    if (it == roots_.end()) return -1;
    int node = it->second;
    while (nodes_[std::size_t(node)].leaf < 0) {
        if (nodes_[std::size_t(node)].leaf == -1) return -1; // structurally impossible
        bool stepped = false;
        for (int c = 0; c < 4; ++c) {
            const int child = nodes_[std::size_t(node)].children[c];
            if (child >= 0 && Square{nodes_[std::size_t(child)].key, unit}.contains(x)) {
                node = child;
                stepped = true;
                break;
            }
        }
        if (!stepped) return -1;
    }
    return node;
}

int Decomposition::locate(Point2 x) const {
    const int node = locate_node(x);
    return node < 0 ? -1 : nodes_[std::size_t(node)].leaf;
}

void Decomposition::collect_touching(int node, const Box2& box, std::vector<int>& out) const {
    const TreeNode& tn = nodes_[std::size_t(node)];
    const Box2 nb = Square{tn.key, cfg_.unit_scale}.box();
    if (nb.lo1 > box.hi1 || box.lo1 > nb.hi1 || nb.lo2 > box.hi2 || box.lo2 > nb.hi2) return;
    if (tn.leaf >= 0) {
        out.push_back(tn.leaf);
        return;
    }
    for (int c = 0; c < 4; ++c)
        if (tn.children[c] >= 0) collect_touching(tn.children[c], box, out);
}

std::vector<int> Decomposition::cover(Point2 x) const {
    std::vector<int> out;
    const int leaf = locate(x);
    if (leaf < 0) return out;
    auto in_dilate = [&](int idx) {
        return squares_[std::size_t(idx)].sq.dilated(9.0 / 8.0).contains(x);
    };
    if (in_dilate(leaf)) out.push_back(leaf);
    for (int nb : squares_[std::size_t(leaf)].neighbors)
        if (in_dilate(nb)) out.push_back(nb);
    std::sort(out.begin(), out.end());
    return out;
}

const Straightening& Decomposition::straightening(int i) const {
    if (squares_[std::size_t(i)].kind != SquareKind::Data)
        throw decomposition_error("straightening: not a data square");
    return straightenings_[std::size_t(i)];
}

int Decomposition::relay_target(int i) const {
    if (squares_[std::size_t(i)].kind != SquareKind::Relay)
        throw decomposition_error("relay_target: not a relay square");
    return squares_[std::size_t(i)].relay;
}

DecompStats Decomposition::stats() const {
    DecompStats st;
    st.min_side = kInf;
    for (const DecompSquare& s : squares_) {
        switch (s.kind) {
            case SquareKind::Data: ++st.data_squares; break;
            case SquareKind::Relay: ++st.relay_squares; break;
            case SquareKind::Far: ++st.far_squares; break;
        }
        st.min_side = std::min(st.min_side, s.sq.side());
        st.max_side = std::max(st.max_side, s.sq.side());
        st.max_neighbor_count = std::max(st.max_neighbor_count, s.neighbors.size());
        for (int nb : s.neighbors) {
            const double r = s.sq.side() / squares_[std::size_t(nb)].sq.side();
            st.worst_neighbor_ratio = std::max(st.worst_neighbor_ratio, std::max(r, 1.0 / r));
        }
        if (s.kind == SquareKind::Data) {
            const double c0 = s.rep_distance / s.sq.side();
            st.c0_achieved = st.c0_achieved == 0.0 ? c0 : std::min(st.c0_achieved, c0);
        }
    }
    if (squares_.empty()) st.min_side = 0.0;
    return st;
}

std::string Decomposition::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["unit_scale"] = cfg_.unit_scale;
    std::vector<std::size_t> order(squares_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return squares_[a].sq.key < squares_[b].sq.key;
    });
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i : order) {
        const DecompSquare& s = squares_[i];
        nlohmann::json e;
        e["i"] = s.sq.key.i;
        e["j"] = s.sq.key.j;
        e["k"] = s.sq.key.k;
        e["label"] = s.kind == SquareKind::Data ? "data" : (s.kind == SquareKind::Relay ? "relay" : "far");
        e["rep"] = {s.rep.x1, s.rep.x2};
        if (s.kind == SquareKind::Relay) {
            const DecompSquare& t = squares_[std::size_t(s.relay)];
            e["relay"] = {t.sq.key.i, t.sq.key.j, t.sq.key.k};
        }
        arr.push_back(std::move(e));
    }
    j["squares"] = std::move(arr);
    const DecompStats st = stats();
    j["stats"] = {{"data_squares", st.data_squares},
                  {"relay_squares", st.relay_squares},
                  {"far_squares", st.far_squares},
                  {"min_side", st.min_side},
                  {"max_side", st.max_side},
                  {"worst_neighbor_ratio", st.worst_neighbor_ratio},
                  {"c0_achieved", st.c0_achieved}};
    return j.dump(2);
}

} // namespace nnext
