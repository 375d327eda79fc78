// Independent reference implementations used by the unit and acceptance tests.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "iotagent/feature_model.hpp"
#include "iotagent/neurogenome.hpp"

namespace oracle {

using iotagent::FeatureKind;
using iotagent::FeatureModel;
using iotagent::FeatureNode;
using iotagent::GroupType;

// Flattened tree where a configuration is a bitmask over node indices.
class MaskModel {
public:
    explicit MaskModel(const FeatureModel& model) {
        add(model.root(), -1);
    }

    int size() const { return static_cast<int>(ids_.size()); }
    const std::string& id(int i) const { return ids_[static_cast<std::size_t>(i)]; }

    // The FODA rules, written straight from their definition.
    bool valid(std::uint64_t mask) const {
        if (!(mask & 1u)) return false;
        for (int i = 0; i < size(); ++i) {
            const bool on = mask >> i & 1u;
            const int p = parent_[static_cast<std::size_t>(i)];
            if (on && p >= 0 && !(mask >> p & 1u)) return false;
            if (!on) continue;
            int picked = 0;
            for (int c : children_[static_cast<std::size_t>(i)]) {
                const bool cOn = mask >> c & 1u;
                picked += cOn;
                if (group_[static_cast<std::size_t>(i)] == GroupType::None && mandatory_[static_cast<std::size_t>(c)] && !cOn)
                    return false;
            }
            if (group_[static_cast<std::size_t>(i)] == GroupType::Alternative && picked != 1) return false;
            if (group_[static_cast<std::size_t>(i)] == GroupType::Or && picked < 1) return false;
        }
        return true;
    }

    // Every valid mask, by testing all 2^n subsets.
    std::set<std::uint64_t> brute_force() const {
        std::set<std::uint64_t> out;
        const std::uint64_t n = std::uint64_t{1} << size();
        for (std::uint64_t m = 0; m < n; ++m)
            if (valid(m)) out.insert(m);
        return out;
    }

    // Subsets in which every selected node's parent is selected (root included).
    std::vector<std::uint64_t> parent_closed() const {
        std::vector<std::uint64_t> out;
        grow(1u, 1, out);
        return out;
    }

    std::uint64_t mask_of(const iotagent::Configuration& c) const {
        std::uint64_t m = 0;
        for (const auto& id : c.selected) m |= std::uint64_t{1} << index_.at(id);
        return m;
    }

    iotagent::Configuration config_of(std::uint64_t mask, const std::string& version) const {
        iotagent::Configuration c;
        c.modelVersion = version;
        for (int i = 0; i < size(); ++i)
            if (mask >> i & 1u) c.selected.insert(ids_[static_cast<std::size_t>(i)]);
        return c;
    }

private:
    int add(const FeatureNode& n, int parent) {
        const int idx = size();
        ids_.push_back(n.id);
        parent_.push_back(parent);
        mandatory_.push_back(n.kind == FeatureKind::Mandatory);
        group_.push_back(n.groupType);
        children_.emplace_back();
        index_[n.id] = idx;
        for (const auto& c : n.children) {
            const int ci = add(c, idx);
            children_[static_cast<std::size_t>(idx)].push_back(ci);
        }
        return idx;
    }

    // Nodes are numbered in pre-order, so a parent always precedes its children.
    void grow(std::uint64_t mask, int next, std::vector<std::uint64_t>& out) const {
        if (next == size()) {
            out.push_back(mask);
            return;
        }
        grow(mask, next + 1, out);
        if (mask >> parent_[static_cast<std::size_t>(next)] & 1u) grow(mask | std::uint64_t{1} << next, next + 1, out);
    }

    std::vector<std::string> ids_;
    std::vector<int> parent_;
    std::vector<bool> mandatory_;
    std::vector<GroupType> group_;
    std::vector<std::vector<int>> children_;
    std::map<std::string, int> index_;
};

// Random well-formed model with at most `maxLeaves` leaves.
inline FeatureModel random_model(std::mt19937_64& rng, int maxLeaves = 12) {
    int counter = 0;
    int leaves = 1;  // the root starts as a leaf
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    std::function<void(FeatureNode&, int)> expand = [&](FeatureNode& n, int depth) {
        if (depth >= 3) return;
        const int want = pick(depth == 0 ? 2 : 0, 3);
        // turning a leaf into a parent of k leaves adds k - 1 leaves
        if (want == 0 || leaves + want - 1 > maxLeaves) return;
        leaves += want - 1;
        const int g = want >= 2 ? pick(0, 2) : 0;
        n.groupType = g == 0 ? GroupType::None : g == 1 ? GroupType::Alternative : GroupType::Or;
        for (int k = 0; k < want; ++k) {
            FeatureNode c;
            c.id = "f" + std::to_string(++counter);
            c.name = c.id;
            c.kind = n.groupType == GroupType::None && pick(0, 2) == 0 ? FeatureKind::Mandatory : FeatureKind::Optional;
            n.children.push_back(std::move(c));
        }
        for (auto& c : n.children) expand(c, depth + 1);
    };

    FeatureNode root;
    root.id = "root";
    root.name = "root";
    root.kind = FeatureKind::Mandatory;
    expand(root, 0);
    return FeatureModel(std::move(root), "random/1");
}

// Evaluates only the edges that exist, as if zero-weight connections had
// been physically removed from the graph.
inline std::vector<double> sparse_forward(const iotagent::NetworkSpec& spec, const iotagent::Genome& g,
                                          const std::vector<double>& in) {
    struct Edge {
        int from;
        int to;
        double w;
    };
    std::vector<Edge> ih;
    std::vector<Edge> ho;
    for (int i = 0; i < g.inputs(); ++i)
        for (int h = 0; h < g.hidden(); ++h)
            if (g.inputHidden(i, h) != 0.0) ih.push_back({i, h, g.inputHidden(i, h)});
    for (int h = 0; h < g.hidden(); ++h)
        for (int o = 0; o < g.outputs(); ++o)
            if (g.hiddenOutput(h, o) != 0.0) ho.push_back({h, o, g.hiddenOutput(h, o)});

    // edges are listed source-major, so each sum accumulates in source order
    std::vector<double> hidden(static_cast<std::size_t>(g.hidden()), 0.0);
    for (const auto& e : ih) hidden[static_cast<std::size_t>(e.to)] += in[static_cast<std::size_t>(e.from)] * e.w;
    for (auto& v : hidden) v = iotagent::activation_apply(spec.activation, v, spec.activationThreshold);
    std::vector<double> out(static_cast<std::size_t>(g.outputs()), 0.0);
    for (const auto& e : ho) out[static_cast<std::size_t>(e.to)] += hidden[static_cast<std::size_t>(e.from)] * e.w;
    for (auto& v : out) v = iotagent::activation_apply(spec.activation, v, spec.activationThreshold);
    return out;
}

// A genome with every weight drawn uniformly from the full range, so a
// good share of them are sub-threshold before pruning.
inline iotagent::Genome raw_genome(const iotagent::NetworkSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(spec.weightLo, spec.weightHi);
    std::vector<double> w(spec.weightCount());
    for (auto& x : w) x = u(rng);
    return iotagent::Genome::from_flat(spec, w);
}

}  // namespace oracle
