#pragma once

#include <cstddef>
#include <random>
#include <set>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "iotagent/feature_model.hpp"

namespace iotagent {

/// Shape and numeric settings of the fixed three-layer network.
struct NetworkSpec {
    int inputs = 1;
    int hidden = 1;
    int outputs = 1;
    ActivationKind activation = ActivationKind::Sigmoid;
    double activationThreshold = 0.5;  // binaryThreshold only
    double weightLo = -2.0;
    double weightHi = 2.0;
    double pruneThreshold = 0.25;

    bool operator==(const NetworkSpec&) const = default;

    std::size_t weightCount() const noexcept {
        return static_cast<std::size_t>(inputs) * hidden + static_cast<std::size_t>(hidden) * outputs;
    }
    void check() const;
};

/// Dense network with hidden width equal to the space's hiddenMax.
NetworkSpec network_spec_from(const SearchSpace& space);

/// Input->hidden and hidden->output weight matrices, row-major, no biases.
/// A weight of exactly 0 is a removed connection.
class Genome {
public:
    Genome() = default;
    Genome(int inputs, int hidden, int outputs);
    Genome(int inputs, int hidden, int outputs, std::vector<double> inputHidden, std::vector<double> hiddenOutput);

    int inputs() const noexcept { return inputs_; }
    int hidden() const noexcept { return hidden_; }
    int outputs() const noexcept { return outputs_; }

    double& inputHidden(int i, int h) { return inputHidden_[static_cast<std::size_t>(i) * hidden_ + h]; }
    double inputHidden(int i, int h) const { return inputHidden_[static_cast<std::size_t>(i) * hidden_ + h]; }
    double& hiddenOutput(int h, int o) { return hiddenOutput_[static_cast<std::size_t>(h) * outputs_ + o]; }
    double hiddenOutput(int h, int o) const { return hiddenOutput_[static_cast<std::size_t>(h) * outputs_ + o]; }

    std::span<const double> inputHiddenWeights() const noexcept { return inputHidden_; }
    std::span<const double> hiddenOutputWeights() const noexcept { return hiddenOutput_; }

    /// All weights, input->hidden first, both row-major.
    std::vector<double> flat() const;
    static Genome from_flat(const NetworkSpec& spec, std::span<const double> weights);

    template <typename F>
    void forEachWeight(F&& f) {
        for (auto& w : inputHidden_) f(w);
        for (auto& w : hiddenOutput_) f(w);
    }
    template <typename F>
    void forEachWeight(F&& f) const {
        for (double w : inputHidden_) f(w);
        for (double w : hiddenOutput_) f(w);
    }

    bool matches(const NetworkSpec& spec) const noexcept {
        return inputs_ == spec.inputs && hidden_ == spec.hidden && outputs_ == spec.outputs;
    }

    bool operator==(const Genome&) const = default;

private:
    int inputs_ = 0;
    int hidden_ = 0;
    int outputs_ = 0;
    std::vector<double> inputHidden_;
    std::vector<double> hiddenOutput_;
};

double activation_apply(ActivationKind kind, double x, double threshold = 0.5);

/// Writes `outputs().size()` values into `out`. Throws ValidationError on a
/// dimension mismatch.
void forward(const NetworkSpec& spec, const Genome& genome, std::span<const double> inputs, std::span<double> out);
std::vector<double> forward(const NetworkSpec& spec, const Genome& genome, std::span<const double> inputs);

/// Snaps every |w| < pruneThreshold to exactly 0.
Genome prune(const NetworkSpec& spec, Genome genome);

/// Indices of inputs whose every outgoing weight is 0.
std::set<int> deselected_inputs(const Genome& genome);

Genome random_genome(const NetworkSpec& spec, std::mt19937_64& rng);

struct TopologyStats {
    int liveInputs = 0;
    int liveHidden = 0;
    int liveConnections = 0;

    bool operator==(const TopologyStats&) const = default;
};

TopologyStats effective_topology(const Genome& genome);

/// True when every weight is within the spec's range and no weight is a
/// sub-threshold non-zero.
bool satisfies_invariants(const NetworkSpec& spec, const Genome& genome);

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& j);
/// `{"spec": {...}, "weights": [...]}`
nlohmann::json to_json(const NetworkSpec& spec, const Genome& genome);
Genome genome_from_json(const NetworkSpec& spec, const nlohmann::json& weights);

}  // namespace iotagent
