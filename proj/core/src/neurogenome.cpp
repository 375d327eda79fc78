#include "iotagent/neurogenome.hpp"

#include <algorithm>
#include <cmath>

#include "iotagent/errors.hpp"

namespace iotagent {

void NetworkSpec::check() const {
    if (inputs < 1 || hidden < 1 || outputs < 1) throw ValidationError("layer sizes must be positive", "spec");
    if (!(weightLo <= 0.0 && 0.0 <= weightHi && weightLo < weightHi))
        throw ValidationError("requires lo <= 0 <= hi", "spec.weightRange");
    if (!(pruneThreshold > 0.0 && pruneThreshold < weightHi))
        throw ValidationError("requires 0 < pruneThreshold < hi", "spec.pruneThreshold");
}

NetworkSpec network_spec_from(const SearchSpace& space) {
    NetworkSpec spec;
    spec.inputs = static_cast<int>(space.inputNames.size());
    spec.hidden = space.hiddenMax;
    spec.outputs = static_cast<int>(space.outputNames.size());
    spec.activation = space.activation;
    spec.activationThreshold = space.activationThreshold;
    spec.weightLo = space.weightLo;
    spec.weightHi = space.weightHi;
    spec.pruneThreshold = space.pruneThreshold;
    spec.check();
    return spec;
}

Genome::Genome(int inputs, int hidden, int outputs)
    : inputs_(inputs),
      hidden_(hidden),
      outputs_(outputs),
      inputHidden_(static_cast<std::size_t>(inputs) * hidden, 0.0),
      hiddenOutput_(static_cast<std::size_t>(hidden) * outputs, 0.0) {}

Genome::Genome(int inputs, int hidden, int outputs, std::vector<double> inputHidden, std::vector<double> hiddenOutput)
    : inputs_(inputs),
      hidden_(hidden),
      outputs_(outputs),
      inputHidden_(std::move(inputHidden)),
      hiddenOutput_(std::move(hiddenOutput)) {
    if (inputHidden_.size() != static_cast<std::size_t>(inputs) * hidden ||
        hiddenOutput_.size() != static_cast<std::size_t>(hidden) * outputs)
        throw ValidationError("weight matrix sizes do not match the layer sizes", "genome");
}

std::vector<double> Genome::flat() const {
    std::vector<double> out(inputHidden_);
    out.insert(out.end(), hiddenOutput_.begin(), hiddenOutput_.end());
    return out;
}

Genome Genome::from_flat(const NetworkSpec& spec, std::span<const double> weights) {
    const std::size_t ih = static_cast<std::size_t>(spec.inputs) * spec.hidden;
    if (weights.size() != spec.weightCount())
        throw ValidationError("expected " + std::to_string(spec.weightCount()) + " weights, got " +
                                  std::to_string(weights.size()),
                              "weights");
    return Genome(spec.inputs, spec.hidden, spec.outputs, {weights.begin(), weights.begin() + ih},
                  {weights.begin() + ih, weights.end()});
}

double activation_apply(ActivationKind kind, double x, double threshold) {
    switch (kind) {
    case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::BinaryThreshold: return x >= threshold ? 1.0 : 0.0;
    case ActivationKind::Linear: return std::clamp(x, 0.0, 1.0);
    }
    return 0.0;
}

void forward(const NetworkSpec& spec, const Genome& genome, std::span<const double> inputs, std::span<double> out) {
    if (!genome.matches(spec)) throw ValidationError("genome dimensions do not match the network spec", "genome");
    if (inputs.size() != static_cast<std::size_t>(spec.inputs))
        throw ValidationError("expected " + std::to_string(spec.inputs) + " inputs, got " +
                                  std::to_string(inputs.size()),
                              "inputs");
    if (out.size() != static_cast<std::size_t>(spec.outputs))
        throw ValidationError("output buffer has the wrong size", "outputs");

    // Hidden width is small (<= hiddenMax), a stack buffer covers the common case.
    constexpr int kStack = 32;
    double stackBuf[kStack];
    std::vector<double> heapBuf;
    double* hiddenAct = stackBuf;
    if (spec.hidden > kStack) {
        heapBuf.resize(static_cast<std::size_t>(spec.hidden));
        hiddenAct = heapBuf.data();
    }

    for (int h = 0; h < spec.hidden; ++h) {
        double sum = 0.0;
        for (int i = 0; i < spec.inputs; ++i) {
            const double w = genome.inputHidden(i, h);
            if (w == 0.0) continue;  // removed connection
            sum += inputs[static_cast<std::size_t>(i)] * w;
        }
        hiddenAct[h] = activation_apply(spec.activation, sum, spec.activationThreshold);
    }
    for (int o = 0; o < spec.outputs; ++o) {
        double sum = 0.0;
        for (int h = 0; h < spec.hidden; ++h) {
            const double w = genome.hiddenOutput(h, o);
            if (w == 0.0) continue;
            sum += hiddenAct[h] * w;
        }
        out[static_cast<std::size_t>(o)] = activation_apply(spec.activation, sum, spec.activationThreshold);
    }
}

std::vector<double> forward(const NetworkSpec& spec, const Genome& genome, std::span<const double> inputs) {
    std::vector<double> out(static_cast<std::size_t>(spec.outputs));
    forward(spec, genome, inputs, out);
    return out;
}

Genome prune(const NetworkSpec& spec, Genome genome) {
    genome.forEachWeight([&](double& w) {
        if (std::abs(w) < spec.pruneThreshold) w = 0.0;
    });
    return genome;
}

std::set<int> deselected_inputs(const Genome& genome) {
    std::set<int> out;
    for (int i = 0; i < genome.inputs(); ++i) {
        bool allZero = true;
        for (int h = 0; h < genome.hidden() && allZero; ++h) allZero = genome.inputHidden(i, h) == 0.0;
        if (allZero) out.insert(i);
    }
    return out;
}

Genome random_genome(const NetworkSpec& spec, std::mt19937_64& rng) {
    Genome g(spec.inputs, spec.hidden, spec.outputs);
    g.forEachWeight([&](double& w) {
        do {
            w = std::uniform_real_distribution<double>(spec.weightLo, spec.weightHi)(rng);
        } while (std::abs(w) < spec.pruneThreshold);
    });
    return g;
}

TopologyStats effective_topology(const Genome& genome) {
    TopologyStats t;
    genome.forEachWeight([&](double w) { t.liveConnections += w != 0.0 ? 1 : 0; });
    t.liveInputs = genome.inputs() - static_cast<int>(deselected_inputs(genome).size());
    for (int h = 0; h < genome.hidden(); ++h) {
        bool in = false, out = false;
        for (int i = 0; i < genome.inputs() && !in; ++i) in = genome.inputHidden(i, h) != 0.0;
        for (int o = 0; o < genome.outputs() && !out; ++o) out = genome.hiddenOutput(h, o) != 0.0;
        t.liveHidden += (in && out) ? 1 : 0;
    }
    return t;
}

bool satisfies_invariants(const NetworkSpec& spec, const Genome& genome) {
    if (!genome.matches(spec)) return false;
    bool ok = true;
    genome.forEachWeight([&](double w) {
        if (!(w >= spec.weightLo && w <= spec.weightHi)) ok = false;
        if (w != 0.0 && std::abs(w) < spec.pruneThreshold) ok = false;
    });
    return ok;
}

nlohmann::json to_json(const NetworkSpec& spec) {
    return {{"I", spec.inputs},
            {"H", spec.hidden},
            {"O", spec.outputs},
            {"activation", to_string(spec.activation)},
            {"thetaAct", spec.activationThreshold},
            {"thetaPrune", spec.pruneThreshold},
            {"weightRange", {spec.weightLo, spec.weightHi}}};
}

NetworkSpec network_spec_from_json(const nlohmann::json& j) {
    NetworkSpec spec;
    try {
        spec.inputs = j.at("I").get<int>();
        spec.hidden = j.at("H").get<int>();
        spec.outputs = j.at("O").get<int>();
        spec.activation = activation_from_string(j.at("activation").get<std::string>());
        spec.activationThreshold = j.at("thetaAct").get<double>();
        spec.pruneThreshold = j.at("thetaPrune").get<double>();
        const auto& range = j.at("weightRange");
        spec.weightLo = range.at(0).get<double>();
        spec.weightHi = range.at(1).get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(e.what(), "spec");
    }
    spec.check();
    return spec;
}

nlohmann::json to_json(const NetworkSpec& spec, const Genome& genome) {
    return {{"spec", to_json(spec)}, {"weights", genome.flat()}};
}

Genome genome_from_json(const NetworkSpec& spec, const nlohmann::json& weights) {
    if (!weights.is_array()) throw ValidationError("must be an array", "weights");
    std::vector<double> flat;
    flat.reserve(weights.size());
    for (const auto& w : weights) {
        if (!w.is_number()) throw ValidationError("weights must be numbers", "weights");
        flat.push_back(w.get<double>());
    }
    return Genome::from_flat(spec, flat);
}

}  // namespace iotagent
