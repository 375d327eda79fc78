#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace iotagent {

enum class FeatureKind { Mandatory, Optional };

/// Semantics applied to a node's children.
enum class GroupType {
    None,         // children follow their own mandatory/optional kind
    Alternative,  // exactly one child when the parent is selected
    Or,           // at least one child when the parent is selected
};

enum class FeatureDomain { Body, Behavior, Neural };

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

struct FeatureNode {
    std::string id;
    std::string name;
    FeatureKind kind = FeatureKind::Optional;
    GroupType groupType = GroupType::None;
    FeatureDomain domain = FeatureDomain::Body;
    ParamMap params;
    std::vector<FeatureNode> children;

    bool isLeaf() const noexcept { return children.empty(); }
};

/// Immutable FODA tree. Construction checks well-formedness (unique ids,
/// mandatory root, grouped nodes with >= 2 optional children) and builds an
/// id index; copies share the underlying tree.
class FeatureModel {
public:
    FeatureModel(FeatureNode root, std::string version);

    const FeatureNode& root() const noexcept { return data_->root; }
    const std::string& version() const noexcept { return data_->version; }

    const FeatureNode* find(const std::string& id) const;
    /// Parent of `id`, nullptr for the root or an unknown id.
    const FeatureNode* parent(const std::string& id) const;
    /// Nodes in pre-order (model order).
    const std::vector<const FeatureNode*>& nodes() const noexcept { return data_->preorder; }

private:
    struct Data {
        FeatureNode root;
        std::string version;
        std::vector<const FeatureNode*> preorder;
        std::map<std::string, std::pair<const FeatureNode*, const FeatureNode*>> index;
    };
    std::shared_ptr<const Data> data_;
};

/// A selection of features plus per-feature parameter overrides.
struct Configuration {
    std::string modelVersion;
    std::set<std::string> selected;
    std::map<std::string, ParamMap> bindings;

    bool operator==(const Configuration&) const = default;
};

struct Violation {
    std::string rule;    // unknown-feature, root-selected, mandatory-child, parent-selected,
                         // alternative-exactly-one, or-at-least-one, binding, model-version
    std::string nodeId;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(const std::string& rule) const;
    std::string describe() const;
};

ValidationResult validate(const FeatureModel& model, const Configuration& config);

/// Every valid configuration (empty bindings), in deterministic model order.
/// Throws EnumerationOverflow when more than `cap` exist.
std::vector<Configuration> enumerate(const FeatureModel& model, std::size_t cap);

struct ConfigDiff {
    std::set<std::string> added;
    std::set<std::string> removed;
    /// feature id -> new binding map; nullopt means the binding was dropped.
    std::map<std::string, std::optional<ParamMap>> changedBindings;
    /// alternative-group id -> (previous child, new child)
    std::map<std::string, std::pair<std::string, std::string>> changedGroups;

    bool empty() const noexcept { return added.empty() && removed.empty() && changedBindings.empty(); }
};

ConfigDiff diff(const FeatureModel& model, const Configuration& a, const Configuration& b);
Configuration apply_diff(const Configuration& a, const ConfigDiff& d);

enum class ActivationKind { Sigmoid, BinaryThreshold, Linear };

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

struct SearchSpace {
    std::vector<std::string> inputNames;
    std::vector<std::string> outputNames;
    int hiddenMax = 1;
    ActivationKind activation = ActivationKind::Sigmoid;
    double activationThreshold = 0.5;
    double weightLo = -2.0;
    double weightHi = 2.0;
    double pruneThreshold = 0.25;
    std::vector<std::string> recurrentOutputsFedBack;

    bool operator==(const SearchSpace&) const = default;

    /// Throws ValidationError when an invariant does not hold.
    void check() const;
};

/// Requires validate(model, config).ok().
SearchSpace derive_search_space(const FeatureModel& model, const Configuration& config);

/// Built-in smart street light model.
FeatureModel smart_light_model();
/// Expert configuration: three sensors, light + transmitter outputs, the
/// listening behavior output, five hidden units, sigmoid.
Configuration smart_light_default_config();

/// Copy of `config` with the child of alternative group `groupId` replaced.
Configuration with_alternative(const FeatureModel& model, const Configuration& config,
                               const std::string& groupId, const std::string& childId);

// Canonical JSON (sorted keys).
nlohmann::json to_json(const FeatureModel& model);
FeatureModel feature_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Configuration& config);
Configuration configuration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConfigDiff& d);

std::string to_string(FeatureKind kind);
std::string to_string(GroupType type);
std::string to_string(FeatureDomain domain);

}  // namespace iotagent
