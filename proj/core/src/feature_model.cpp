#include "iotagent/feature_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "iotagent/errors.hpp"

namespace iotagent {

namespace {

using IdList = std::vector<std::string>;

void index_tree(const FeatureNode& node, const FeatureNode* parent, std::vector<const FeatureNode*>& order,
                std::map<std::string, std::pair<const FeatureNode*, const FeatureNode*>>& index) {
    if (node.id.empty()) throw ValidationError("feature id must not be empty", node.name);
    if (!index.emplace(node.id, std::make_pair(&node, parent)).second)
        throw ValidationError("duplicate feature id", node.id);
    if (node.groupType != GroupType::None) {
        if (node.children.size() < 2) throw ValidationError("group needs at least two children", node.id);
        for (const auto& c : node.children)
            if (c.kind == FeatureKind::Mandatory)
                throw ValidationError("grouped child cannot be mandatory", c.id);
    }
    order.push_back(&node);
    for (const auto& c : node.children) index_tree(c, &node, order, index);
}

ParamMap effective_params(const FeatureNode& node, const Configuration& config) {
    ParamMap params = node.params;
    if (auto it = config.bindings.find(node.id); it != config.bindings.end())
        for (const auto& [k, v] : it->second) params[k] = v;
    return params;
}

const std::string* string_param(const ParamMap& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) return nullptr;
    return std::get_if<std::string>(&it->second);
}

const double* number_param(const ParamMap& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) return nullptr;
    return std::get_if<double>(&it->second);
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
    return a * b;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
    return a > std::numeric_limits<std::size_t>::max() - b ? std::numeric_limits<std::size_t>::max() : a + b;
}

// Number of valid selections of the subtree rooted at `node`, given it is selected.
std::size_t count_selected(const FeatureNode& node) {
    switch (node.groupType) {
    case GroupType::None: {
        std::size_t n = 1;
        for (const auto& c : node.children) {
            const std::size_t sub = count_selected(c);
            n = saturating_mul(n, c.kind == FeatureKind::Mandatory ? sub : saturating_add(sub, 1));
        }
        return n;
    }
    case GroupType::Alternative: {
        std::size_t n = 0;
        for (const auto& c : node.children) n = saturating_add(n, count_selected(c));
        return n;
    }
    case GroupType::Or: {
        std::size_t n = 1;
        for (const auto& c : node.children) n = saturating_mul(n, saturating_add(count_selected(c), 1));
        return n - 1;
    }
    }
    return 0;
}

std::vector<IdList> product(const std::vector<IdList>& lhs, const std::vector<IdList>& rhs) {
    std::vector<IdList> out;
    out.reserve(lhs.size() * rhs.size());
    for (const auto& a : lhs)
        for (const auto& b : rhs) {
            IdList merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            out.push_back(std::move(merged));
        }
    return out;
}

std::vector<IdList> selections_of(const FeatureNode& node) {
    std::vector<IdList> result;
    switch (node.groupType) {
    case GroupType::None: {
        result = {IdList{node.id}};
        for (const auto& c : node.children) {
            auto sub = selections_of(c);
            if (c.kind == FeatureKind::Optional) sub.insert(sub.begin(), IdList{});
            result = product(result, sub);
        }
        break;
    }
    case GroupType::Alternative: {
        for (const auto& c : node.children)
            for (auto& s : selections_of(c)) {
                IdList ids{node.id};
                ids.insert(ids.end(), s.begin(), s.end());
                result.push_back(std::move(ids));
            }
        break;
    }
    case GroupType::Or: {
        result = {IdList{node.id}};
        for (const auto& c : node.children) {
            auto sub = selections_of(c);
            sub.insert(sub.begin(), IdList{});
            result = product(result, sub);
        }
        // drop the combination where no child was chosen (it is first: all "not selected")
        result.erase(result.begin());
        break;
    }
    }
    return result;
}

FeatureNode make_node(std::string id, std::string name, FeatureKind kind, FeatureDomain domain,
                      GroupType group = GroupType::None, ParamMap params = {},
                      std::vector<FeatureNode> children = {}) {
    FeatureNode n;
    n.id = std::move(id);
    n.name = std::move(name);
    n.kind = kind;
    n.domain = domain;
    n.groupType = group;
    n.params = std::move(params);
    n.children = std::move(children);
    return n;
}

template <typename E>
E enum_from(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    throw ValidationError("unknown " + std::string(what) + " '" + s + "'", what);
}

nlohmann::json param_to_json(const ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

ParamMap params_from_json(const nlohmann::json& j, const std::string& path) {
    ParamMap out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw ValidationError("params must be an object", path);
    for (const auto& [k, v] : j.items()) {
        if (v.is_number()) out[k] = v.get<double>();
        else if (v.is_string()) out[k] = v.get<std::string>();
        else throw ValidationError("param must be a number or string", path + "." + k);
    }
    return out;
}

nlohmann::json params_to_json(const ParamMap& params) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : params) j[k] = param_to_json(v);
    return j;
}

nlohmann::json node_to_json(const FeatureNode& n) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : n.children) children.push_back(node_to_json(c));
    return {{"id", n.id},
            {"name", n.name},
            {"kind", to_string(n.kind)},
            {"groupType", to_string(n.groupType)},
            {"domain", to_string(n.domain)},
            {"params", params_to_json(n.params)},
            {"children", std::move(children)}};
}

FeatureNode node_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError("feature node must be an object", path);
    FeatureNode n;
    try {
        n.id = j.at("id").get<std::string>();
        n.name = j.value("name", n.id);
        n.kind = enum_from<FeatureKind>(j.at("kind").get<std::string>(),
                                        {{"mandatory", FeatureKind::Mandatory}, {"optional", FeatureKind::Optional}},
                                        "kind");
        n.groupType = enum_from<GroupType>(
            j.value("groupType", std::string("none")),
            {{"none", GroupType::None}, {"alternative", GroupType::Alternative}, {"or", GroupType::Or}}, "groupType");
        n.domain = enum_from<FeatureDomain>(
            j.at("domain").get<std::string>(),
            {{"body", FeatureDomain::Body}, {"behavior", FeatureDomain::Behavior}, {"neural", FeatureDomain::Neural}},
            "domain");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(e.what(), path);
    }
    n.params = params_from_json(j.value("params", nlohmann::json::object()), path + ".params");
    if (auto it = j.find("children"); it != j.end()) {
        if (!it->is_array()) throw ValidationError("children must be an array", path + ".children");
        for (std::size_t i = 0; i < it->size(); ++i)
            n.children.push_back(node_from_json((*it)[i], path + ".children[" + std::to_string(i) + "]"));
    }
    return n;
}

}  // namespace

FeatureModel::FeatureModel(FeatureNode root, std::string version) {
    if (root.kind != FeatureKind::Mandatory) throw ValidationError("root must be mandatory", root.id);
    auto data = std::make_shared<Data>();
    data->root = std::move(root);
    data->version = std::move(version);
    index_tree(data->root, nullptr, data->preorder, data->index);
    data_ = std::move(data);
}

const FeatureNode* FeatureModel::find(const std::string& id) const {
    auto it = data_->index.find(id);
    return it == data_->index.end() ? nullptr : it->second.first;
}

const FeatureNode* FeatureModel::parent(const std::string& id) const {
    auto it = data_->index.find(id);
    return it == data_->index.end() ? nullptr : it->second.second;
}

bool ValidationResult::has(const std::string& rule) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; });
}

std::string ValidationResult::describe() const {
    std::ostringstream out;
    for (const auto& v : violations) out << v.rule << " [" << v.nodeId << "] " << v.message << '\n';
    return out.str();
}

ValidationResult validate(const FeatureModel& model, const Configuration& config) {
    ValidationResult result;
    auto add = [&](std::string rule, std::string id, std::string msg) {
        result.violations.push_back({std::move(rule), std::move(id), std::move(msg)});
    };

    if (!config.modelVersion.empty() && config.modelVersion != model.version())
        add("model-version", model.root().id,
            "configuration targets model version '" + config.modelVersion + "', model is '" + model.version() + "'");

    for (const auto& id : config.selected)
        if (!model.find(id)) add("unknown-feature", id, "feature is not part of the model");

    const auto& root = model.root();
    if (!config.selected.contains(root.id)) add("root-selected", root.id, "root feature must be selected");

    for (const FeatureNode* node : model.nodes()) {
        if (!config.selected.contains(node->id)) continue;
        if (const FeatureNode* p = model.parent(node->id); p && !config.selected.contains(p->id))
            add("parent-selected", node->id, "selected feature's parent '" + p->id + "' is not selected");

        std::size_t chosen = 0;
        for (const auto& c : node->children) {
            const bool sel = config.selected.contains(c.id);
            chosen += sel ? 1 : 0;
            if (node->groupType == GroupType::None && c.kind == FeatureKind::Mandatory && !sel)
                add("mandatory-child", c.id, "mandatory child of '" + node->id + "' is not selected");
        }
        if (node->groupType == GroupType::Alternative && chosen != 1)
            add("alternative-exactly-one", node->id,
                "alternative group has " + std::to_string(chosen) + " selected children, expected exactly one");
        if (node->groupType == GroupType::Or && chosen == 0)
            add("or-at-least-one", node->id, "or group needs at least one selected child");
    }

    for (const auto& [id, params] : config.bindings) {
        const FeatureNode* node = model.find(id);
        if (!node) {
            add("unknown-feature", id, "binding targets a feature that is not part of the model");
            continue;
        }
        if (!config.selected.contains(id)) add("binding", id, "binding targets an unselected feature");
        for (const auto& [key, value] : params) {
            auto declared = node->params.find(key);
            if (declared == node->params.end())
                add("binding", id, "parameter '" + key + "' is not declared by the feature");
            else if (declared->second.index() != value.index())
                add("binding", id, "parameter '" + key + "' has the wrong type");
        }
    }
    return result;
}

std::vector<Configuration> enumerate(const FeatureModel& model, std::size_t cap) {
    const std::size_t count = count_selected(model.root());
    if (count > cap)
        throw EnumerationOverflow("model has " +
                                  (count == std::numeric_limits<std::size_t>::max() ? std::string("too many")
                                                                                     : std::to_string(count)) +
                                  " valid configurations, cap is " + std::to_string(cap));
    std::vector<Configuration> out;
    out.reserve(count);
    for (auto& ids : selections_of(model.root())) {
        Configuration c;
        c.modelVersion = model.version();
        c.selected.insert(ids.begin(), ids.end());
        out.push_back(std::move(c));
    }
    return out;
}

ConfigDiff diff(const FeatureModel& model, const Configuration& a, const Configuration& b) {
    if (a.modelVersion != b.modelVersion)
        throw ValidationError("configurations target different model versions ('" + a.modelVersion + "' vs '" +
                                  b.modelVersion + "')",
                              "modelVersion");
    if (!a.modelVersion.empty() && a.modelVersion != model.version())
        throw ValidationError("configurations do not target model version '" + model.version() + "'",
                              "modelVersion");
    ConfigDiff d;
    std::set_difference(b.selected.begin(), b.selected.end(), a.selected.begin(), a.selected.end(),
                        std::inserter(d.added, d.added.end()));
    std::set_difference(a.selected.begin(), a.selected.end(), b.selected.begin(), b.selected.end(),
                        std::inserter(d.removed, d.removed.end()));

    std::set<std::string> keys;
    for (const auto& [k, _] : a.bindings) keys.insert(k);
    for (const auto& [k, _] : b.bindings) keys.insert(k);
    for (const auto& k : keys) {
        auto ia = a.bindings.find(k);
        auto ib = b.bindings.find(k);
        if (ib == b.bindings.end()) d.changedBindings[k] = std::nullopt;
        else if (ia == a.bindings.end() || ia->second != ib->second) d.changedBindings[k] = ib->second;
    }

    for (const FeatureNode* node : model.nodes()) {
        if (node->groupType != GroupType::Alternative) continue;
        if (!a.selected.contains(node->id) || !b.selected.contains(node->id)) continue;
        std::string from, to;
        for (const auto& c : node->children) {
            if (a.selected.contains(c.id)) from = c.id;
            if (b.selected.contains(c.id)) to = c.id;
        }
        if (from != to) d.changedGroups[node->id] = {from, to};
    }
    return d;
}

Configuration apply_diff(const Configuration& a, const ConfigDiff& d) {
    Configuration b = a;
    for (const auto& id : d.removed) b.selected.erase(id);
    b.selected.insert(d.added.begin(), d.added.end());
    for (const auto& [id, value] : d.changedBindings) {
        if (value) b.bindings[id] = *value;
        else b.bindings.erase(id);
    }
    return b;
}

std::string to_string(ActivationKind kind) {
    switch (kind) {
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::BinaryThreshold: return "binaryThreshold";
    case ActivationKind::Linear: return "linear";
    }
    return "sigmoid";
}

ActivationKind activation_from_string(const std::string& name) {
    return enum_from<ActivationKind>(name,
                                     {{"sigmoid", ActivationKind::Sigmoid},
                                      {"binaryThreshold", ActivationKind::BinaryThreshold},
                                      {"linear", ActivationKind::Linear}},
                                     "activation");
}

void SearchSpace::check() const {
    auto unique_non_empty = [](const std::vector<std::string>& names, const char* what) {
        if (names.empty()) throw ValidationError("must not be empty", what);
        std::set<std::string> seen(names.begin(), names.end());
        if (seen.size() != names.size()) throw ValidationError("contains duplicates", what);
    };
    unique_non_empty(inputNames, "inputNames");
    unique_non_empty(outputNames, "outputNames");
    if (hiddenMax < 1) throw ValidationError("must be positive", "hiddenMax");
    if (!(weightLo < 0.0 && 0.0 < weightHi)) throw ValidationError("requires lo < 0 < hi", "weightRange");
    if (!(pruneThreshold > 0.0 && pruneThreshold < weightHi))
        throw ValidationError("requires 0 < pruneThreshold < hi", "pruneThreshold");
    for (const auto& r : recurrentOutputsFedBack)
        if (std::find(outputNames.begin(), outputNames.end(), r) == outputNames.end())
            throw ValidationError("fed-back output '" + r + "' is not an output", "recurrentOutputsFedBack");
}

SearchSpace derive_search_space(const FeatureModel& model, const Configuration& config) {
    if (auto v = validate(model, config); !v.ok())
        throw ValidationError("configuration is invalid: " + v.describe(), "config");

    SearchSpace space;
    std::vector<std::string> fedBackInputs;
    bool haveActivation = false;
    bool haveHidden = false;
    for (const FeatureNode* node : model.nodes()) {
        if (!config.selected.contains(node->id)) continue;
        const ParamMap params = effective_params(*node, config);
        if (const auto* in = string_param(params, "input")) space.inputNames.push_back(*in);
        if (const auto* out = string_param(params, "output")) {
            space.outputNames.push_back(*out);
            if (const auto* fb = string_param(params, "feedbackInput")) {
                space.recurrentOutputsFedBack.push_back(*out);
                fedBackInputs.push_back(*fb);
            }
        }
        if (const auto* act = string_param(params, "activation")) {
            if (haveActivation) throw ValidationError("more than one activation selected", node->id);
            space.activation = activation_from_string(*act);
            if (const auto* th = number_param(params, "threshold")) space.activationThreshold = *th;
            haveActivation = true;
        }
        if (const auto* h = number_param(params, "hiddenMax")) {
            if (haveHidden) throw ValidationError("more than one hiddenMax selected", node->id);
            if (*h < 1.0 || std::floor(*h) != *h) throw ValidationError("hiddenMax must be a positive integer", node->id);
            space.hiddenMax = static_cast<int>(*h);
            haveHidden = true;
        }
        if (const auto* lo = number_param(params, "weightLo")) space.weightLo = *lo;
        if (const auto* hi = number_param(params, "weightHi")) space.weightHi = *hi;
        if (const auto* p = number_param(params, "pruneThreshold")) space.pruneThreshold = *p;
    }
    if (!haveActivation) throw ValidationError("no activation function selected", "activation");
    if (!haveHidden) throw ValidationError("no hidden layer size selected", "hiddenMax");
    space.inputNames.insert(space.inputNames.end(), fedBackInputs.begin(), fedBackInputs.end());
    space.check();
    return space;
}

FeatureModel smart_light_model() {
    using K = FeatureKind;
    using D = FeatureDomain;
    using G = GroupType;
    constexpr auto M = K::Mandatory;
    constexpr auto O = K::Optional;

    auto lightSensor = make_node(
        "lightSensor", "Light sensor", O, D::Body, G::Alternative, {{"input", std::string("light")}},
        {make_node("lightBrandA", "Brand A lux sensor", O, D::Body, G::None, {{"energy", 0.02}}),
         make_node("lightBrandB", "Brand B lux sensor", O, D::Body, G::None, {{"energy", 0.05}})});
    auto sensors = make_node(
        "sensors", "Sensors", M, D::Body, G::Or, {},
        {std::move(lightSensor),
         make_node("motionSensor", "Motion sensor", O, D::Body, G::None, {{"input", std::string("motion")}}),
         make_node("wirelessReceiver", "Wireless receiver", O, D::Body, G::None,
                   {{"input", std::string("wirelessReceiver")}})});
    auto input = make_node("input", "Input", M, D::Body, G::None, {}, {std::move(sensors)});

    auto activation = make_node(
        "activation", "Activation function", M, D::Neural, G::Alternative, {},
        {make_node("sigmoid", "Sigmoid", O, D::Neural, G::None, {{"activation", std::string("sigmoid")}}),
         make_node("binaryThreshold", "Binary with threshold", O, D::Neural, G::None,
                   {{"activation", std::string("binaryThreshold")}, {"threshold", 0.5}}),
         make_node("linear", "Linear", O, D::Neural, G::None, {{"activation", std::string("linear")}})});
    auto hidden = make_node("hiddenMax", "Maximum hidden units", M, D::Neural, G::Alternative, {},
                            {make_node("two", "Two", O, D::Neural, G::None, {{"hiddenMax", 2.0}}),
                             make_node("five", "Five", O, D::Neural, G::None, {{"hiddenMax", 5.0}})});
    auto decision = make_node("decision", "Decision", M, D::Neural, G::None,
                              {{"weightLo", -2.0}, {"weightHi", 2.0}, {"pruneThreshold", 0.25}},
                              {std::move(activation), std::move(hidden)});

    auto output = make_node(
        "output", "Output", M, D::Body, G::Or, {},
        {make_node("listeningDecision", "Listening decision", O, D::Behavior, G::None,
                   {{"output", std::string("listeningDecision")}, {"feedbackInput", std::string("prevListening")}}),
         make_node("wirelessTransmitter", "Wireless transmitter", O, D::Body, G::None,
                   {{"output", std::string("wirelessTransmitter")}}),
         make_node("lightActuator", "Light actuator (OFF/DIM/ON)", O, D::Body, G::None,
                   {{"output", std::string("lightDecision")}, {"levels", 3.0}})});

    auto root = make_node("smartLight", "Smart light agent", M, D::Body, G::None, {},
                          {std::move(input), std::move(decision), std::move(output),
                           make_node("notifications", "Notification thresholds", O, D::Behavior),
                           make_node("energyReport", "Energy consumption report", O, D::Body)});
    return FeatureModel(std::move(root), "smart-light/1");
}

Configuration smart_light_default_config() {
    Configuration c;
    c.modelVersion = "smart-light/1";
    c.selected = {"smartLight",   "input",          "sensors",         "lightSensor",       "lightBrandA",
                  "motionSensor", "wirelessReceiver", "decision",      "activation",        "sigmoid",
                  "hiddenMax",    "five",           "output",          "listeningDecision", "wirelessTransmitter",
                  "lightActuator"};
    return c;
}

Configuration with_alternative(const FeatureModel& model, const Configuration& config, const std::string& groupId,
                               const std::string& childId) {
    const FeatureNode* group = model.find(groupId);
    if (!group || group->groupType != GroupType::Alternative)
        throw ValidationError("not an alternative group", groupId);
    const FeatureNode* child = nullptr;
    for (const auto& c : group->children)
        if (c.id == childId) child = &c;
    if (!child) throw ValidationError("'" + childId + "' is not a child of the group", groupId);

    Configuration out = config;
    std::function<void(const FeatureNode&)> drop = [&](const FeatureNode& n) {
        out.selected.erase(n.id);
        out.bindings.erase(n.id);
        for (const auto& c : n.children) drop(c);
    };
    for (const auto& c : group->children) drop(c);
    // select the child and its mandatory descendants; groups below pick their first child
    std::function<void(const FeatureNode&)> pick = [&](const FeatureNode& n) {
        out.selected.insert(n.id);
        if (n.groupType == GroupType::None) {
            for (const auto& c : n.children)
                if (c.kind == FeatureKind::Mandatory) pick(c);
        } else {
            pick(n.children.front());
        }
    };
    pick(*child);
    return out;
}

nlohmann::json to_json(const FeatureModel& model) {
    return {{"version", model.version()}, {"root", node_to_json(model.root())}};
}

FeatureModel feature_model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("root") || !j.contains("version"))
        throw ValidationError("feature model needs 'version' and 'root'", "model");
    if (!j.at("version").is_string()) throw ValidationError("must be a string", "version");
    return FeatureModel(node_from_json(j.at("root"), "root"), j.at("version").get<std::string>());
}

nlohmann::json to_json(const Configuration& config) {
    nlohmann::json bindings = nlohmann::json::object();
    for (const auto& [id, params] : config.bindings) bindings[id] = params_to_json(params);
    return {{"modelVersion", config.modelVersion},
            {"selected", std::vector<std::string>(config.selected.begin(), config.selected.end())},
            {"bindings", std::move(bindings)}};
}

Configuration configuration_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("configuration must be an object", "config");
    Configuration c;
    try {
        c.modelVersion = j.value("modelVersion", std::string{});
        const auto& sel = j.at("selected");
        if (!sel.is_array()) throw ValidationError("must be an array", "selected");
        for (const auto& id : sel) c.selected.insert(id.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(e.what(), "config");
    }
    if (auto it = j.find("bindings"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw ValidationError("must be an object", "bindings");
        for (const auto& [id, params] : it->items()) c.bindings[id] = params_from_json(params, "bindings." + id);
    }
    return c;
}

nlohmann::json to_json(const ConfigDiff& d) {
    nlohmann::json bindings = nlohmann::json::object();
    for (const auto& [id, v] : d.changedBindings) bindings[id] = v ? params_to_json(*v) : nlohmann::json(nullptr);
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [id, change] : d.changedGroups) groups[id] = {{"from", change.first}, {"to", change.second}};
    return {{"added", std::vector<std::string>(d.added.begin(), d.added.end())},
            {"removed", std::vector<std::string>(d.removed.begin(), d.removed.end())},
            {"changedBindings", std::move(bindings)},
            {"changedGroups", std::move(groups)}};
}

std::string to_string(FeatureKind kind) { return kind == FeatureKind::Mandatory ? "mandatory" : "optional"; }

std::string to_string(GroupType type) {
    switch (type) {
    case GroupType::None: return "none";
    case GroupType::Alternative: return "alternative";
    case GroupType::Or: return "or";
    }
    return "none";
}

std::string to_string(FeatureDomain domain) {
    switch (domain) {
    case FeatureDomain::Body: return "body";
    case FeatureDomain::Behavior: return "behavior";
    case FeatureDomain::Neural: return "neural";
    }
    return "body";
}

}  // namespace iotagent
