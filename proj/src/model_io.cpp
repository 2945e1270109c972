#include <fstream>
#include <sstream>

#include <json.hpp>

#include "noisecal/models.hpp"

namespace noisecal {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw Error("model document: bad matrix shape");
    return m;
}

json tree_to_json(const TreeParams& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

TreeParams tree_from_json(const json& j) {
    TreeParams t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.value = n.at(4).get<double>();
        t.nodes.push_back(node);
    }
    return t;
}

}  // namespace

std::string serialize_model(const Model& m) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["family"] = family_name(m.family);
    doc["hyperparams"] = m.hyperparams;
    doc["n_features"] = m.n_features;
    doc["y_min"] = m.y_min;
    doc["y_max"] = m.y_max;
    doc["residuals"] = m.residuals;

    json p;
    switch (m.family) {
        case Family::Slr:
        case Family::Mlr: {
            const auto& lp = std::get<LinearParams>(m.params);
            p = {{"intercept", lp.intercept}, {"slopes", lp.slopes}};
            break;
        }
        case Family::Pr: {
            p = {{"coeffs", std::get<PolyParams>(m.params).coeffs}};
            break;
        }
        case Family::Sr: {
            const auto& sp = std::get<SegmentedParams>(m.params);
            p = {{"breakpoint", sp.breakpoint}, {"a1", sp.a1}, {"b1", sp.b1},
                 {"a2", sp.a2},                 {"b2", sp.b2}};
            break;
        }
        case Family::Svr: {
            const auto& sv = std::get<SvrParams>(m.params);
            p = {{"support_x", matrix_to_json(sv.support_x)},
                 {"dual_coef", sv.dual_coef},
                 {"bias", sv.bias},
                 {"gamma", sv.gamma}};
            break;
        }
        case Family::Dt: {
            p = {{"nodes", tree_to_json(std::get<TreeParams>(m.params))}};
            break;
        }
        case Family::Rfr: {
            json trees = json::array();
            for (const auto& t : std::get<ForestParams>(m.params).trees)
                trees.push_back(tree_to_json(t));
            p = {{"trees", trees}};
            break;
        }
    }
    doc["params"] = p;
    return doc.dump(2);
}

Model deserialize_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("model document: invalid JSON: ") + e.what());
    }
    if (doc.value("schema_version", 0) != kSchemaVersion)
        throw Error("model document: unsupported schema version");

    Model m;
    m.family = family_from_name(doc.at("family").get<std::string>());
    m.hyperparams = doc.value("hyperparams", Hyperparams{});
    m.n_features = doc.at("n_features").get<std::size_t>();
    m.y_min = doc.value("y_min", 0.0);
    m.y_max = doc.value("y_max", 0.0);
    m.residuals = doc.value("residuals", std::vector<double>{});

    const json& p = doc.at("params");
    switch (m.family) {
        case Family::Slr:
        case Family::Mlr:
            m.params = LinearParams{p.at("intercept").get<double>(),
                                    p.at("slopes").get<std::vector<double>>()};
            break;
        case Family::Pr:
            m.params = PolyParams{p.at("coeffs").get<std::vector<double>>()};
            break;
        case Family::Sr:
            m.params = SegmentedParams{p.at("breakpoint").get<double>(), p.at("a1").get<double>(),
                                       p.at("b1").get<double>(), p.at("a2").get<double>(),
                                       p.at("b2").get<double>()};
            break;
        case Family::Svr: {
            SvrParams sv;
            sv.support_x = matrix_from_json(p.at("support_x"));
            sv.dual_coef = p.at("dual_coef").get<std::vector<double>>();
            sv.bias = p.at("bias").get<double>();
            sv.gamma = p.at("gamma").get<double>();
            m.params = std::move(sv);
            break;
        }
        case Family::Dt:
            m.params = tree_from_json(p.at("nodes"));
            break;
        case Family::Rfr: {
            ForestParams fp;
            for (const auto& t : p.at("trees")) fp.trees.push_back(tree_from_json(t));
            m.params = std::move(fp);
            break;
        }
    }
    return m;
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write to " + path);
    out << serialize_model(m) << "\n";
    if (!out) throw Error("write failed: " + path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

}  // namespace noisecal
