#include "cdpg/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cdpg {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::ostringstream os;
    os << "invalid config (" << issues.size() << " issue" << (issues.size() == 1 ? "" : "s")
       << "):";
    for (const auto& s : issues) os << "\n  - " << s;
    return os.str();
}

/// Accumulates diagnostics; extraction helpers return fallbacks on failure so
/// the walk can continue and report everything at once.
struct Checker {
    std::vector<std::string> issues;

    void fail(const std::string& msg) { issues.push_back(msg); }

    const json* section(const json& doc, const std::string& key, bool required = true) {
        if (!doc.contains(key)) {
            if (required) fail("missing section '" + key + "'");
            return nullptr;
        }
        if (!doc.at(key).is_object()) {
            fail("section '" + key + "' must be an object");
            return nullptr;
        }
        return &doc.at(key);
    }

    void known_keys(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) fail(path + ": unknown key '" + key + "'");
        }
    }

    double number(const json& obj, const std::string& key, const std::string& path,
                  double fallback = 0.0) {
        if (!obj.contains(key)) {
            fail(path + ": missing '" + key + "'");
            return fallback;
        }
        if (!obj.at(key).is_number()) {
            fail(path + "." + key + ": expected a number");
            return fallback;
        }
        return obj.at(key).get<double>();
    }

    long integer(const json& obj, const std::string& key, const std::string& path,
                 long fallback = 0) {
        if (!obj.contains(key)) {
            fail(path + ": missing '" + key + "'");
            return fallback;
        }
        if (!obj.at(key).is_number_integer()) {
            fail(path + "." + key + ": expected an integer");
            return fallback;
        }
        return obj.at(key).get<long>();
    }

    std::vector<double> number_list(const json& obj, const std::string& key,
                                    const std::string& path) {
        if (!obj.contains(key)) {
            fail(path + ": missing '" + key + "'");
            return {};
        }
        const json& v = obj.at(key);
        if (!v.is_array()) {
            fail(path + "." + key + ": expected an array of numbers");
            return {};
        }
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) {
                fail(path + "." + key + ": expected an array of numbers");
                return {};
            }
            out.push_back(x.get<double>());
        }
        return out;
    }

    /// Scalar broadcast to dim, or an array of exactly dim numbers.
    VectorXd block(const json& obj, const std::string& key, const std::string& path, int dim) {
        if (!obj.contains(key)) {
            fail(path + ": missing '" + key + "'");
            return VectorXd::Zero(dim);
        }
        const json& v = obj.at(key);
        if (v.is_number()) return VectorXd::Constant(dim, v.get<double>());
        if (v.is_array()) {
            if (static_cast<int>(v.size()) != dim) {
                fail(path + "." + key + ": expected " + std::to_string(dim) + " entries, got " +
                     std::to_string(v.size()));
                return VectorXd::Zero(dim);
            }
            VectorXd out(dim);
            for (int k = 0; k < dim; ++k) {
                if (!v.at(k).is_number()) {
                    fail(path + "." + key + ": expected numeric entries");
                    return VectorXd::Zero(dim);
                }
                out(k) = v.at(k).get<double>();
            }
            return out;
        }
        fail(path + "." + key + ": expected a number or an array");
        return VectorXd::Zero(dim);
    }

    std::vector<std::pair<int, int>> edge_list(const json& obj, const std::string& key,
                                               const std::string& path, int max_index,
                                               const std::string& scope) {
        std::vector<std::pair<int, int>> out;
        if (!obj.contains(key)) {
            fail(path + ": missing '" + key + "'");
            return out;
        }
        const json& v = obj.at(key);
        if (!v.is_array()) {
            fail(path + "." + key + ": expected an array of [j,l] pairs");
            return out;
        }
        for (const auto& e : v) {
            if (!e.is_array() || e.size() != 2 || !e.at(0).is_number_integer() ||
                !e.at(1).is_number_integer()) {
                fail(path + "." + key + ": each edge must be a pair of integers");
                continue;
            }
            const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
            if (a == b) {
                fail(scope + ": self-loop edge [" + std::to_string(a) + "," +
                     std::to_string(b) + "]");
                continue;
            }
            if (a < 1 || a > max_index || b < 1 || b > max_index) {
                fail(scope + ": edge [" + std::to_string(a) + "," + std::to_string(b) +
                     "] out of range 1.." + std::to_string(max_index));
                continue;
            }
            out.emplace_back(a, b);
        }
        return out;
    }

    FunctionSpec smooth_spec(const json& obj, const std::string& path, int M) {
        if (!obj.is_object() || !obj.contains("type") || !obj.at("type").is_string()) {
            fail(path + ": expected an object with a 'type' string");
            return Quadratic{VectorXd::Ones(M), VectorXd::Zero(M)};
        }
        const std::string type = obj.at("type").get<std::string>();
        if (type == "quadratic") {
            known_keys(obj, path, {"type", "a", "b"});
            return Quadratic{block(obj, "a", path, M), block(obj, "b", path, M)};
        }
        if (type == "quad_exp") {
            known_keys(obj, path, {"type", "q2", "q1", "e1", "e2"});
            return QuadExp{number(obj, "q2", path), number(obj, "q1", path),
                           number(obj, "e1", path), number(obj, "e2", path)};
        }
        fail(path + ": unknown smooth function type '" + type + "'");
        return Quadratic{VectorXd::Ones(M), VectorXd::Zero(M)};
    }

    FunctionSpec prox_spec(const json& obj, const std::string& path, int M) {
        if (!obj.is_object() || !obj.contains("type") || !obj.at("type").is_string()) {
            fail(path + ": expected an object with a 'type' string");
            return Zero{};
        }
        const std::string type = obj.at("type").get<std::string>();
        if (type == "box") {
            known_keys(obj, path, {"type", "lower", "upper"});
            return BoxIndicator{block(obj, "lower", path, M), block(obj, "upper", path, M)};
        }
        if (type == "norm") {
            known_keys(obj, path, {"type", "order", "weight"});
            return NormPenalty{static_cast<int>(integer(obj, "order", path, 1)),
                               number(obj, "weight", path, 1.0)};
        }
        if (type == "zero") {
            known_keys(obj, path, {"type"});
            return Zero{};
        }
        fail(path + ": unknown prox function type '" + type + "'");
        return Zero{};
    }
};

json spec_to_json(const FunctionSpec& spec) {
    json out;
    if (const auto* q = std::get_if<Quadratic>(&spec)) {
        out["type"] = "quadratic";
        out["a"] = std::vector<double>(q->a.begin(), q->a.end());
        out["b"] = std::vector<double>(q->b.begin(), q->b.end());
    } else if (const auto* e = std::get_if<QuadExp>(&spec)) {
        out["type"] = "quad_exp";
        out["q2"] = e->q2;
        out["q1"] = e->q1;
        out["e1"] = e->e1;
        out["e2"] = e->e2;
    } else if (const auto* b = std::get_if<BoxIndicator>(&spec)) {
        out["type"] = "box";
        out["lower"] = std::vector<double>(b->lower.begin(), b->lower.end());
        out["upper"] = std::vector<double>(b->upper.begin(), b->upper.end());
    } else if (const auto* n = std::get_if<NormPenalty>(&spec)) {
        out["type"] = "norm";
        out["order"] = n->order;
        out["weight"] = n->weight;
    } else {
        out["type"] = "zero";
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> found)
    : std::runtime_error(join_issues(found)), issues(std::move(found)) {}

LoadedConfig parse_config_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({origin + ": " + e.what()});
    }

    Checker ck;
    LoadedConfig out;
    out.scenario.name = origin;

    if (!doc.is_object()) throw ConfigError({origin + ": top level must be an object"});
    ck.known_keys(doc, origin, {"network", "agents", "coupling", "weights", "run"});

    // --- network -----------------------------------------------------------
    int total = 0;
    if (const json* net = ck.section(doc, "network")) {
        ck.known_keys(*net, "network", {"clusters", "global_edges"});
        if (!net->contains("clusters") || !net->at("clusters").is_array() ||
            net->at("clusters").empty()) {
            ck.fail("network: 'clusters' must be a nonempty array");
        } else {
            int i = 0;
            for (const auto& cj : net->at("clusters")) {
                ++i;
                const std::string path = "network.clusters[" + std::to_string(i) + "]";
                if (!cj.is_object()) {
                    ck.fail(path + ": expected an object");
                    continue;
                }
                ck.known_keys(cj, path, {"size", "intra_edges"});
                ScenarioSpec::Cluster cl;
                cl.size = static_cast<int>(ck.integer(cj, "size", path, 1));
                if (cl.size < 1) ck.fail(path + ".size: must be >= 1");
                cl.intra_edges = ck.edge_list(cj, "intra_edges", path, std::max(cl.size, 1),
                                              "cluster " + std::to_string(i));
                total += std::max(cl.size, 1);
                out.scenario.clusters.push_back(std::move(cl));
            }
        }
        out.scenario.global_edges =
            ck.edge_list(*net, "global_edges", "network", std::max(total, 1), "global graph");
    }
    const int N = static_cast<int>(out.scenario.clusters.size());

    // --- coupling ----------------------------------------------------------
    int M = 1, B = 1;
    if (const json* cp = ck.section(doc, "coupling")) {
        ck.known_keys(*cp, "coupling", {"A", "b", "mode", "reference"});
        const std::vector<double> b_vals = ck.number_list(*cp, "b", "coupling");
        const std::vector<double> a_vals = ck.number_list(*cp, "A", "coupling");
        B = std::max<int>(1, static_cast<int>(b_vals.size()));
        if (b_vals.empty()) ck.fail("coupling.b: must be a nonempty array");
        if (N > 0 && !a_vals.empty()) {
            if (a_vals.size() % (static_cast<size_t>(B) * N) != 0) {
                ck.fail("coupling.A: length " + std::to_string(a_vals.size()) +
                        " is not divisible by B*N = " + std::to_string(B * N));
            } else {
                M = static_cast<int>(a_vals.size()) / (B * N);
                out.scenario.A = Eigen::Map<const Eigen::Matrix<
                    double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    a_vals.data(), B, N * M);
            }
        }
        out.scenario.b = Eigen::Map<const VectorXd>(
            b_vals.data(), static_cast<Eigen::Index>(b_vals.size()));
        if (cp->contains("mode")) {
            const json& m = cp->at("mode");
            if (m.is_string() && m.get<std::string>() == "inequality")
                out.scenario.mode = CouplingMode::Inequality;
            else if (m.is_string() && m.get<std::string>() == "equality")
                out.scenario.mode = CouplingMode::Equality;
            else
                ck.fail("coupling.mode: expected \"inequality\" or \"equality\"");
        } else {
            ck.fail("coupling: missing 'mode'");
        }
        if (cp->contains("reference")) {
            const json& ref = cp->at("reference");
            if (!ref.is_object()) {
                ck.fail("coupling.reference: expected an object");
            } else {
                ck.known_keys(ref, "coupling.reference", {"x_star", "objective"});
                const std::vector<double> xs =
                    ck.number_list(ref, "x_star", "coupling.reference");
                if (static_cast<int>(xs.size()) == N * M)
                    out.scenario.reference_primal = Eigen::Map<const VectorXd>(
                        xs.data(), static_cast<Eigen::Index>(xs.size()));
                else
                    ck.fail("coupling.reference.x_star: expected " + std::to_string(N * M) +
                            " entries");
                out.scenario.reference_objective =
                    ck.number(ref, "objective", "coupling.reference");
            }
        }
    }

    // --- agents ------------------------------------------------------------
    if (const json* ag = ck.section(doc, "agents")) {
        std::vector<std::string> expected;
        for (int i = 1; i <= N; ++i)
            for (int j = 1; j <= out.scenario.clusters[i - 1].size; ++j)
                expected.push_back(std::to_string(i) + "." + std::to_string(j));
        for (const auto& [key, value] : ag->items()) {
            (void)value;
            if (std::find(expected.begin(), expected.end(), key) == expected.end())
                ck.fail("agents: unexpected key '" + key + "'");
        }
        for (const auto& key : expected) {
            const std::string path = "agents." + key;
            if (!ag->contains(key)) {
                ck.fail("agents: missing entry '" + key + "'");
                out.scenario.agents.push_back(
                    {Quadratic{VectorXd::Ones(M), VectorXd::Zero(M)}, Zero{}});
                continue;
            }
            const json& aj = ag->at(key);
            if (!aj.is_object()) {
                ck.fail(path + ": expected an object");
                out.scenario.agents.push_back(
                    {Quadratic{VectorXd::Ones(M), VectorXd::Zero(M)}, Zero{}});
                continue;
            }
            ck.known_keys(aj, path, {"f", "g"});
            ScenarioSpec::AgentFunctions fns{Quadratic{VectorXd::Ones(M), VectorXd::Zero(M)},
                                             Zero{}};
            if (aj.contains("f"))
                fns.f = ck.smooth_spec(aj.at("f"), path + ".f", M);
            else
                ck.fail(path + ": missing 'f'");
            if (aj.contains("g"))
                fns.g = ck.prox_spec(aj.at("g"), path + ".g", M);
            else
                ck.fail(path + ": missing 'g'");
            out.scenario.agents.push_back(std::move(fns));
        }
    }

    // --- weights -----------------------------------------------------------
    if (const json* w = ck.section(doc, "weights")) {
        ck.known_keys(*w, "weights", {"kappa", "eta", "pi"});
        out.scenario.kappa = ck.number_list(*w, "kappa", "weights");
        out.scenario.eta = ck.number_list(*w, "eta", "weights");
        out.scenario.pi = ck.number_list(*w, "pi", "weights");
        if (static_cast<int>(out.scenario.kappa.size()) != N)
            ck.fail("weights.kappa: expected " + std::to_string(N) + " entries");
        if (static_cast<int>(out.scenario.eta.size()) != total)
            ck.fail("weights.eta: expected " + std::to_string(total) + " entries");
        if (static_cast<int>(out.scenario.pi.size()) != total)
            ck.fail("weights.pi: expected " + std::to_string(total) + " entries");
    }

    // --- run ---------------------------------------------------------------
    if (doc.contains("run")) {
        if (const json* run = ck.section(doc, "run")) {
            ck.known_keys(*run, "run",
                          {"max_iters", "tol", "safety", "record_every", "workers", "seed"});
            RunSettings d;
            if (run->contains("max_iters"))
                out.run.max_iters = ck.integer(*run, "max_iters", "run", d.max_iters);
            if (run->contains("tol")) out.run.tol = ck.number(*run, "tol", "run", d.tol);
            if (run->contains("safety"))
                out.run.safety = ck.number(*run, "safety", "run", d.safety);
            if (run->contains("record_every"))
                out.run.record_every = ck.integer(*run, "record_every", "run", d.record_every);
            if (run->contains("workers"))
                out.run.workers =
                    static_cast<int>(ck.integer(*run, "workers", "run", d.workers));
            if (run->contains("seed"))
                out.run.seed =
                    static_cast<std::uint64_t>(ck.integer(*run, "seed", "run", 0));
            if (out.run.max_iters < 1) ck.fail("run.max_iters: must be >= 1");
            if (out.run.tol <= 0) ck.fail("run.tol: must be positive");
            if (out.run.record_every < 1) ck.fail("run.record_every: must be >= 1");
            if (out.run.workers < 1) ck.fail("run.workers: must be >= 1");
        }
    }

    if (!ck.issues.empty()) throw ConfigError(std::move(ck.issues));
    return out;
}

LoadedConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string export_config(const ScenarioSpec& scenario, const RunSettings& run) {
    json doc;
    json clusters = json::array();
    for (const auto& cl : scenario.clusters) {
        json edges = json::array();
        for (auto [j, l] : cl.intra_edges) edges.push_back({j, l});
        clusters.push_back({{"size", cl.size}, {"intra_edges", edges}});
    }
    json globals = json::array();
    for (auto [a, b] : scenario.global_edges) globals.push_back({a, b});
    doc["network"] = {{"clusters", clusters}, {"global_edges", globals}};

    json agents = json::object();
    int flat = 0;
    for (size_t i = 0; i < scenario.clusters.size(); ++i)
        for (int j = 1; j <= scenario.clusters[i].size; ++j, ++flat)
            agents[std::to_string(i + 1) + "." + std::to_string(j)] = {
                {"f", spec_to_json(scenario.agents[flat].f)},
                {"g", spec_to_json(scenario.agents[flat].g)}};
    doc["agents"] = agents;

    std::vector<double> a_row_major;
    for (Eigen::Index r = 0; r < scenario.A.rows(); ++r)
        for (Eigen::Index c = 0; c < scenario.A.cols(); ++c)
            a_row_major.push_back(scenario.A(r, c));
    doc["coupling"] = {
        {"A", a_row_major},
        {"b", std::vector<double>(scenario.b.begin(), scenario.b.end())},
        {"mode", scenario.mode == CouplingMode::Inequality ? "inequality" : "equality"}};
    if (scenario.reference_primal) {
        doc["coupling"]["reference"] = {
            {"x_star", std::vector<double>(scenario.reference_primal->begin(),
                                           scenario.reference_primal->end())},
            {"objective", scenario.reference_objective.value_or(0.0)}};
    }

    doc["weights"] = {{"kappa", scenario.kappa},
                      {"eta", scenario.eta},
                      {"pi", scenario.pi}};
    doc["run"] = {{"max_iters", run.max_iters},   {"tol", run.tol},
                  {"safety", run.safety},         {"record_every", run.record_every},
                  {"workers", run.workers},       {"seed", run.seed}};
    return doc.dump(2) + "\n";
}

}  // namespace cdpg
