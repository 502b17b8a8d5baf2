#include "cdpg/config.hpp"

#include "cdpg/scenarios.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace cdpg;

namespace {

const char* kMinimal = R"({
  "network": {
    "clusters": [{"size": 1, "intra_edges": []}, {"size": 1, "intra_edges": []}],
    "global_edges": [[1, 2]]
  },
  "agents": {
    "1.1": {"f": {"type": "quadratic", "a": 1.0, "b": 0.0}, "g": {"type": "zero"}},
    "2.1": {"f": {"type": "quadratic", "a": 2.0, "b": -1.0},
            "g": {"type": "box", "lower": 0.0, "upper": 3.0}}
  },
  "coupling": {"A": [1, 1], "b": [2], "mode": "inequality"},
  "weights": {"kappa": [0.5, 0.5], "eta": [1, 1], "pi": [1, 1]}
})";

bool same_function(const FunctionSpec& x, const FunctionSpec& y) {
    if (x.index() != y.index()) return false;
    if (const auto* q = std::get_if<Quadratic>(&x)) {
        const auto& r = std::get<Quadratic>(y);
        return q->a == r.a && q->b == r.b;
    }
    if (const auto* e = std::get_if<QuadExp>(&x)) {
        const auto& r = std::get<QuadExp>(y);
        return e->q2 == r.q2 && e->q1 == r.q1 && e->e1 == r.e1 && e->e2 == r.e2;
    }
    if (const auto* b = std::get_if<BoxIndicator>(&x)) {
        const auto& r = std::get<BoxIndicator>(y);
        return b->lower == r.lower && b->upper == r.upper;
    }
    if (const auto* n = std::get_if<NormPenalty>(&x)) {
        const auto& r = std::get<NormPenalty>(y);
        return n->order == r.order && n->weight == r.weight;
    }
    return true;  // Zero
}

/// Field-by-field equality, skipping the name (a parse adopts its origin).
void check_same_scenario(const ScenarioSpec& a, const ScenarioSpec& b) {
    REQUIRE(a.clusters.size() == b.clusters.size());
    for (size_t i = 0; i < a.clusters.size(); ++i) {
        CHECK(a.clusters[i].size == b.clusters[i].size);
        CHECK(a.clusters[i].intra_edges == b.clusters[i].intra_edges);
    }
    CHECK(a.global_edges == b.global_edges);
    REQUIRE(a.agents.size() == b.agents.size());
    for (size_t k = 0; k < a.agents.size(); ++k) {
        CHECK(same_function(a.agents[k].f, b.agents[k].f));
        CHECK(same_function(a.agents[k].g, b.agents[k].g));
    }
    CHECK(a.A == b.A);
    CHECK(a.b == b.b);
    CHECK(a.mode == b.mode);
    CHECK(a.kappa == b.kappa);
    CHECK(a.eta == b.eta);
    CHECK(a.pi == b.pi);
    CHECK(a.reference_primal.has_value() == b.reference_primal.has_value());
    if (a.reference_primal) CHECK(*a.reference_primal == *b.reference_primal);
    CHECK(a.reference_objective == b.reference_objective);
}

std::vector<std::string> issues_of(const std::string& text) {
    try {
        parse_config_text(text, "test");
    } catch (const ConfigError& e) {
        return e.issues;
    }
    return {};
}

bool has_issue(const std::vector<std::string>& issues, const std::string& needle) {
    return std::any_of(issues.begin(), issues.end(), [&](const std::string& s) {
        return s.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("minimal config parses with scalar broadcast") {
    const LoadedConfig cfg = parse_config_text(kMinimal, "minimal");
    CHECK(cfg.scenario.name == "minimal");
    REQUIRE(cfg.scenario.clusters.size() == 2);
    CHECK(cfg.scenario.global_edges == std::vector<std::pair<int, int>>{{1, 2}});
    const auto& q = std::get<Quadratic>(cfg.scenario.agents[1].f);
    CHECK(q.a == VectorXd::Constant(1, 2.0));
    CHECK(q.b == VectorXd::Constant(1, -1.0));
    CHECK(std::holds_alternative<Zero>(cfg.scenario.agents[0].g));
    CHECK(cfg.scenario.A == Eigen::MatrixXd::Ones(1, 2));
    CHECK(cfg.scenario.mode == CouplingMode::Inequality);
    // run section absent: defaults apply.
    CHECK(cfg.run.max_iters == RunSettings{}.max_iters);
    CHECK(cfg.run.tol == RunSettings{}.tol);
    CHECK_NOTHROW(cfg.scenario.build());
}

TEST_CASE("built-in scenarios round-trip through the config format") {
    RunSettings run;
    run.max_iters = 1234;
    run.tol = 1e-7;
    run.safety = 0.9;
    run.record_every = 17;
    run.workers = 3;
    run.seed = 42;
    for (const auto& spec :
         {commodity_market(), commodity_market(2), emission_dispatch(), random_small(3, 3, 3)}) {
        const std::string text = export_config(spec, run);
        const LoadedConfig back = parse_config_text(text, "round-trip");
        check_same_scenario(spec, back.scenario);
        CHECK(back.run.max_iters == run.max_iters);
        CHECK(back.run.tol == run.tol);
        CHECK(back.run.safety == run.safety);
        CHECK(back.run.record_every == run.record_every);
        CHECK(back.run.workers == run.workers);
        CHECK(back.run.seed == run.seed);
        // Exporting the parsed copy reproduces the bytes.
        CHECK(export_config(back.scenario, back.run) == text);
    }
}

TEST_CASE("block dimension is inferred from the coupling matrix") {
    // B = 1, N = 3, |A| = 6 => M = 2; agent blocks must then carry 2 entries.
    const std::string text = R"({
      "network": {"clusters": [{"size": 1, "intra_edges": []},
                               {"size": 1, "intra_edges": []},
                               {"size": 1, "intra_edges": []}],
                  "global_edges": [[1, 2], [2, 3]]},
      "agents": {
        "1.1": {"f": {"type": "quadratic", "a": [1, 2], "b": [0, 0]}, "g": {"type": "zero"}},
        "2.1": {"f": {"type": "quadratic", "a": 1.5, "b": 0.5}, "g": {"type": "zero"}},
        "3.1": {"f": {"type": "quadratic", "a": 1.0, "b": 0.0},
                "g": {"type": "box", "lower": [0, -1], "upper": [4, 1]}}
      },
      "coupling": {"A": [1, 0, 0, 1, 1, 1], "b": [3], "mode": "equality"},
      "weights": {"kappa": [0.4, 0.3, 0.3], "eta": [1, 1, 1], "pi": [1, 2, 3]}
    })";
    const LoadedConfig cfg = parse_config_text(text, "m2");
    CHECK(cfg.scenario.A.rows() == 1);
    CHECK(cfg.scenario.A.cols() == 6);
    CHECK(cfg.scenario.mode == CouplingMode::Equality);
    const auto problem = cfg.scenario.build();
    CHECK(problem.M() == 2);
    CHECK(std::get<Quadratic>(cfg.scenario.agents[1].f).a ==
          VectorXd::Constant(2, 1.5));
}

TEST_CASE("every violation is reported in one pass") {
    const std::string text = R"({
      "network": {"clusters": [{"size": 1, "intra_edges": []},
                               {"size": 2, "intra_edges": [[2, 2], [1, 5]]}],
                  "global_edges": [[1, 2]], "shape": "odd"},
      "agents": {
        "1.1": {"f": {"type": "cubic"}, "g": {"type": "zero"}},
        "2.1": {"f": {"type": "quadratic", "a": 1.0, "b": 0.0}, "g": {"type": "zero"}}
      },
      "coupling": {"A": [1, 1], "b": [2], "mode": "sideways"},
      "weights": {"kappa": [0.5, 0.5], "eta": [1, 1, 1], "pi": [1, 1, 1]}
    })";
    const auto issues = issues_of(text);
    CHECK(issues.size() >= 4);
    CHECK(has_issue(issues, "cluster 2: self-loop edge [2,2]"));
    CHECK(has_issue(issues, "edge [1,5] out of range 1..2"));
    CHECK(has_issue(issues, "unknown key 'shape'"));
    CHECK(has_issue(issues, "unknown smooth function type 'cubic'"));
    CHECK(has_issue(issues, "coupling.mode"));
    CHECK(has_issue(issues, "agents: missing entry '2.2'"));
}

TEST_CASE("missing sections are all named") {
    const auto issues = issues_of("{}");
    CHECK(has_issue(issues, "missing section 'network'"));
    CHECK(has_issue(issues, "missing section 'agents'"));
    CHECK(has_issue(issues, "missing section 'coupling'"));
    CHECK(has_issue(issues, "missing section 'weights'"));
}

TEST_CASE("coupling matrix length must factor through B*N") {
    std::string text = kMinimal;
    text.replace(text.find("\"A\": [1, 1]"), 11, "\"A\": [1, 1, 1]");
    CHECK(has_issue(issues_of(text), "not divisible by B*N"));
}

TEST_CASE("run settings are validated") {
    std::string text = kMinimal;
    text.insert(text.rfind('}'),
                R"(, "run": {"max_iters": 50, "tol": 1e-6, "workers": 2})");
    const LoadedConfig cfg = parse_config_text(text, "run");
    CHECK(cfg.run.max_iters == 50);
    CHECK(cfg.run.tol == 1e-6);
    CHECK(cfg.run.workers == 2);
    CHECK(cfg.run.record_every == RunSettings{}.record_every);  // untouched default

    std::string bad = kMinimal;
    bad.insert(bad.rfind('}'),
               R"(, "run": {"tol": -1.0, "workers": 0, "cadence": 5})");
    const auto issues = issues_of(bad);
    CHECK(has_issue(issues, "run.tol: must be positive"));
    CHECK(has_issue(issues, "run.workers: must be >= 1"));
    CHECK(has_issue(issues, "unknown key 'cadence'"));
}

TEST_CASE("malformed json and missing files are single clear errors") {
    const auto issues = issues_of("{\"network\": ");
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].find("test") != std::string::npos);
    CHECK_THROWS_AS(parse_config("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("reference block is optional but checked when present") {
    std::string text = kMinimal;
    const std::string mode_key = "\"mode\": \"inequality\"";
    text.replace(text.find(mode_key), mode_key.size(),
                 mode_key + R"(, "reference": {"x_star": [1.0, 1.0], "objective": 0.25})");
    const LoadedConfig cfg = parse_config_text(text, "ref");
    REQUIRE(cfg.scenario.reference_primal.has_value());
    CHECK((*cfg.scenario.reference_primal)(1) == 1.0);
    CHECK(cfg.scenario.reference_objective == 0.25);

    std::string bad = text;
    bad.replace(bad.find("[1.0, 1.0]"), 10, "[1.0]");
    CHECK(has_issue(issues_of(bad), "reference.x_star: expected 2 entries"));
}
