#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "amc/concrete.hpp"
#include "amc/estimator.hpp"
#include "support/corpus.hpp"

using namespace amc;
using amc::testing::load_corpus;

TEST_CASE("bound")
{
    CHECK(upper_bound(0.833, 10000, 0.01) == doctest::Approx(0.8482).epsilon(0.0002));
    CHECK(std::abs(upper_bound(0.833, 10000, 0.01) - 0.8482) <= 0.0002);
    CHECK(std::abs(upper_bound(0.5, 10000, 0.01) - 0.5152) <= 0.0001);
    for (double p : {0.0, 0.3, 1.0})
        CHECK(upper_bound(p, 1234, 1.0) == p);
    CHECK(upper_bound(0.99, 10, 0.01) == 1.0);
    CHECK(chernoff_margin(20000, 0.01) == doctest::Approx(std::sqrt(std::log(100.0) / 40000)));
}

TEST_CASE("bound domain errors")
{
    CHECK_THROWS_AS(upper_bound(0.5, 0, 0.1), DomainError);
    CHECK_THROWS_AS(upper_bound(0.5, 10, 0.0), DomainError);
    CHECK_THROWS_AS(upper_bound(0.5, 10, 1.5), DomainError);
    CHECK_THROWS_AS(upper_bound(-0.1, 10, 0.1), DomainError);
    CHECK_THROWS_AS(plan_trials(0.0, 0.01), DomainError);
    CHECK_THROWS_AS(plan_trials(0.1, 0.0), DomainError);
}

TEST_CASE("plan_trials")
{
    CHECK(plan_trials(0.01, 0.01) == 23026);
    CHECK(plan_trials(0.1, 0.01) == 231);
    CHECK(plan_trials(0.1, 1.0) == 1);
    CHECK(plan_trials(0.5, 0.999999) == 1);
}

TEST_CASE("property: plan_trials is the smallest sufficient n")
{
    for (double t : {0.003, 0.01, 0.05, 0.2, 0.7}) {
        for (double eps : {1e-6, 0.001, 0.05, 0.5, 0.9}) {
            CAPTURE(t);
            CAPTURE(eps);
            std::uint64_t n = plan_trials(t, eps);
            CHECK(chernoff_margin(n, eps) <= t);
            if (n > 1)
                CHECK(chernoff_margin(n - 1, eps) > t);
        }
    }
}

TEST_CASE("property: the margin shrinks with n and epsilon")
{
    double prev = 2.0;
    for (std::uint64_t n = 1; n < 100000; n = n * 3 + 1) {
        double m = chernoff_margin(n, 0.05);
        CHECK(m <= prev);
        prev = m;
    }
    prev = 2.0;
    for (double eps = 1e-9; eps <= 1.0; eps *= 4) {
        double m = chernoff_margin(1000, eps);
        CHECK(m <= prev);
        prev = m;
    }
}

TEST_CASE("exceed probability")
{
    CHECK(exceed_probability(23026, 0.01) <= 0.01);
    CHECK(exceed_probability(0, 0.1) == 1.0);
}

TEST_CASE("a certain outcome gives p = 1")
{
    Program p = parse("int x;\nx = 1;\nknow (x == 1);\n");
    RunOptions opt;
    opt.trials = 1;
    Report r = run(p, opt);
    CHECK(r.p_hat == 1.0);
    CHECK(r.p_prime == 1.0);
    CHECK(r.hits == 1);
}

TEST_CASE("fig1 estimate")
{
    RunOptions opt;
    opt.seed = 42;
    Report r = run(load_corpus("fig1.amc"), opt);
    CHECK(r.n == 10000);
    CHECK(r.p_hat >= 0.48);
    CHECK(r.p_hat <= 0.52);
    CHECK(r.p_prime == doctest::Approx(r.p_hat + 0.015175).epsilon(1e-4));
    CHECK(r.fixpoint_loops == 0);
    CHECK(r.warnings.empty());
}

TEST_CASE("reports do not depend on the number of jobs")
{
    for (const char* name : amc::testing::corpus_names) {
        CAPTURE(name);
        Program p = load_corpus(name);
        RunOptions opt;
        opt.trials = 3000;
        opt.seed = 7;
        opt.jobs = 1;
        Report a = run(p, opt);
        for (unsigned jobs : {2u, 5u, 8u}) {
            opt.jobs = jobs;
            Report b = run(p, opt);
            CHECK(same_result(a, b));
            CHECK(b.jobs == jobs);
        }
    }
}

TEST_CASE("seeds change the result, not the distribution")
{
    Program p = load_corpus("fig2.amc");
    RunOptions opt;
    opt.trials = 2000;
    opt.seed = 1;
    Report a = run(p, opt);
    opt.seed = 2;
    Report b = run(p, opt);
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(std::abs(a.p_hat - b.p_hat) < 0.05);
}

TEST_CASE("restriction to the full support changes nothing")
{
    Program p = load_corpus("fig4.amc");
    RestrictionSpec spec;
    spec.assert_containment = true;
    for (std::size_t k = 1; k <= 3; ++k)
        spec.sites.push_back({k, Interval::range(Kind::real, 0, 1)});
    RunOptions opt;
    opt.trials = 4000;
    opt.seed = 3;
    Report plain = run(p, opt);
    Report restricted = run_restricted(p, spec, opt);
    CHECK(restricted.hits == plain.hits);
    CHECK(restricted.p_hat == plain.p_hat);
    CHECK(restricted.p_prime == plain.p_prime);
    REQUIRE(restricted.restriction_probability);
    CHECK(*restricted.restriction_probability == 1.0);
    CHECK_FALSE(restricted.warnings.empty());
}

TEST_CASE("restricting fig4's second uniform to [0.75, 1]")
{
    Program p = load_corpus("fig4.amc");
    RestrictionSpec spec;
    spec.assert_containment = true;
    spec.sites.push_back({2, Interval::range(Kind::real, 0.75, 1)});
    RunOptions opt;
    opt.trials = 10000;
    opt.seed = 4;
    Report r = run_restricted(p, spec, opt);
    REQUIRE(r.restriction_probability);
    CHECK(*r.restriction_probability == 0.25);
    CHECK(r.p_hat == doctest::Approx(0.25 * static_cast<double>(r.hits) / 10000.0));
    CHECK(r.margin == doctest::Approx(0.25 * chernoff_margin(10000, 0.01)));

    Report plain = run(p, opt);
    OracleOptions oo;
    oo.samples = 200000;
    oo.seed = 4;
    double v = oracle_estimate(p, oo).estimate;
    // the restricted estimator has a quarter of the spread
    double sigma_r = 0.25 * std::sqrt(0.8 * 0.2 / 10000);
    double sigma_v = std::sqrt(v * (1 - v) / 200000);
    CHECK(std::abs(r.p_hat - plain.p_hat) < 3 * (sigma_r + std::sqrt(plain.p_hat * (1 - plain.p_hat) / 10000)));
    CHECK(r.p_hat >= v - 3 * (sigma_r + sigma_v));
    CHECK(r.p_prime < plain.p_prime);
}

TEST_CASE("restricting a coin to {1}")
{
    Program p = parse("int x;\nx = coin_flip();\nknow (x == 1);\n");
    RestrictionSpec spec;
    spec.assert_containment = true;
    spec.sites.push_back({1, Interval::range(Kind::real, 1, 1)});
    ResolvedRestriction res = resolve(spec, p);
    CHECK(res.probability == 0.5);
    RunOptions opt;
    opt.trials = 500;
    Report r = run_restricted(p, spec, opt);
    CHECK(r.hits == 500);
    CHECK(r.p_hat == 0.5);
}

TEST_CASE("invalid restrictions")
{
    Program fig1 = load_corpus("fig1.amc");
    Program fig4 = load_corpus("fig4.amc");
    RestrictionSpec spec;
    spec.assert_containment = true;
    spec.sites.push_back({1, Interval::range(Kind::real, 1, 1)});
    CHECK_THROWS_AS(resolve(spec, fig1), DomainError);

    spec.sites = {{9, Interval::range(Kind::real, 0, 1)}};
    CHECK_THROWS_AS(resolve(spec, fig4), DomainError);

    spec.sites = {{1, Interval::range(Kind::real, 0.5, 1.5)}};
    CHECK_THROWS_AS(resolve(spec, fig4), DomainError);

    spec.sites = {{1, Interval::range(Kind::real, 0.5, 0.5)}};
    CHECK_THROWS_AS(resolve(spec, fig4), DomainError);

    spec.sites = {{1, Interval::range(Kind::real, 0.5, 1)}};
    spec.assert_containment = false;
    CHECK_THROWS_AS(resolve(spec, fig4), DomainError);
}

TEST_CASE("restriction files")
{
    RestrictionSpec spec = parse_restriction_json(
        R"({"assert_containment": true, "sites": [{"generator": 2, "lo": 0.75, "hi": 1.0}]})");
    CHECK(spec.assert_containment);
    REQUIRE(spec.sites.size() == 1);
    CHECK(spec.sites[0].ordinal == 2);
    CHECK(spec.sites[0].range == Interval::range(Kind::real, 0.75, 1));
    CHECK_THROWS_AS(parse_restriction_json("{"), DomainError);
    CHECK_THROWS_AS(parse_restriction_json(R"({"sites": [{"lo": 0}]})"), DomainError);
}

TEST_CASE("aborted trials are counted and reported")
{
    Program p = parse("int x;\nx = 0;\nwhile (x < 100000) { x += 1; }\nknow (x < 0);\n");
    RunOptions opt;
    opt.trials = 10;
    opt.config.step_budget = 50;
    Report r = run(p, opt);
    CHECK(r.aborted_trials == 10);
    CHECK(r.hits == 10);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("report JSON")
{
    RunOptions opt;
    opt.trials = 200;
    Report r = run(load_corpus("fig2.amc"), opt);
    r.program = "fig2.amc";
    auto j = nlohmann::json::parse(to_json(r));
    for (const char* key : {"program", "n", "hits", "p_hat", "epsilon", "margin", "p_prime", "seed", "jobs",
                            "elapsed_ms", "config", "warnings"})
        CHECK_MESSAGE(j.contains(key), key);
    CHECK(j.at("n") == 200);
    CHECK(j.at("program") == "fig2.amc");
    CHECK(j.at("config").at("unroll") == 64);
    CHECK(j.at("config").at("widening_delay") == 2);
    CHECK(j.at("config").at("narrowing_passes") == 2);
    CHECK(j.at("warnings").is_array());
    CHECK(j.at("diagnostics").at("fixpoint_loops") == 0);
    CHECK_FALSE(j.contains("restriction"));
    std::string text = to_text(r);
    CHECK(text.find("p_prime:") != std::string::npos);
}
