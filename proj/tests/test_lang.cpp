#include <doctest.h>

#include <set>

#include "amc/lang.hpp"
#include "support/corpus.hpp"
#include "support/program_gen.hpp"

using namespace amc;
using amc::testing::load_corpus;

namespace {

std::size_t count_loops(const Block& block)
{
    std::size_t n = 0;
    for (const auto& s : block) {
        if (auto* w = std::get_if<While>(&s->node))
            n += 1 + count_loops(w->body);
        else if (auto* i = std::get_if<If>(&s->node))
            n += count_loops(i->then_branch) + count_loops(i->else_branch);
    }
    return n;
}

void collect_sites(const Block& block, std::vector<std::uint32_t>& out)
{
    for (const auto& s : block) {
        out.push_back(s->site.value);
        if (auto* w = std::get_if<While>(&s->node))
            collect_sites(w->body, out);
        else if (auto* i = std::get_if<If>(&s->node)) {
            collect_sites(i->then_branch, out);
            collect_sites(i->else_branch, out);
        }
    }
}

std::vector<Diagnostic> diagnostics_of(const std::string& source)
{
    return validate(parse_unchecked(source));
}

}  // namespace

TEST_CASE("fig1 parses with one loop and outcome x < 3")
{
    Program p = load_corpus("fig1.amc");
    CHECK(p.declarations.size() == 2);
    CHECK(count_loops(p.body) == 1);
    REQUIRE(p.outcome);
    CHECK(print(*p.outcome) == "x < 3");
    REQUIRE(p.generators.size() == 1);
    CHECK(p.generators[0].gen == Generator::coin_flip);
    CHECK(p.generators[0].loop_depth == 1);
}

TEST_CASE("every corpus program parses and validates")
{
    for (const char* name : amc::testing::corpus_names) {
        CAPTURE(name);
        Program p = load_corpus(name);
        CHECK(validate(p).empty());
        CHECK(p.outcome);
    }
}

TEST_CASE("a lone know is the outcome and leaves an empty body")
{
    Program p = parse("int x; know(x<3);");
    CHECK(p.body.empty());
    REQUIRE(p.outcome);
    CHECK(print(*p.outcome) == "x < 3");
}

TEST_CASE("kind mismatches are rejected")
{
    CHECK_THROWS_AS(parse("int x; x = uniform(); know (x < 1);"), ParseError);
    CHECK_THROWS_AS(parse("double x; x = coin_flip(); know (x < 1.0);"), ParseError);
    CHECK_THROWS_AS(parse("double x; know (x < 1);"), ParseError);
    CHECK_THROWS_AS(parse("double x; x = 2 * x; know (x < 1.0);"), ParseError);
    try {
        parse("int x; x = uniform(); know (x < 1);");
    } catch (const ParseError& e) {
        REQUIRE(e.diagnostics().size() == 1);
        CHECK(e.diagnostics()[0].pos.line == 1);
    }
}

TEST_CASE("validate reports each problem once")
{
    CHECK(diagnostics_of("int x; int x; know (x < 1);").size() == 1);
    CHECK(diagnostics_of("int x; x = y + 1; know (x < 1);").size() == 1);
    CHECK(diagnostics_of("int x; x = 1;").size() == 1);
    CHECK(validate(load_corpus("fig4.amc")).empty());
}

TEST_CASE("syntax errors carry a position")
{
    try {
        parse("int x;\nx = = 1;\nknow (x < 1);");
        FAIL("expected a ParseError");
    } catch (const ParseError& e) {
        REQUIRE_FALSE(e.diagnostics().empty());
        CHECK(e.diagnostics()[0].pos.line == 2);
    }
    CHECK_THROWS_AS(parse("int x; x = x * x; know (x < 1);"), ParseError);
    CHECK_THROWS_AS(parse("int x; while (x < 1) { x += 1; know (x < 1);"), ParseError);
}

TEST_CASE("increment, comments and blocks")
{
    Program p = parse("int i; /* c */ i = 0; // tail\n{ i++; i--; } know (i == 0);");
    REQUIRE(p.body.size() == 3);
    auto& inc = std::get<Assign>(p.body[1]->node);
    CHECK(inc.op == AssignOp::add);
    auto& dec = std::get<Assign>(p.body[2]->node);
    CHECK(dec.op == AssignOp::sub);
}

TEST_CASE("a query replaces the outcome and keeps every know as an assumption")
{
    ParseOptions opts;
    opts.query = "x >= 1";
    Program p = parse(amc::testing::read_corpus("fig1.amc"), opts);
    REQUIRE(p.outcome);
    CHECK(print(*p.outcome) == "x >= 1");
    CHECK(std::holds_alternative<Know>(p.body.back()->node));
    CHECK(p.body.size() == 4);
}

TEST_CASE("sites are unique and generator ordinals follow source order")
{
    for (const char* name : amc::testing::corpus_names) {
        CAPTURE(name);
        Program p = load_corpus(name);
        std::vector<std::uint32_t> sites;
        collect_sites(p.body, sites);
        for (const auto& g : p.generators)
            sites.push_back(g.site.value);
        std::set<std::uint32_t> unique(sites.begin(), sites.end());
        CHECK(unique.size() == sites.size());
        for (std::size_t i = 0; i < p.generators.size(); ++i) {
            CHECK(p.generators[i].ordinal == i + 1);
            CHECK(p.generator_by_ordinal(i + 1) == &p.generators[i]);
            CHECK(p.generator_at(p.generators[i].site) == &p.generators[i]);
        }
        CHECK(p.site_count >= unique.size());
    }
    Program fig4 = load_corpus("fig4.amc");
    REQUIRE(fig4.generators.size() == 3);
    CHECK(fig4.generators[0].site < fig4.generators[1].site);
    CHECK(fig4.generators[1].site < fig4.generators[2].site);
}

TEST_CASE("printing then parsing reproduces the corpus")
{
    for (const char* name : amc::testing::corpus_names) {
        CAPTURE(name);
        Program p = load_corpus(name);
        std::string text = print(p);
        Program q = parse(text);
        CHECK(same_structure(p, q));
        CHECK(print(q) == text);
    }
}

TEST_CASE("property: parse(print(p)) == p on random programs")
{
    amc::testing::ProgramGen gen(20241017);
    for (int i = 0; i < 500; ++i) {
        std::string source = gen.generate();
        CAPTURE(source);
        Program p = parse(source);
        std::string text = print(p);
        CAPTURE(text);
        Program q = parse(text);
        CHECK(same_structure(p, q));
        CHECK(print(q) == text);
    }
}

TEST_CASE("same_structure notices changed literals and sites")
{
    Program a = parse("int x; x = 1; know (x < 2);");
    Program b = parse("int x; x = 2; know (x < 2);");
    Program c = parse("int x; x = 1; x = 1; know (x < 2);");
    CHECK_FALSE(same_structure(a, b));
    CHECK_FALSE(same_structure(a, c));
    CHECK(same_structure(a, parse("int x;\nx = 1;\nknow (x < 2);")));
}
