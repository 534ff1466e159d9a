#include "amc/lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <utility>

namespace amc {

std::string_view to_string(Kind kind)
{
    return kind == Kind::integer ? "int" : "double";
}

std::string_view to_string(Generator gen)
{
    return gen == Generator::coin_flip ? "coin_flip" : "uniform";
}

Kind generator_kind(Generator gen)
{
    return gen == Generator::coin_flip ? Kind::integer : Kind::real;
}

std::string_view to_string(RelOp op)
{
    switch (op) {
    case RelOp::lt: return "<";
    case RelOp::le: return "<=";
    case RelOp::gt: return ">";
    case RelOp::ge: return ">=";
    case RelOp::eq: return "==";
    case RelOp::ne: return "!=";
    }
    return "?";
}

RelOp negate(RelOp op)
{
    switch (op) {
    case RelOp::lt: return RelOp::ge;
    case RelOp::le: return RelOp::gt;
    case RelOp::gt: return RelOp::le;
    case RelOp::ge: return RelOp::lt;
    case RelOp::eq: return RelOp::ne;
    case RelOp::ne: return RelOp::eq;
    }
    return op;
}

RelOp flip(RelOp op)
{
    switch (op) {
    case RelOp::lt: return RelOp::gt;
    case RelOp::le: return RelOp::ge;
    case RelOp::gt: return RelOp::lt;
    case RelOp::ge: return RelOp::le;
    default: return op;
    }
}

std::optional<std::size_t> Program::slot_of(std::string_view name) const
{
    for (std::size_t i = 0; i < declarations.size(); ++i)
        if (declarations[i].name == name)
            return i;
    return std::nullopt;
}

const GeneratorSite* Program::generator_by_ordinal(std::size_t ordinal) const
{
    for (const auto& g : generators)
        if (g.ordinal == ordinal)
            return &g;
    return nullptr;
}

const GeneratorSite* Program::generator_at(SiteId site) const
{
    for (const auto& g : generators)
        if (g.site == site)
            return &g;
    return nullptr;
}

std::string to_string(const Diagnostic& diag)
{
    std::ostringstream os;
    if (diag.pos.line > 0)
        os << diag.pos.line << ':' << diag.pos.column << ": ";
    os << diag.message;
    return os.str();
}

namespace {

std::string join_messages(const std::vector<Diagnostic>& diags)
{
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty())
            out += '\n';
        out += to_string(d);
    }
    return out;
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_messages(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

namespace {

//---------------------------------------------------------------------------//
// Lexer
//---------------------------------------------------------------------------//

enum class Tok {
    ident,
    int_lit,
    real_lit,
    punct,
    end,
};

struct Token {
    Tok type;
    std::string text;
    SourcePos pos;
    std::int64_t int_value = 0;
    double real_value = 0.0;
};

[[noreturn]] void syntax_error(SourcePos pos, std::string message)
{
    throw ParseError({Diagnostic{pos, std::move(message)}});
}

std::vector<Token> tokenize(std::string_view src)
{
    std::vector<Token> tokens;
    std::size_t i = 0;
    int line = 1;
    int col = 1;
    auto advance = [&](std::size_t count) {
        for (std::size_t k = 0; k < count && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    static constexpr std::string_view two_char[] = {
        "+=", "-=", "++", "--", "<=", ">=", "==", "!=", "&&", "||"};

    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        SourcePos pos{line, col};
        if (src.substr(i, 2) == "/*") {
            auto close = src.find("*/", i + 2);
            if (close == std::string_view::npos)
                syntax_error(pos, "unterminated comment");
            advance(close + 2 - i);
            continue;
        }
        if (src.substr(i, 2) == "//") {
            while (i < src.size() && src[i] != '\n')
                advance(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            tokens.push_back({Tok::ident, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))
            || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            bool is_real = false;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
                ++j;
            if (j < src.size() && src[j] == '.') {
                is_real = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
                    ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-'))
                    ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    is_real = true;
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
                        ++j;
                }
            }
            std::string text(src.substr(i, j - i));
            Token tok{is_real ? Tok::real_lit : Tok::int_lit, text, pos};
            if (is_real) {
                // from_chars rejects a leading '.', so prefix a zero
                std::string digits = text.front() == '.' ? "0" + text : text;
                auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tok.real_value);
                if (ec != std::errc() || ptr != digits.data() + digits.size())
                    syntax_error(pos, "invalid real literal '" + text + "'");
            } else {
                auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), tok.int_value);
                if (ec != std::errc())
                    syntax_error(pos, "integer literal out of range '" + text + "'");
            }
            tokens.push_back(std::move(tok));
            advance(j - i);
            continue;
        }
        std::string_view two = src.substr(i, 2);
        if (std::find(std::begin(two_char), std::end(two_char), two) != std::end(two_char)) {
            tokens.push_back({Tok::punct, std::string(two), pos});
            advance(2);
            continue;
        }
        if (std::string_view("+-*<>=;,(){}").find(c) != std::string_view::npos) {
            tokens.push_back({Tok::punct, std::string(1, c), pos});
            advance(1);
            continue;
        }
        syntax_error(pos, std::string("unexpected character '") + c + "'");
    }
    tokens.push_back({Tok::end, "", SourcePos{line, col}});
    return tokens;
}

//---------------------------------------------------------------------------//
// Parser
//---------------------------------------------------------------------------//

const std::set<std::string, std::less<>> keywords = {
    "int", "double", "know", "if", "else", "while", "coin_flip", "uniform"};

class Parser {
public:
    Parser(std::vector<Token> tokens, Program& program) : tokens_(std::move(tokens)), program_(program) {}

    void parse_program()
    {
        while (!at_end())
            parse_item(program_.body);
    }

    BoolExprPtr parse_standalone_condition()
    {
        auto cond = parse_bool();
        if (!at_end())
            syntax_error(peek().pos, "unexpected '" + peek().text + "' after condition");
        return cond;
    }

    SiteId next_site() { return SiteId{++program_.site_count}; }

private:
    struct State {
        std::size_t pos;
        std::uint32_t site_count;
        std::size_t generator_count;
    };

    State save() const { return {pos_, program_.site_count, program_.generators.size()}; }
    void restore(const State& s)
    {
        pos_ = s.pos;
        program_.site_count = s.site_count;
        program_.generators.resize(s.generator_count);
    }

    const Token& peek(std::size_t ahead = 0) const
    {
        return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
    }
    bool at_end() const { return peek().type == Tok::end; }
    bool is_punct(std::string_view p, std::size_t ahead = 0) const
    {
        const auto& t = peek(ahead);
        return t.type == Tok::punct && t.text == p;
    }
    bool is_keyword(std::string_view k) const
    {
        const auto& t = peek();
        return t.type == Tok::ident && t.text == k;
    }
    const Token& take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
    void expect(std::string_view p)
    {
        if (!is_punct(p)) {
            const auto& t = peek();
            syntax_error(t.pos, "expected '" + std::string(p) + "' but found "
                                    + (t.type == Tok::end ? std::string("end of input") : "'" + t.text + "'"));
        }
        take();
    }

    VarRef resolve(const std::string& name) const
    {
        VarRef ref{name, unresolved_slot};
        if (auto slot = program_.slot_of(name))
            ref.slot = *slot;
        return ref;
    }

    Kind kind_of(const VarRef& ref) const
    {
        return ref.slot == unresolved_slot ? Kind::integer : program_.declarations[ref.slot].kind;
    }

    void parse_item(Block& out)
    {
        if (is_keyword("int") || is_keyword("double")) {
            parse_declaration();
            return;
        }
        parse_statement(out);
    }

    void parse_declaration()
    {
        Kind kind = take().text == "int" ? Kind::integer : Kind::real;
        for (;;) {
            const auto& t = take();
            if (t.type != Tok::ident || keywords.count(t.text))
                syntax_error(t.pos, "expected variable name in declaration");
            program_.declarations.push_back({t.text, kind, t.pos});
            if (is_punct(",")) {
                take();
                continue;
            }
            expect(";");
            return;
        }
    }

    // Blocks and nested statements; plain `{ ... }` blocks are flattened.
    void parse_statement(Block& out)
    {
        const Token& t = peek();
        if (is_punct("{")) {
            take();
            while (!is_punct("}")) {
                if (at_end())
                    syntax_error(peek().pos, "expected '}' before end of input");
                parse_item(out);
            }
            take();
            return;
        }
        if (is_punct(";")) {
            take();
            return;
        }
        if (t.type != Tok::ident)
            syntax_error(t.pos, "expected statement but found '" + t.text + "'");

        SourcePos pos = t.pos;
        if (t.text == "know") {
            take();
            SiteId site = next_site();
            expect("(");
            auto cond = parse_bool();
            expect(")");
            expect(";");
            out.push_back(std::make_shared<Stmt>(Stmt{site, pos, Know{std::move(cond)}}));
            return;
        }
        if (t.text == "if") {
            take();
            SiteId site = next_site();
            expect("(");
            auto cond = parse_bool();
            expect(")");
            If node{std::move(cond), {}, {}};
            parse_body(node.then_branch);
            if (is_keyword("else")) {
                take();
                parse_body(node.else_branch);
            }
            out.push_back(std::make_shared<Stmt>(Stmt{site, pos, std::move(node)}));
            return;
        }
        if (t.text == "while") {
            take();
            SiteId site = next_site();
            expect("(");
            auto cond = parse_bool();
            expect(")");
            While node{std::move(cond), {}};
            ++loop_depth_;
            parse_body(node.body);
            --loop_depth_;
            out.push_back(std::make_shared<Stmt>(Stmt{site, pos, std::move(node)}));
            return;
        }
        if (keywords.count(t.text))
            syntax_error(t.pos, "unexpected keyword '" + t.text + "'");

        std::string name = take().text;
        SiteId site = next_site();
        VarRef target = resolve(name);
        if (is_punct("++") || is_punct("--")) {
            AssignOp op = take().text == "++" ? AssignOp::add : AssignOp::sub;
            expect(";");
            Kind kind = kind_of(target);
            auto one = kind == Kind::integer
                           ? std::make_shared<Expr>(Expr{kind, pos, IntLiteral{1}})
                           : std::make_shared<Expr>(Expr{kind, pos, RealLiteral{1.0}});
            out.push_back(std::make_shared<Stmt>(Stmt{site, pos, Assign{std::move(target), op, std::move(one)}}));
            return;
        }
        AssignOp op;
        if (is_punct("="))
            op = AssignOp::set;
        else if (is_punct("+="))
            op = AssignOp::add;
        else if (is_punct("-="))
            op = AssignOp::sub;
        else
            syntax_error(peek().pos, "expected '=', '+=', '-=', '++' or '--' after '" + name + "'");
        take();
        auto value = parse_expr();
        expect(";");
        out.push_back(std::make_shared<Stmt>(Stmt{site, pos, Assign{std::move(target), op, std::move(value)}}));
    }

    void parse_body(Block& out) { parse_statement(out); }

    //-----------------------------------------------------------------------//
    // Expressions
    //-----------------------------------------------------------------------//

    ExprPtr parse_expr()
    {
        auto lhs = parse_term();
        while (is_punct("+") || is_punct("-")) {
            SourcePos pos = peek().pos;
            ArithOp op = take().text == "+" ? ArithOp::add : ArithOp::sub;
            auto rhs = parse_term();
            Kind kind = lhs->kind;
            lhs = std::make_shared<Expr>(Expr{kind, pos, BinaryExpr{op, std::move(lhs), std::move(rhs)}});
        }
        return lhs;
    }

    static std::optional<std::pair<double, Kind>> literal_value(const Expr& e)
    {
        if (auto* i = std::get_if<IntLiteral>(&e.node))
            return std::pair{static_cast<double>(i->value), Kind::integer};
        if (auto* r = std::get_if<RealLiteral>(&e.node))
            return std::pair{r->value, Kind::real};
        return std::nullopt;
    }

    ExprPtr parse_term()
    {
        auto lhs = parse_unary();
        while (is_punct("*")) {
            SourcePos pos = peek().pos;
            take();
            auto rhs = parse_unary();
            if (auto lit = literal_value(*lhs)) {
                lhs = std::make_shared<Expr>(Expr{rhs->kind, pos, ScaleExpr{lit->first, lit->second, rhs}});
            } else if (auto lit2 = literal_value(*rhs)) {
                lhs = std::make_shared<Expr>(Expr{lhs->kind, pos, ScaleExpr{lit2->first, lit2->second, lhs}});
            } else {
                syntax_error(pos, "multiplication requires a literal operand");
            }
        }
        return lhs;
    }

    ExprPtr parse_unary()
    {
        if (is_punct("-")) {
            SourcePos pos = take().pos;
            auto operand = parse_unary();
            if (auto* i = std::get_if<IntLiteral>(&operand->node))
                return std::make_shared<Expr>(Expr{Kind::integer, pos, IntLiteral{-i->value}});
            if (auto* r = std::get_if<RealLiteral>(&operand->node))
                return std::make_shared<Expr>(Expr{Kind::real, pos, RealLiteral{-r->value}});
            Kind kind = operand->kind;
            return std::make_shared<Expr>(Expr{kind, pos, ScaleExpr{-1.0, kind, std::move(operand)}});
        }
        return parse_primary();
    }

    ExprPtr parse_primary()
    {
        const Token& t = peek();
        SourcePos pos = t.pos;
        switch (t.type) {
        case Tok::int_lit: {
            auto v = take().int_value;
            return std::make_shared<Expr>(Expr{Kind::integer, pos, IntLiteral{v}});
        }
        case Tok::real_lit: {
            auto v = take().real_value;
            return std::make_shared<Expr>(Expr{Kind::real, pos, RealLiteral{v}});
        }
        case Tok::ident: {
            if (t.text == "coin_flip" || t.text == "uniform") {
                Generator gen = take().text == "coin_flip" ? Generator::coin_flip : Generator::uniform;
                SiteId site = next_site();
                expect("(");
                expect(")");
                program_.generators.push_back(
                    {site, gen, program_.generators.size() + 1, loop_depth_});
                return std::make_shared<Expr>(Expr{generator_kind(gen), pos, GeneratorCall{gen, site}});
            }
            if (keywords.count(t.text))
                syntax_error(pos, "unexpected keyword '" + t.text + "' in expression");
            VarRef ref = resolve(take().text);
            Kind kind = kind_of(ref);
            return std::make_shared<Expr>(Expr{kind, pos, std::move(ref)});
        }
        case Tok::punct:
            if (t.text == "(") {
                take();
                auto e = parse_expr();
                expect(")");
                return e;
            }
            [[fallthrough]];
        default:
            syntax_error(pos, t.type == Tok::end ? std::string("unexpected end of input in expression")
                                                 : "unexpected '" + t.text + "' in expression");
        }
    }

    //-----------------------------------------------------------------------//
    // Conditions
    //-----------------------------------------------------------------------//

    BoolExprPtr parse_bool()
    {
        auto lhs = parse_conj();
        while (is_punct("||")) {
            SourcePos pos = take().pos;
            auto rhs = parse_conj();
            lhs = std::make_shared<BoolExpr>(BoolExpr{pos, Logical{LogicOp::disj, std::move(lhs), std::move(rhs)}});
        }
        return lhs;
    }

    BoolExprPtr parse_conj()
    {
        auto lhs = parse_bool_factor();
        while (is_punct("&&")) {
            SourcePos pos = take().pos;
            auto rhs = parse_bool_factor();
            lhs = std::make_shared<BoolExpr>(BoolExpr{pos, Logical{LogicOp::conj, std::move(lhs), std::move(rhs)}});
        }
        return lhs;
    }

    static bool is_relop(const Token& t)
    {
        if (t.type != Tok::punct)
            return false;
        return t.text == "<" || t.text == "<=" || t.text == ">" || t.text == ">=" || t.text == "=="
               || t.text == "!=";
    }

    // A parenthesis may open either a grouped condition or an arithmetic
    // operand; try the condition first and fall back.
    BoolExprPtr parse_bool_factor()
    {
        if (is_punct("(")) {
            State saved = save();
            try {
                take();
                auto inner = parse_bool();
                expect(")");
                const Token& next = peek();
                bool continues_expr = is_relop(next)
                                      || (next.type == Tok::punct
                                          && (next.text == "+" || next.text == "-" || next.text == "*"));
                if (!continues_expr)
                    return inner;
            } catch (const ParseError&) {
            }
            restore(saved);
        }
        return parse_comparison();
    }

    BoolExprPtr parse_comparison()
    {
        auto lhs = parse_expr();
        const Token& t = peek();
        if (!is_relop(t))
            syntax_error(t.pos, t.type == Tok::end ? std::string("expected comparison operator")
                                                   : "expected comparison operator but found '" + t.text + "'");
        SourcePos pos = t.pos;
        std::string op_text = take().text;
        RelOp op = op_text == "<"    ? RelOp::lt
                   : op_text == "<=" ? RelOp::le
                   : op_text == ">"  ? RelOp::gt
                   : op_text == ">=" ? RelOp::ge
                   : op_text == "==" ? RelOp::eq
                                     : RelOp::ne;
        auto rhs = parse_expr();
        return std::make_shared<BoolExpr>(BoolExpr{pos, Comparison{std::move(lhs), op, std::move(rhs)}});
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t loop_depth_ = 0;
    Program& program_;
};

//---------------------------------------------------------------------------//
// Validation
//---------------------------------------------------------------------------//

class Checker {
public:
    explicit Checker(const Program& p) : program_(p) {}

    std::vector<Diagnostic> run()
    {
        std::set<std::string, std::less<>> seen;
        for (const auto& d : program_.declarations) {
            if (!seen.insert(d.name).second)
                report(d.pos, "duplicate declaration of '" + d.name + "'");
        }
        check_block(program_.body);
        if (program_.outcome)
            check_bool(*program_.outcome);
        else
            report({}, "missing outcome: the program must end with a top-level know(...) or a query must be given");
        return std::move(diags_);
    }

private:
    void report(SourcePos pos, std::string message) { diags_.push_back({pos, std::move(message)}); }

    bool check_ref(const VarRef& ref, SourcePos pos)
    {
        if (ref.slot == unresolved_slot || ref.slot >= program_.declarations.size()) {
            report(pos, "use of undeclared variable '" + ref.name + "'");
            return false;
        }
        return true;
    }

    // Returns the expression kind, or nullopt when an error was reported
    // below this node.
    std::optional<Kind> check_expr(const Expr& e)
    {
        return std::visit(
            [&](const auto& n) -> std::optional<Kind> {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, IntLiteral>) {
                    return Kind::integer;
                } else if constexpr (std::is_same_v<T, RealLiteral>) {
                    return Kind::real;
                } else if constexpr (std::is_same_v<T, VarRef>) {
                    if (!check_ref(n, e.pos))
                        return std::nullopt;
                    return program_.declarations[n.slot].kind;
                } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                    auto l = check_expr(*n.lhs);
                    auto r = check_expr(*n.rhs);
                    if (!l || !r)
                        return std::nullopt;
                    if (*l != *r) {
                        report(e.pos, "kind mismatch: " + std::string(to_string(*l)) + " "
                                          + (n.op == ArithOp::add ? "+" : "-") + " "
                                          + std::string(to_string(*r)));
                        return std::nullopt;
                    }
                    return l;
                } else if constexpr (std::is_same_v<T, ScaleExpr>) {
                    auto k = check_expr(*n.operand);
                    if (!k)
                        return std::nullopt;
                    if (*k != n.factor_kind) {
                        report(e.pos, "kind mismatch: " + std::string(to_string(n.factor_kind))
                                          + " literal times " + std::string(to_string(*k)) + " expression");
                        return std::nullopt;
                    }
                    return k;
                } else {
                    return generator_kind(n.gen);
                }
            },
            e.node);
    }

    void check_bool(const BoolExpr& b)
    {
        if (auto* c = std::get_if<Comparison>(&b.node)) {
            auto l = check_expr(*c->lhs);
            auto r = check_expr(*c->rhs);
            if (l && r && *l != *r)
                report(b.pos, "kind mismatch: comparing " + std::string(to_string(*l)) + " with "
                                  + std::string(to_string(*r)));
        } else {
            const auto& lg = std::get<Logical>(b.node);
            check_bool(*lg.lhs);
            check_bool(*lg.rhs);
        }
    }

    void check_block(const Block& block)
    {
        for (const auto& s : block)
            check_stmt(*s);
    }

    void check_stmt(const Stmt& s)
    {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    bool ok = check_ref(n.target, s.pos);
                    auto k = check_expr(*n.value);
                    if (ok && k && program_.declarations[n.target.slot].kind != *k) {
                        report(s.pos, "kind mismatch: assigning " + std::string(to_string(*k)) + " to "
                                          + std::string(to_string(program_.declarations[n.target.slot].kind))
                                          + " variable '" + n.target.name + "'");
                    }
                } else if constexpr (std::is_same_v<T, Know>) {
                    check_bool(*n.cond);
                } else if constexpr (std::is_same_v<T, If>) {
                    check_bool(*n.cond);
                    check_block(n.then_branch);
                    check_block(n.else_branch);
                } else {
                    check_bool(*n.cond);
                    check_block(n.body);
                }
            },
            s.node);
    }

    const Program& program_;
    std::vector<Diagnostic> diags_;
};

}  // namespace

Program parse_unchecked(std::string_view source, const ParseOptions& options)
{
    Program program;
    Parser parser(tokenize(source), program);
    parser.parse_program();

    if (options.query) {
        parser.next_site();
        Parser query_parser(tokenize(*options.query), program);
        program.outcome = query_parser.parse_standalone_condition();
    } else if (!program.body.empty()) {
        if (auto* know = std::get_if<Know>(&program.body.back()->node)) {
            program.outcome = know->cond;
            program.body.pop_back();
        }
    }
    return program;
}

std::vector<Diagnostic> validate(const Program& program)
{
    return Checker(program).run();
}

Program parse(std::string_view source, const ParseOptions& options)
{
    Program program = parse_unchecked(source, options);
    auto diags = validate(program);
    if (!diags.empty())
        throw ParseError(std::move(diags));
    return program;
}

}  // namespace amc
