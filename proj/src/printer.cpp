#include <charconv>
#include <sstream>

#include "amc/lang.hpp"

namespace amc {

namespace {

std::string real_literal(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

void print_expr(std::ostream& os, const Expr& e)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntLiteral>) {
                os << n.value;
            } else if constexpr (std::is_same_v<T, RealLiteral>) {
                os << real_literal(n.value);
            } else if constexpr (std::is_same_v<T, VarRef>) {
                os << n.name;
            } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                os << '(';
                print_expr(os, *n.lhs);
                os << (n.op == ArithOp::add ? " + " : " - ");
                print_expr(os, *n.rhs);
                os << ')';
            } else if constexpr (std::is_same_v<T, ScaleExpr>) {
                os << '(';
                if (n.factor_kind == Kind::integer)
                    os << static_cast<std::int64_t>(n.factor);
                else
                    os << real_literal(n.factor);
                os << " * ";
                print_expr(os, *n.operand);
                os << ')';
            } else {
                os << to_string(n.gen) << "()";
            }
        },
        e.node);
}

void print_bool(std::ostream& os, const BoolExpr& b)
{
    if (auto* c = std::get_if<Comparison>(&b.node)) {
        print_expr(os, *c->lhs);
        os << ' ' << to_string(c->op) << ' ';
        print_expr(os, *c->rhs);
        return;
    }
    const auto& lg = std::get<Logical>(b.node);
    os << '(';
    print_bool(os, *lg.lhs);
    os << (lg.op == LogicOp::conj ? " && " : " || ");
    print_bool(os, *lg.rhs);
    os << ')';
}

void print_block(std::ostream& os, const Block& block, int indent);

void print_stmt(std::ostream& os, const Stmt& s, int indent)
{
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Assign>) {
                os << pad << n.target.name
                   << (n.op == AssignOp::set ? " = " : n.op == AssignOp::add ? " += " : " -= ");
                print_expr(os, *n.value);
                os << ";\n";
            } else if constexpr (std::is_same_v<T, Know>) {
                os << pad << "know (";
                print_bool(os, *n.cond);
                os << ");\n";
            } else if constexpr (std::is_same_v<T, If>) {
                os << pad << "if (";
                print_bool(os, *n.cond);
                os << ") {\n";
                print_block(os, n.then_branch, indent + 1);
                os << pad << '}';
                if (!n.else_branch.empty()) {
                    os << " else {\n";
                    print_block(os, n.else_branch, indent + 1);
                    os << pad << '}';
                }
                os << '\n';
            } else {
                os << pad << "while (";
                print_bool(os, *n.cond);
                os << ") {\n";
                print_block(os, n.body, indent + 1);
                os << pad << "}\n";
            }
        },
        s.node);
}

void print_block(std::ostream& os, const Block& block, int indent)
{
    for (const auto& s : block)
        print_stmt(os, *s, indent);
}

void collect_sites(const Expr& e, std::vector<std::uint32_t>& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BinaryExpr>) {
                collect_sites(*n.lhs, out);
                collect_sites(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, ScaleExpr>) {
                collect_sites(*n.operand, out);
            } else if constexpr (std::is_same_v<T, GeneratorCall>) {
                out.push_back(n.site.value);
            }
        },
        e.node);
}

void collect_sites(const BoolExpr& b, std::vector<std::uint32_t>& out)
{
    if (auto* c = std::get_if<Comparison>(&b.node)) {
        collect_sites(*c->lhs, out);
        collect_sites(*c->rhs, out);
    } else {
        const auto& lg = std::get<Logical>(b.node);
        collect_sites(*lg.lhs, out);
        collect_sites(*lg.rhs, out);
    }
}

void collect_sites(const Block& block, std::vector<std::uint32_t>& out)
{
    for (const auto& s : block) {
        out.push_back(s->site.value);
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    collect_sites(*n.value, out);
                } else if constexpr (std::is_same_v<T, Know>) {
                    collect_sites(*n.cond, out);
                } else if constexpr (std::is_same_v<T, If>) {
                    collect_sites(*n.cond, out);
                    collect_sites(n.then_branch, out);
                    collect_sites(n.else_branch, out);
                } else {
                    collect_sites(*n.cond, out);
                    collect_sites(n.body, out);
                }
            },
            s->node);
    }
}

}  // namespace

std::string print(const Expr& expr)
{
    std::ostringstream os;
    print_expr(os, expr);
    return os.str();
}

std::string print(const BoolExpr& cond)
{
    std::ostringstream os;
    print_bool(os, cond);
    return os.str();
}

std::string print(const Program& program)
{
    std::ostringstream os;
    for (const auto& d : program.declarations)
        os << to_string(d.kind) << ' ' << d.name << ";\n";
    print_block(os, program.body, 0);
    if (program.outcome) {
        os << "know (";
        print_bool(os, *program.outcome);
        os << ");\n";
    }
    return os.str();
}

bool same_structure(const Program& a, const Program& b)
{
    if (print(a) != print(b))
        return false;
    std::vector<std::uint32_t> sa, sb;
    collect_sites(a.body, sa);
    collect_sites(b.body, sb);
    if (a.outcome)
        collect_sites(*a.outcome, sa);
    if (b.outcome)
        collect_sites(*b.outcome, sb);
    return sa == sb;
}

}  // namespace amc
