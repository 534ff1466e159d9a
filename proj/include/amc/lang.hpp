#pragma once

// AST, parser and static checks for the analyzed mini-language.
//
// A program is a list of C-style declarations followed by statements over
// integer and real variables. Random inputs come from two generators,
// `coin_flip()` (integer, 0 or 1) and `uniform()` (real, [0,1]); `know(c)`
// states an assumption. The last top-level `know` is the outcome whose
// probability the analyzer bounds, unless a query is supplied separately.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace amc {

enum class Kind { integer, real };

std::string_view to_string(Kind kind);

/// Program point. Statements and generator occurrences share one numbering,
/// assigned in source order starting at 1.
struct SiteId {
    std::uint32_t value = 0;
    friend auto operator<=>(SiteId, SiteId) = default;
};

struct SourcePos {
    int line = 0;
    int column = 0;
};

enum class Generator { coin_flip, uniform };

std::string_view to_string(Generator gen);

/// Result kind of a generator: coin_flip is integer, uniform is real.
Kind generator_kind(Generator gen);

inline constexpr std::size_t unresolved_slot = static_cast<std::size_t>(-1);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLiteral {
    std::int64_t value;
};
struct RealLiteral {
    double value;
};
struct VarRef {
    std::string name;
    std::size_t slot = unresolved_slot;
};
enum class ArithOp { add, sub };
struct BinaryExpr {
    ArithOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};
/// Multiplication by a literal constant; `factor` is integral for integer
/// expressions.
struct ScaleExpr {
    double factor;
    Kind factor_kind;
    ExprPtr operand;
};
struct GeneratorCall {
    Generator gen;
    SiteId site;
};

struct Expr {
    Kind kind;
    SourcePos pos;
    std::variant<IntLiteral, RealLiteral, VarRef, BinaryExpr, ScaleExpr, GeneratorCall> node;
};

enum class RelOp { lt, le, gt, ge, eq, ne };

std::string_view to_string(RelOp op);
RelOp negate(RelOp op);
/// `a op b` iff `b flip(op) a`.
RelOp flip(RelOp op);

struct BoolExpr;
using BoolExprPtr = std::shared_ptr<const BoolExpr>;

struct Comparison {
    ExprPtr lhs;
    RelOp op;
    ExprPtr rhs;
};
enum class LogicOp { conj, disj };
struct Logical {
    LogicOp op;
    BoolExprPtr lhs;
    BoolExprPtr rhs;
};

struct BoolExpr {
    SourcePos pos;
    std::variant<Comparison, Logical> node;
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using Block = std::vector<StmtPtr>;

enum class AssignOp { set, add, sub };

struct Assign {
    VarRef target;
    AssignOp op;
    ExprPtr value;
};
struct Know {
    BoolExprPtr cond;
};
struct If {
    BoolExprPtr cond;
    Block then_branch;
    Block else_branch;
};
struct While {
    BoolExprPtr cond;
    Block body;
};

struct Stmt {
    SiteId site;
    SourcePos pos;
    std::variant<Assign, Know, If, While> node;
};

struct Declaration {
    std::string name;
    Kind kind;
    SourcePos pos;
};

struct GeneratorSite {
    SiteId site;
    Generator gen;
    /// 1-based position among generator occurrences in source order.
    std::size_t ordinal;
    /// Nesting depth in `while` bodies; 0 for straight-line code.
    std::size_t loop_depth;
};

struct Program {
    std::vector<Declaration> declarations;
    Block body;
    BoolExprPtr outcome;
    std::vector<GeneratorSite> generators;
    std::uint32_t site_count = 0;

    std::optional<std::size_t> slot_of(std::string_view name) const;
    const GeneratorSite* generator_by_ordinal(std::size_t ordinal) const;
    const GeneratorSite* generator_at(SiteId site) const;
};

struct Diagnostic {
    SourcePos pos;
    std::string message;
};

std::string to_string(const Diagnostic& diag);

/// Syntax error, or a program that fails validation.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

struct ParseOptions {
    /// Outcome expression overriding the trailing `know`. When set, every
    /// `know` of the source is an assumption.
    std::optional<std::string> query;
};

/// Parse without validation: names may be unresolved and kinds may clash.
/// Throws ParseError only for syntax errors.
Program parse_unchecked(std::string_view source, const ParseOptions& options = {});

/// Empty iff declarations are unique, every name resolves, kinds agree and
/// an outcome is present.
std::vector<Diagnostic> validate(const Program& program);

/// parse_unchecked followed by validate; throws ParseError on any diagnostic.
Program parse(std::string_view source, const ParseOptions& options = {});

/// Canonical source rendering; parse(print(p)) reproduces p, site ids
/// included.
std::string print(const Program& program);
std::string print(const Expr& expr);
std::string print(const BoolExpr& cond);

/// Structural equality of two programs (names, kinds, sites, literals).
bool same_structure(const Program& a, const Program& b);

}  // namespace amc
