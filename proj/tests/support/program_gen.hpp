#pragma once

// Random well-formed programs for property tests. Every program terminates
// concretely with probability one, bounds its nondeterministic inputs with
// leading knows, and ends with an outcome.

#include <random>
#include <sstream>
#include <string>

namespace amc::testing {

class ProgramGen {
public:
    explicit ProgramGen(std::uint64_t seed) : rng_(seed) {}

    std::string generate()
    {
        std::ostringstream os;
        os << "int a, b, c0, c1;\ndouble u, v;\n";
        int a_lo = pick(-4, 2);
        os << "know (a >= " << a_lo << " && a <= " << a_lo + pick(0, 4) << ");\n";
        double u_lo = pick(-4, 2) * 0.25;
        os << "know (u >= " << real(u_lo) << " && u <= " << real(u_lo + pick(0, 4) * 0.25) << ");\n";
        os << "b = " << pick(-3, 3) << ";\n";
        os << "v = " << real(pick(-2, 2) * 0.5) << ";\n";
        int count = pick(1, 5);
        for (int i = 0; i < count; ++i)
            stmt(os, 0);
        os << "know (" << atom(1) << ");\n";
        return os.str();
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return pick(0, 1) == 1; }

    static std::string real(double v)
    {
        std::ostringstream os;
        os << v;
        std::string s = os.str();
        if (s.find('.') == std::string::npos && s.find('e') == std::string::npos)
            s += ".0";
        return s;
    }

    std::string int_expr(int depth)
    {
        int r = pick(0, depth >= 2 ? 2 : 5);
        switch (r) {
        case 0: return std::to_string(pick(-3, 3));
        case 1: return coin() ? "a" : "b";
        case 2: return "coin_flip()";
        case 3: return "(" + int_expr(depth + 1) + " + " + int_expr(depth + 1) + ")";
        case 4: return "(" + int_expr(depth + 1) + " - " + int_expr(depth + 1) + ")";
        default: return std::to_string(coin() ? 2 : -2) + " * (" + int_expr(depth + 1) + ")";
        }
    }

    std::string real_expr(int depth)
    {
        static const char* literals[] = {"0.5", "1.0", "-0.25", "2.0", "0.1"};
        int r = pick(0, depth >= 2 ? 2 : 5);
        switch (r) {
        case 0: return literals[pick(0, 4)];
        case 1: return coin() ? "u" : "v";
        case 2: return "uniform()";
        case 3: return "(" + real_expr(depth + 1) + " + " + real_expr(depth + 1) + ")";
        case 4: return "(" + real_expr(depth + 1) + " - " + real_expr(depth + 1) + ")";
        default: return std::string(coin() ? "2.0" : "-0.5") + " * (" + real_expr(depth + 1) + ")";
        }
    }

    std::string relop()
    {
        static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
        return ops[pick(0, 5)];
    }

    std::string atom(int depth)
    {
        bool integer = coin();
        std::string lhs;
        if (pick(0, 3) == 0)
            lhs = integer ? int_expr(depth) : real_expr(depth);
        else
            lhs = integer ? (coin() ? "a" : "b") : (coin() ? "u" : "v");
        return lhs + " " + relop() + " " + (integer ? int_expr(depth) : real_expr(depth));
    }

    std::string cond()
    {
        switch (pick(0, 3)) {
        case 0: return atom(1);
        case 1: return atom(1) + " && " + atom(1);
        case 2: return atom(1) + " || " + atom(1);
        default: return "(" + atom(1) + " || " + atom(1) + ") && " + atom(1);
        }
    }

    void stmt(std::ostringstream& os, int depth)
    {
        std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
        int r = pick(0, depth >= 2 ? 3 : 10);
        static const char* assign_ops[] = {" = ", " += ", " -= "};
        switch (r) {
        case 0:
        case 1:
            os << pad << (coin() ? "a" : "b") << assign_ops[pick(0, 2)] << int_expr(0) << ";\n";
            break;
        case 2:
        case 3:
            os << pad << (coin() ? "u" : "v") << assign_ops[pick(0, 2)] << real_expr(0) << ";\n";
            break;
        case 4:
        case 5: {
            os << pad << "if (" << cond() << ") {\n";
            int n = pick(0, 2);
            for (int i = 0; i < n; ++i)
                stmt(os, depth + 1);
            os << pad << "}";
            if (coin()) {
                os << " else {\n";
                int m = pick(1, 2);
                for (int i = 0; i < m; ++i)
                    stmt(os, depth + 1);
                os << pad << "}";
            }
            os << "\n";
            break;
        }
        case 6:
        case 7: {
            std::string counter = "c" + std::to_string(depth);
            os << pad << counter << " = 0;\n";
            os << pad << "while (" << counter << " < " << pick(0, 3) << ") {\n";
            int n = pick(1, 2);
            for (int i = 0; i < n; ++i)
                stmt(os, depth + 1);
            os << pad << "  " << counter << " += 1;\n";
            os << pad << "}\n";
            break;
        }
        case 8:
            os << pad << "know (" << atom(1) << ");\n";
            break;
        case 9:
            os << pad << "while (b < " << pick(0, 6) << ") {\n"
               << pad << "  b += 1 + coin_flip();\n"
               << pad << "}\n";
            break;
        default:
            os << pad << "while (v < " << real(pick(0, 3) * 1.0) << ") {\n"
               << pad << "  v += uniform() + 0.25;\n"
               << pad << "}\n";
            break;
        }
    }

    std::mt19937_64 rng_;
};

}  // namespace amc::testing
