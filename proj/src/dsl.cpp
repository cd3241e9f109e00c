#include "nambukit/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>
#include <utility>
#include <variant>

namespace nambukit {

namespace dsl {

// ---------------------------------------------------------------- lexer --

struct Token {
    enum class Type { ident, number, sym, end };
    Type type = Type::end;
    std::string text;
    Rational value;
    int line = 1, col = 1;
};

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {  // comment to end of line
            while (i < src.size() && src[i] != '\n') advance(src[i++]);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(c);
            ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            t.type = Token::Type::ident;
            t.text = src.substr(i, j - i);
            while (i < j) advance(src[i++]);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.type = Token::Type::number;
            t.text = src.substr(i, j - i);
            t.value = Rational(mpz_class(t.text));
            while (i < j) advance(src[i++]);
        } else if (std::string("+-*/^(){},;=").find(c) != std::string::npos) {
            t.type = Token::Type::sym;
            t.text = std::string(1, c);
            advance(c);
            ++i;
        } else {
            throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.type = Token::Type::end;
    end.line = line;
    end.col = col;
    out.push_back(std::move(end));
    return out;
}

} // namespace

// ------------------------------------------------------------ expression --

struct Expr {
    enum class Kind { number, ident, neg, add, sub, mul, div, powedge };
    Kind kind = Kind::number;
    Rational number;
    std::string name;
    std::unique_ptr<Expr> a, b;
    int line = 1, col = 1;
};

struct Statement {
    enum class Kind {
        decl,
        check_fi,
        bracket_cmd,
        sharp_cmd,
        hamiltonian_cmd,
        decomposable_cmd,
        ann1_cmd,
        anntop_cmd,
        reduce_cmd,
        subordinate_cmd,
        canonicity_cmd,
        gauge_cmd,
        commute_cmd,
        oracle_cmd
    };
    Kind kind = Kind::decl;
    std::string echo;  // canonical statement text, semicolon included
    std::string target;
    std::vector<std::string> fn_args;
    std::string on_name, by_name, with_name, via_name, as_name, gauge_name;
    std::string oracle_kind;
    int order = 0, bound = 0, points = 0;
    std::unique_ptr<Expr> expr;  // sharp argument
    std::string expr_text;       // its normalized source text
};

namespace {

// --------------------------------------------------------- typed values --

using Value = std::variant<RationalFunction, Form, Multivector>;

struct EvalCtx {
    ChartPtr chart;
    const std::map<std::string, RationalFunction>* fns = nullptr;
    const std::map<std::string, Form>* forms = nullptr;
    bool collapsed = false;  // set when a wedge of nonzero factors vanished
};

[[noreturn]] void eval_fail(const Expr& e, const std::string& msg) {
    throw SyntaxError(e.line, e.col, msg);
}

std::string kind_word(const Value& v) {
    switch (v.index()) {
        case 0: return "scalar";
        case 1: return "form";
        default: return "multivector";
    }
}

Value eval(const Expr& e, EvalCtx& ctx) {
    const ChartPtr& chart = ctx.chart;
    switch (e.kind) {
        case Expr::Kind::number:
            return RationalFunction::constant(chart, e.number);
        case Expr::Kind::ident: {
            if (auto idx = chart->index_of(e.name))
                return RationalFunction::variable(chart, *idx);
            if (e.name.size() > 1 && (e.name[0] == 'D' || e.name[0] == 'd')) {
                if (auto idx = chart->index_of(e.name.substr(1));
                    idx && chart->is_coord(*idx)) {
                    auto one = RationalFunction::constant(chart, Rational(1));
                    if (e.name[0] == 'D')
                        return Multivector::blade(chart, {static_cast<int>(*idx)}, one);
                    return Form::blade(chart, {static_cast<int>(*idx)}, one);
                }
            }
            if (ctx.fns) {
                auto it = ctx.fns->find(e.name);
                if (it != ctx.fns->end() && *it->second.chart() == *chart)
                    return it->second;
            }
            if (ctx.forms) {
                auto it = ctx.forms->find(e.name);
                if (it != ctx.forms->end() && *it->second.chart() == *chart)
                    return it->second;
            }
            throw UnknownName(e.name);
        }
        case Expr::Kind::neg: {
            Value v = eval(*e.a, ctx);
            if (auto* s = std::get_if<RationalFunction>(&v)) return -*s;
            if (auto* f = std::get_if<Form>(&v)) return -*f;
            return -std::get<Multivector>(v);
        }
        case Expr::Kind::add:
        case Expr::Kind::sub: {
            Value va = eval(*e.a, ctx);
            Value vb = eval(*e.b, ctx);
            bool sub = e.kind == Expr::Kind::sub;
            if (va.index() != vb.index())
                eval_fail(e, "cannot combine a " + kind_word(va) + " with a " +
                                 kind_word(vb));
            if (auto* s = std::get_if<RationalFunction>(&va))
                return sub ? *s - std::get<RationalFunction>(vb)
                           : *s + std::get<RationalFunction>(vb);
            if (auto* f = std::get_if<Form>(&va))
                return sub ? *f - std::get<Form>(vb) : *f + std::get<Form>(vb);
            return sub ? std::get<Multivector>(va) - std::get<Multivector>(vb)
                       : std::get<Multivector>(va) + std::get<Multivector>(vb);
        }
        case Expr::Kind::mul: {
            Value va = eval(*e.a, ctx);
            Value vb = eval(*e.b, ctx);
            if (va.index() != 0 && vb.index() != 0)
                eval_fail(e, "tensor factors combine with ^ (wedge), not *");
            if (va.index() != 0) std::swap(va, vb);
            const auto& s = std::get<RationalFunction>(va);
            if (auto* t = std::get_if<RationalFunction>(&vb)) return s * *t;
            if (auto* f = std::get_if<Form>(&vb)) return f->scaled(s);
            return std::get<Multivector>(vb).scaled(s);
        }
        case Expr::Kind::div: {
            Value va = eval(*e.a, ctx);
            Value vb = eval(*e.b, ctx);
            auto* s = std::get_if<RationalFunction>(&vb);
            if (!s) eval_fail(e, "division needs a scalar divisor");
            if (s->is_zero()) throw DivisionByZero();
            if (auto* t = std::get_if<RationalFunction>(&va)) return *t / *s;
            auto inv = RationalFunction::constant(ctx.chart, Rational(1)) / *s;
            if (auto* f = std::get_if<Form>(&va)) return f->scaled(inv);
            return std::get<Multivector>(va).scaled(inv);
        }
        case Expr::Kind::powedge: {
            Value va = eval(*e.a, ctx);
            Value vb = eval(*e.b, ctx);
            if (va.index() == 0 && vb.index() == 0) {
                const auto& base = std::get<RationalFunction>(va);
                const auto& ex = std::get<RationalFunction>(vb);
                if (!ex.is_constant())
                    eval_fail(e, "exponent must be a constant integer");
                Rational r = ex.constant_value();
                if (!r.is_integer()) eval_fail(e, "exponent must be an integer");
                long n = 0;
                try {
                    n = std::stol(r.str());
                } catch (const std::exception&) {
                    eval_fail(e, "exponent out of range");
                }
                if (n > 64 || n < -64) eval_fail(e, "exponent out of range");
                return base.pow(n);
            }
            if (va.index() == 1 && vb.index() == 1) {
                const auto& x = std::get<Form>(va);
                const auto& y = std::get<Form>(vb);
                Form w = wedge(x, y);
                if (w.is_zero() && !x.is_zero() && !y.is_zero()) ctx.collapsed = true;
                return w;
            }
            if (va.index() == 2 && vb.index() == 2) {
                const auto& x = std::get<Multivector>(va);
                const auto& y = std::get<Multivector>(vb);
                Multivector w = wedge(x, y);
                if (w.is_zero() && !x.is_zero() && !y.is_zero()) ctx.collapsed = true;
                return w;
            }
            eval_fail(e, "cannot wedge a " + kind_word(va) + " with a " + kind_word(vb));
        }
    }
    throw NambuError("unreachable expression kind");
}

// ---------------------------------------------------------------- parser --

const std::set<std::string> kReserved = {
    "chart",   "params",      "fn",          "form",   "nambu",  "submanifold",
    "bundle",  "map",         "span",        "order",  "on",     "by",
    "with",    "via",         "as",          "to",     "bound",  "points",
    "gauge",   "commute",     "oracle",      "reduce", "subordinate",
    "canonicity", "ann1",     "anntop",      "sharp",  "bracket",
    "hamiltonian", "decomposable", "check",  "fi",     "adjunction", "anchor"};

enum class ObjKind { scalar, form, structure, submanifold, bundle, chart_map };

const char* kind_name(ObjKind k) {
    switch (k) {
        case ObjKind::scalar: return "function";
        case ObjKind::form: return "form";
        case ObjKind::structure: return "structure";
        case ObjKind::submanifold: return "submanifold";
        case ObjKind::bundle: return "bundle";
        default: return "map";
    }
}

class Parser {
public:
    Parser(std::vector<Token> ts, Session& out, std::vector<Statement>& stmts,
           ChartPtr& chart, std::vector<std::string>& warnings,
           std::map<std::string, RationalFunction>& fns, std::map<std::string, Form>& forms,
           std::map<std::string, NambuStructure>& structures,
           std::map<std::string, SubmanifoldSpec>& submanifolds,
           std::map<std::string, SubbundleSpec>& bundles,
           std::map<std::string, AffineMap>& maps)
        : ts_(std::move(ts)), chart_(chart), warnings_(warnings), fns_(fns), forms_(forms),
          structures_(structures), submanifolds_(submanifolds), bundles_(bundles),
          maps_(maps), stmts_(stmts) {
        (void)out;
    }

    void parse_all() {
        while (peek().type != Token::Type::end) statement();
    }

private:
    std::vector<Token> ts_;
    std::size_t i_ = 0;
    ChartPtr& chart_;
    std::vector<std::string>& warnings_;
    std::map<std::string, RationalFunction>& fns_;
    std::map<std::string, Form>& forms_;
    std::map<std::string, NambuStructure>& structures_;
    std::map<std::string, SubmanifoldSpec>& submanifolds_;
    std::map<std::string, SubbundleSpec>& bundles_;
    std::map<std::string, AffineMap>& maps_;
    std::vector<Statement>& stmts_;
    std::map<std::string, ObjKind> kinds_;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t j = i_ + ahead;
        return j < ts_.size() ? ts_[j] : ts_.back();
    }
    Token get() { return ts_[std::min(i_++, ts_.size() - 1)]; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        throw SyntaxError(t.line, t.col, msg);
    }

    bool accept_sym(const char* s) {
        if (peek().type == Token::Type::sym && peek().text == s) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect_sym(const char* s) {
        if (!accept_sym(s)) fail(peek(), std::string("expected '") + s + "'");
    }
    bool accept_kw(const char* kw) {
        if (peek().type == Token::Type::ident && peek().text == kw) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect_kw(const char* kw) {
        if (!accept_kw(kw)) fail(peek(), std::string("expected '") + kw + "'");
    }
    std::string expect_ident(const char* what) {
        if (peek().type != Token::Type::ident)
            fail(peek(), std::string("expected ") + what);
        return get().text;
    }
    int expect_int(const char* what) {
        if (peek().type != Token::Type::number)
            fail(peek(), std::string("expected ") + what);
        Token t = get();
        try {
            return std::stoi(t.text);
        } catch (const std::exception&) {
            fail(t, std::string(what) + " out of range");
        }
    }

    void require_chart(const Token& at) const {
        if (!chart_) fail(at, "declare the chart first");
    }

    std::string fresh_name(const Token& at) {
        std::string name = expect_ident("a name");
        if (kReserved.count(name)) fail(at, "'" + name + "' is a reserved word");
        if (kinds_.count(name) || (chart_ && chart_->index_of(name)))
            throw DuplicateName(name);
        if (chart_ && name.size() > 1 && (name[0] == 'D' || name[0] == 'd') &&
            chart_->index_of(name.substr(1)))
            fail(at, "'" + name + "' collides with a basis element");
        return name;
    }

    std::string known_name(ObjKind want) {
        const Token& at = peek();
        std::string name = expect_ident("a declared name");
        auto it = kinds_.find(name);
        if (it == kinds_.end()) throw UnknownName(name);
        if (it->second != want)
            fail(at, "'" + name + "' is a " + kind_name(it->second) + ", expected a " +
                         kind_name(want));
        return name;
    }

    // ------------------------------------------------------- expressions --

    std::unique_ptr<Expr> parse_prefix(std::size_t& from) {
        const Token& t = peek();
        if (t.type == Token::Type::number) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::number;
            e->number = t.value;
            e->line = t.line;
            e->col = t.col;
            ++i_;
            return e;
        }
        if (t.type == Token::Type::ident) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::ident;
            e->name = t.text;
            e->line = t.line;
            e->col = t.col;
            ++i_;
            return e;
        }
        if (t.type == Token::Type::sym && t.text == "(") {
            ++i_;
            auto e = parse_expr_bp(0, from);
            expect_sym(")");
            return e;
        }
        if (t.type == Token::Type::sym && t.text == "-") {
            ++i_;
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::neg;
            e->line = t.line;
            e->col = t.col;
            e->a = parse_expr_bp(15, from);
            return e;
        }
        fail(t, "expected an expression");
    }

    std::unique_ptr<Expr> parse_expr_bp(int min_bp, std::size_t& from) {
        auto lhs = parse_prefix(from);
        for (;;) {
            const Token& t = peek();
            if (t.type != Token::Type::sym) break;
            int bp;
            Expr::Kind k;
            if (t.text == "+") {
                bp = 10;
                k = Expr::Kind::add;
            } else if (t.text == "-") {
                bp = 10;
                k = Expr::Kind::sub;
            } else if (t.text == "*") {
                bp = 20;
                k = Expr::Kind::mul;
            } else if (t.text == "/") {
                bp = 20;
                k = Expr::Kind::div;
            } else if (t.text == "^") {
                bp = 30;
                k = Expr::Kind::powedge;
            } else {
                break;
            }
            if (bp <= min_bp) break;
            ++i_;
            auto node = std::make_unique<Expr>();
            node->kind = k;
            node->line = t.line;
            node->col = t.col;
            node->a = std::move(lhs);
            node->b = parse_expr_bp(bp, from);
            lhs = std::move(node);
        }
        return lhs;
    }

    // Parses an expression, also returning its normalized source text
    // (tokens joined without spaces; stable under re-lexing).
    std::unique_ptr<Expr> parse_expr(std::string* text_out = nullptr) {
        std::size_t from = i_;
        auto e = parse_expr_bp(0, from);
        if (text_out) {
            std::string s;
            for (std::size_t j = from; j < i_; ++j) s += ts_[j].text;
            *text_out = std::move(s);
        }
        return e;
    }

    Value eval_here(const Expr& e, bool* collapsed = nullptr) {
        EvalCtx ctx;
        ctx.chart = chart_;
        ctx.fns = &fns_;
        ctx.forms = &forms_;
        Value v = eval(e, ctx);
        if (collapsed) *collapsed = ctx.collapsed;
        return v;
    }

    RationalFunction eval_scalar(const Expr& e) {
        Value v = eval_here(e);
        auto* s = std::get_if<RationalFunction>(&v);
        if (!s) eval_fail(e, "expected a scalar expression");
        return *s;
    }

    MultiPoly eval_poly(const Expr& e) {
        RationalFunction f = eval_scalar(e);
        if (!f.is_polynomial())
            eval_fail(e, "expected a polynomial (no denominators)");
        return f.num().scaled(f.den().constant_value().inverse());
    }

    // ------------------------------------------------------- statements --

    void statement() {
        const Token& t = peek();
        if (t.type != Token::Type::ident) fail(t, "expected a statement");
        const std::string& kw = t.text;
        if (kw == "chart") return decl_chart();
        if (kw == "fn") return decl_fn();
        if (kw == "form") return decl_form();
        if (kw == "nambu") return decl_nambu();
        if (kw == "submanifold") return decl_submanifold();
        if (kw == "bundle") return decl_bundle();
        if (kw == "map") return decl_map();
        if (kw == "check") return cmd_check_fi();
        if (kw == "bracket") return cmd_fnlist(Statement::Kind::bracket_cmd, "bracket");
        if (kw == "sharp") return cmd_sharp();
        if (kw == "hamiltonian")
            return cmd_fnlist(Statement::Kind::hamiltonian_cmd, "hamiltonian");
        if (kw == "decomposable") return cmd_decomposable();
        if (kw == "ann1") return cmd_annihilator(Statement::Kind::ann1_cmd, "ann1");
        if (kw == "anntop") return cmd_annihilator(Statement::Kind::anntop_cmd, "anntop");
        if (kw == "reduce") return cmd_reduce();
        if (kw == "subordinate") return cmd_subordinate();
        if (kw == "canonicity") return cmd_canonicity();
        if (kw == "gauge") return cmd_gauge();
        if (kw == "commute") return cmd_commute();
        if (kw == "oracle") return cmd_oracle();
        fail(t, "unknown statement '" + kw + "'");
    }

    void push_decl(std::string echo) {
        Statement s;
        s.kind = Statement::Kind::decl;
        s.echo = std::move(echo);
        stmts_.push_back(std::move(s));
    }

    void decl_chart() {
        const Token& at = peek();
        expect_kw("chart");
        if (chart_) fail(at, "chart already declared");
        std::vector<std::string> coords, params;
        while (peek().type == Token::Type::ident && peek().text != "params") {
            std::string n = get().text;
            if (kReserved.count(n)) fail(at, "'" + n + "' is a reserved word");
            coords.push_back(n);
        }
        if (coords.empty()) fail(peek(), "chart needs at least one coordinate");
        if (accept_kw("params"))
            while (peek().type == Token::Type::ident) {
                std::string n = get().text;
                if (kReserved.count(n)) fail(at, "'" + n + "' is a reserved word");
                params.push_back(n);
            }
        expect_sym(";");
        std::set<std::string> seen;
        for (const auto& n : coords)
            if (!seen.insert(n).second) throw DuplicateName(n);
        for (const auto& n : params)
            if (!seen.insert(n).second) throw DuplicateName(n);
        chart_ = Chart::make(coords, params);
        std::string echo = "chart";
        for (const auto& n : coords) echo += " " + n;
        if (!params.empty()) {
            echo += " params";
            for (const auto& n : params) echo += " " + n;
        }
        push_decl(echo + ";");
    }

    void decl_fn() {
        const Token& at = peek();
        expect_kw("fn");
        require_chart(at);
        std::string name = fresh_name(at);
        expect_sym("=");
        auto e = parse_expr();
        expect_sym(";");
        RationalFunction v = eval_scalar(*e);
        fns_.emplace(name, v);
        kinds_[name] = ObjKind::scalar;
        push_decl("fn " + name + " = " + v.str() + ";");
    }

    void decl_form() {
        const Token& at = peek();
        expect_kw("form");
        require_chart(at);
        std::string name = fresh_name(at);
        expect_sym("=");
        auto e = parse_expr();
        expect_sym(";");
        Value v = eval_here(*e);
        auto* f = std::get_if<Form>(&v);
        if (!f) eval_fail(*e, "form declarations need differential factors");
        forms_.emplace(name, *f);
        kinds_[name] = ObjKind::form;
        push_decl("form " + name + " = " + f->str() + ";");
    }

    void decl_nambu() {
        const Token& at = peek();
        expect_kw("nambu");
        require_chart(at);
        std::string name = fresh_name(at);
        expect_kw("order");
        int order = expect_int("an order");
        expect_sym("=");
        auto e = parse_expr();
        expect_sym(";");
        bool collapsed = false;
        Value v = eval_here(*e, &collapsed);
        auto* mv = std::get_if<Multivector>(&v);
        if (!mv) eval_fail(*e, "a structure needs basis vector factors");
        if (collapsed)
            warnings_.push_back("nambu " + name +
                                ": a wedge with a repeated index collapsed to zero");
        NambuStructure s(order, *mv);
        structures_.emplace(name, std::move(s));
        kinds_[name] = ObjKind::structure;
        push_decl("nambu " + name + " order " + std::to_string(order) + " = " + mv->str() +
                  ";");
    }

    void decl_submanifold() {
        const Token& at = peek();
        expect_kw("submanifold");
        require_chart(at);
        std::string name = fresh_name(at);
        expect_sym("=");
        expect_sym("{");
        std::vector<MultiPoly> constraints;
        if (!accept_sym("}")) {
            do {
                constraints.push_back(eval_poly(*parse_expr()));
            } while (accept_sym(","));
            expect_sym("}");
        }
        expect_sym(";");
        SubmanifoldSpec n(chart_, std::move(constraints));
        std::string echo = "submanifold " + name + " = {";
        for (std::size_t k = 0; k < n.constraints().size(); ++k)
            echo += (k ? ", " : " ") + n.constraints()[k].str();
        echo += n.constraints().empty() ? "};" : " };";
        submanifolds_.emplace(name, std::move(n));
        kinds_[name] = ObjKind::submanifold;
        push_decl(std::move(echo));
    }

    void decl_bundle() {
        const Token& at = peek();
        expect_kw("bundle");
        require_chart(at);
        std::string name = fresh_name(at);
        expect_kw("on");
        std::string base = known_name(ObjKind::submanifold);
        expect_sym("=");
        expect_kw("span");
        expect_sym("(");
        std::vector<Multivector> span;
        if (!accept_sym(")")) {
            do {
                auto e = parse_expr();
                Value v = eval_here(*e);
                auto* mv = std::get_if<Multivector>(&v);
                if (!mv) eval_fail(*e, "spanning entries must be vector fields");
                span.push_back(*mv);
            } while (accept_sym(","));
            expect_sym(")");
        }
        expect_sym(";");
        SubbundleSpec e(submanifolds_.at(base), std::move(span));
        std::string echo = "bundle " + name + " on " + base + " = span(";
        for (std::size_t k = 0; k < e.span_rows().size(); ++k) {
            Multivector row(chart_, 1);
            for (std::size_t j = 0; j < e.span_rows()[k].size(); ++j)
                row.add_term({static_cast<int>(j)},
                             RationalFunction::constant(chart_, e.span_rows()[k][j]));
            echo += (k ? ", " : "") + row.str();
        }
        echo += ");";
        bundles_.emplace(name, std::move(e));
        kinds_[name] = ObjKind::bundle;
        push_decl(std::move(echo));
    }

    void decl_map() {
        const Token& at = peek();
        expect_kw("map");
        require_chart(at);
        std::string name = fresh_name(at);
        expect_kw("to");
        expect_sym("(");
        std::vector<std::string> names;
        while (peek().type == Token::Type::ident) names.push_back(get().text);
        expect_sym(")");
        std::size_t m = chart_->coord_count();
        if (names.size() != m) fail(at, "target needs one name per coordinate");
        expect_sym("=");
        expect_sym("(");
        std::vector<MultiPoly> images;
        do {
            images.push_back(eval_poly(*parse_expr()));
        } while (accept_sym(","));
        expect_sym(")");
        expect_sym(";");
        if (images.size() != m) fail(at, "need one image per coordinate");

        Mat<Rational> a(m, m, Rational(0));
        QVec b(m, Rational(0));
        for (std::size_t r = 0; r < m; ++r) {
            for (const auto& [mono, coeff] : images[r].terms()) {
                unsigned deg = total_degree(mono);
                if (deg == 0) {
                    b[r] = coeff;
                    continue;
                }
                if (deg > 1)
                    fail(at, "map images must be affine in the coordinates");
                std::size_t var = 0;
                while (var < mono.size() && mono[var] == 0) ++var;
                if (var >= m) fail(at, "map images may not involve parameters");
                a.at(r, var) = coeff;
            }
        }
        std::vector<std::string> params;
        for (std::size_t i = m; i < chart_->size(); ++i) params.push_back(chart_->name(i));
        ChartPtr target = Chart::make(names, params);
        AffineMap map(chart_, target, a, b);

        std::string echo = "map " + name + " to (";
        for (std::size_t k = 0; k < names.size(); ++k) echo += (k ? " " : "") + names[k];
        echo += ") = (";
        for (std::size_t r = 0; r < m; ++r) {
            MultiPoly img = MultiPoly::constant(chart_, b[r]);
            for (std::size_t j = 0; j < m; ++j)
                img += MultiPoly::variable(chart_, j).scaled(map.matrix().at(r, j));
            echo += (r ? ", " : "") + img.str();
        }
        echo += ");";
        maps_.emplace(name, std::move(map));
        kinds_[name] = ObjKind::chart_map;
        push_decl(std::move(echo));
    }

    // --------------------------------------------------------- commands --

    void push_cmd(Statement s) { stmts_.push_back(std::move(s)); }

    std::string register_as(const Token& at) {
        std::string name = fresh_name(at);
        kinds_[name] = ObjKind::structure;
        return name;
    }

    void cmd_check_fi() {
        const Token& at = peek();
        expect_kw("check");
        expect_sym("-");
        expect_kw("fi");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::check_fi;
        s.target = known_name(ObjKind::structure);
        expect_sym(";");
        s.echo = "check-fi " + s.target + ";";
        push_cmd(std::move(s));
    }

    void cmd_fnlist(Statement::Kind kind, const char* verb) {
        const Token& at = peek();
        expect_kw(verb);
        require_chart(at);
        Statement s;
        s.kind = kind;
        s.target = known_name(ObjKind::structure);
        while (peek().type == Token::Type::ident) s.fn_args.push_back(get().text);
        if (s.fn_args.empty()) fail(peek(), "expected function names");
        expect_sym(";");
        s.echo = std::string(verb) + " " + s.target;
        for (const auto& f : s.fn_args) s.echo += " " + f;
        s.echo += ";";
        push_cmd(std::move(s));
    }

    void cmd_sharp() {
        const Token& at = peek();
        expect_kw("sharp");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::sharp_cmd;
        s.target = known_name(ObjKind::structure);
        s.expr = parse_expr(&s.expr_text);
        expect_sym(";");
        s.echo = "sharp " + s.target + " " + s.expr_text + ";";
        push_cmd(std::move(s));
    }

    void cmd_decomposable() {
        const Token& at = peek();
        expect_kw("decomposable");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::decomposable_cmd;
        s.target = known_name(ObjKind::structure);
        expect_sym(";");
        s.echo = "decomposable " + s.target + ";";
        push_cmd(std::move(s));
    }

    void cmd_annihilator(Statement::Kind kind, const char* verb) {
        const Token& at = peek();
        expect_kw(verb);
        require_chart(at);
        Statement s;
        s.kind = kind;
        s.target = known_name(kind == Statement::Kind::ann1_cmd ? ObjKind::bundle
                                                                : ObjKind::submanifold);
        expect_kw("order");
        s.order = expect_int("an order");
        expect_sym(";");
        s.echo = std::string(verb) + " " + s.target + " order " + std::to_string(s.order) +
                 ";";
        push_cmd(std::move(s));
    }

    void parse_problem_clauses(Statement& s) {
        expect_kw("on");
        s.on_name = known_name(ObjKind::submanifold);
        expect_kw("by");
        s.by_name = known_name(ObjKind::bundle);
        if (accept_kw("with")) s.with_name = known_name(ObjKind::bundle);
        if (accept_kw("via")) s.via_name = known_name(ObjKind::chart_map);
    }

    std::string problem_echo(const Statement& s) const {
        std::string e = " on " + s.on_name + " by " + s.by_name;
        if (!s.with_name.empty()) e += " with " + s.with_name;
        if (!s.via_name.empty()) e += " via " + s.via_name;
        return e;
    }

    void cmd_reduce() {
        const Token& at = peek();
        expect_kw("reduce");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::reduce_cmd;
        s.target = known_name(ObjKind::structure);
        parse_problem_clauses(s);
        if (accept_kw("as")) s.as_name = register_as(at);
        expect_sym(";");
        s.echo = "reduce " + s.target + problem_echo(s) +
                 (s.as_name.empty() ? "" : " as " + s.as_name) + ";";
        push_cmd(std::move(s));
    }

    void cmd_subordinate() {
        const Token& at = peek();
        expect_kw("subordinate");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::subordinate_cmd;
        s.target = known_name(ObjKind::structure);
        expect_kw("by");
        while (peek().type == Token::Type::ident && peek().text != "as")
            s.fn_args.push_back(get().text);
        if (s.fn_args.empty()) fail(peek(), "expected function names");
        if (accept_kw("as")) s.as_name = register_as(at);
        expect_sym(";");
        s.echo = "subordinate " + s.target + " by";
        for (const auto& f : s.fn_args) s.echo += " " + f;
        if (!s.as_name.empty()) s.echo += " as " + s.as_name;
        s.echo += ";";
        push_cmd(std::move(s));
    }

    void cmd_canonicity() {
        const Token& at = peek();
        expect_kw("canonicity");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::canonicity_cmd;
        s.target = known_name(ObjKind::structure);
        expect_kw("by");
        s.by_name = known_name(ObjKind::bundle);
        expect_kw("bound");
        s.bound = expect_int("a degree bound");
        expect_sym(";");
        s.echo = "canonicity " + s.target + " by " + s.by_name + " bound " +
                 std::to_string(s.bound) + ";";
        push_cmd(std::move(s));
    }

    void cmd_gauge() {
        const Token& at = peek();
        expect_kw("gauge");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::gauge_cmd;
        s.target = known_name(ObjKind::structure);
        expect_kw("by");
        s.by_name = known_name(ObjKind::form);
        if (accept_kw("as")) s.as_name = register_as(at);
        expect_sym(";");
        s.echo = "gauge " + s.target + " by " + s.by_name +
                 (s.as_name.empty() ? "" : " as " + s.as_name) + ";";
        push_cmd(std::move(s));
    }

    void cmd_commute() {
        const Token& at = peek();
        expect_kw("commute");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::commute_cmd;
        s.target = known_name(ObjKind::structure);
        parse_problem_clauses(s);
        expect_kw("gauge");
        s.gauge_name = known_name(ObjKind::form);
        expect_sym(";");
        s.echo = "commute " + s.target + problem_echo(s) + " gauge " + s.gauge_name + ";";
        push_cmd(std::move(s));
    }

    void cmd_oracle() {
        const Token& at = peek();
        expect_kw("oracle");
        require_chart(at);
        Statement s;
        s.kind = Statement::Kind::oracle_cmd;
        s.oracle_kind = expect_ident("an oracle kind");
        if (s.oracle_kind != "fi" && s.oracle_kind != "adjunction" &&
            s.oracle_kind != "anchor")
            fail(at, "oracle kinds: fi, adjunction, anchor");
        s.target = known_name(ObjKind::structure);
        if (s.oracle_kind == "anchor") {
            expect_kw("by");
            s.by_name = known_name(ObjKind::form);
        }
        expect_kw("points");
        s.points = expect_int("a point count");
        expect_sym(";");
        s.echo = "oracle " + s.oracle_kind + " " + s.target +
                 (s.by_name.empty() ? "" : " by " + s.by_name) + " points " +
                 std::to_string(s.points) + ";";
        push_cmd(std::move(s));
    }
};

std::string chart_text(const ChartPtr& c) {
    std::string s = "(";
    for (std::size_t i = 0; i < c->coord_count(); ++i)
        s += (i ? ", " : "") + c->name(i);
    s += ")";
    if (c->param_count() > 0) {
        s += " params (";
        for (std::size_t i = 0; i < c->param_count(); ++i)
            s += (i ? ", " : "") + c->name(c->coord_count() + i);
        s += ")";
    }
    return s;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

} // namespace

} // namespace dsl

// ------------------------------------------------------------- reports --

bool Report::all_pass() const {
    for (const auto& c : commands)
        if (!c.pass) return false;
    return true;
}

std::string Report::text() const {
    std::ostringstream os;
    os << "seed " << seed << "\n";
    for (const auto& w : warnings) os << "warning: " << w << "\n";
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const auto& c = commands[i];
        char t[32];
        std::snprintf(t, sizeof t, "%.2fs", c.seconds);
        os << "[" << (i + 1) << "] " << c.echo << "\n";
        os << "    " << c.verdict << "  [" << t << "]\n";
        for (const auto& [k, v] : c.fields) {
            os << "    " << k << ": ";
            for (char ch : v) {
                os << ch;
                if (ch == '\n') os << "        ";
            }
            os << "\n";
        }
    }
    os << "status: " << (all_pass() ? "pass" : "fail") << "\n";
    return os.str();
}

std::string Report::json() const {
    using dsl::json_escape;
    std::ostringstream os;
    os << "{\"schema\":1,\"seed\":" << seed << ",\"warnings\":[";
    for (std::size_t i = 0; i < warnings.size(); ++i)
        os << (i ? "," : "") << "\"" << json_escape(warnings[i]) << "\"";
    os << "],\"commands\":[";
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const auto& c = commands[i];
        os << (i ? "," : "") << "{\"index\":" << (i + 1) << ",\"command\":\""
           << json_escape(c.echo) << "\",\"verdict\":\"" << json_escape(c.verdict)
           << "\",\"pass\":" << (c.pass ? "true" : "false") << ",\"details\":{";
        for (std::size_t j = 0; j < c.fields.size(); ++j)
            os << (j ? "," : "") << "\"" << json_escape(c.fields[j].first) << "\":\""
               << json_escape(c.fields[j].second) << "\"";
        os << "}}";
    }
    os << "],\"status\":\"" << (all_pass() ? "pass" : "fail") << "\"}";
    return os.str();
}

// ------------------------------------------------------------- session --

Session::Session() = default;
Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

Session Session::parse(const std::string& source) {
    Session s;
    dsl::Parser p(dsl::lex(source), s, s.statements_, s.chart_, s.warnings_, s.fns_,
                  s.forms_, s.structures_, s.submanifolds_, s.bundles_, s.maps_);
    p.parse_all();
    return s;
}

std::string Session::render() const {
    std::string out;
    for (const auto& st : statements_) {
        out += st.echo;
        out += "\n";
    }
    return out;
}

namespace {

template <class M>
const typename M::mapped_type& lookup(const M& m, const std::string& name) {
    auto it = m.find(name);
    if (it == m.end()) throw UnknownName(name);
    return it->second;
}

} // namespace

const NambuStructure& Session::structure(const std::string& name) const {
    return lookup(structures_, name);
}
const RationalFunction& Session::fn(const std::string& name) const {
    return lookup(fns_, name);
}
const Form& Session::form(const std::string& name) const { return lookup(forms_, name); }
const SubmanifoldSpec& Session::submanifold(const std::string& name) const {
    return lookup(submanifolds_, name);
}
const SubbundleSpec& Session::bundle(const std::string& name) const {
    return lookup(bundles_, name);
}
const AffineMap& Session::chart_map(const std::string& name) const {
    return lookup(maps_, name);
}

// -------------------------------------------------------------- runner --

// Namespace-scope definition: Session names this struct as a friend.
struct Runner {
    using Statement = dsl::Statement;
    const Session& s;
    RunOptions opts;
    // Structures registered by `as` clauses during this run, possibly on
    // quotient charts.
    std::map<std::string, NambuStructure> registered;

    const NambuStructure& structure(const std::string& name) {
        auto it = registered.find(name);
        if (it != registered.end()) return it->second;
        return s.structure(name);
    }

    RationalFunction resolve_fn(const ChartPtr& chart, const std::string& name) {
        if (auto idx = chart->index_of(name))
            return RationalFunction::variable(chart, *idx);
        try {
            const RationalFunction& f = s.fn(name);
            if (*f.chart() == *chart) return f;
        } catch (const UnknownName&) {
        }
        throw UnknownName(name + " (on chart " + dsl::chart_text(chart) + ")");
    }

    std::vector<RationalFunction> resolve_fns(const ChartPtr& chart,
                                              const std::vector<std::string>& names) {
        std::vector<RationalFunction> out;
        for (const auto& n : names) out.push_back(resolve_fn(chart, n));
        return out;
    }

    ReductionProblem build_problem(const Statement& st) {
        const NambuStructure& pi = structure(st.target);
        const SubmanifoldSpec& n = s.submanifold(st.on_name);
        std::optional<SubbundleSpec> d;
        if (!st.with_name.empty()) d = s.bundle(st.with_name);
        std::optional<AffineMap> via;
        if (!st.via_name.empty()) via = s.chart_map(st.via_name);
        return ReductionProblem(pi, n, s.bundle(st.by_name), std::move(d), std::move(via));
    }

    void run_one(const Statement& st, CommandResult& r) {
        switch (st.kind) {
            case Statement::Kind::check_fi: {
                FiReport rep = check_fi(structure(st.target), opts.jobs);
                r.verdict = rep.verified ? "verified" : "refuted";
                r.pass = rep.verified;
                r.fields.emplace_back("pairs_checked", std::to_string(rep.pairs_checked));
                if (rep.witness) {
                    std::string g, f;
                    for (const auto& x : rep.witness->g) g += (g.empty() ? "" : ", ") + x.str();
                    for (const auto& x : rep.witness->f) f += (f.empty() ? "" : ", ") + x.str();
                    r.fields.emplace_back("witness_outer", "(" + g + ")");
                    r.fields.emplace_back("witness_inner", "(" + f + ")");
                    r.fields.emplace_back("residual", rep.witness->residual.str());
                }
                return;
            }
            case Statement::Kind::bracket_cmd: {
                const NambuStructure& pi = structure(st.target);
                RationalFunction v =
                    bracket(pi, resolve_fns(pi.chart(), st.fn_args));
                r.verdict = "ok";
                r.fields.emplace_back("value", v.str());
                return;
            }
            case Statement::Kind::sharp_cmd: {
                const NambuStructure& pi = structure(st.target);
                dsl::EvalCtx ctx;
                ctx.chart = pi.chart();
                ctx.fns = &s.fns_;
                ctx.forms = &s.forms_;
                dsl::Value v = dsl::eval(*st.expr, ctx);
                auto* f = std::get_if<Form>(&v);
                if (!f) throw DegreeMismatch("sharp needs a form argument");
                Multivector x = sharp(pi, *f);
                r.verdict = "ok";
                r.fields.emplace_back("field", x.str());
                return;
            }
            case Statement::Kind::hamiltonian_cmd: {
                const NambuStructure& pi = structure(st.target);
                Multivector x = hamiltonian(pi, resolve_fns(pi.chart(), st.fn_args));
                r.verdict = "ok";
                r.fields.emplace_back("field", x.str());
                return;
            }
            case Statement::Kind::decomposable_cmd: {
                const NambuStructure& pi = structure(st.target);
                DecomposabilityReport rep = check_decomposable(pi);
                r.verdict = rep.decomposable ? "decomposable" : "not decomposable";
                r.pass = rep.decomposable;
                if (rep.witness) {
                    auto names = [&](const MultiIndex& idx) {
                        std::string out = "(";
                        for (std::size_t i = 0; i < idx.size(); ++i)
                            out += (i ? ", " : "") + pi.chart()->name(idx[i]);
                        return out + ")";
                    };
                    r.fields.emplace_back("witness_fixed", names(rep.witness->fixed));
                    r.fields.emplace_back("witness_moving", names(rep.witness->moving));
                    r.fields.emplace_back("residual", rep.witness->residual.str());
                }
                return;
            }
            case Statement::Kind::ann1_cmd: {
                auto forms = ann1(s.bundle(st.target), st.order);
                r.verdict = "ok";
                r.fields.emplace_back("count", std::to_string(forms.size()));
                for (std::size_t i = 0; i < forms.size(); ++i)
                    r.fields.emplace_back("form_" + std::to_string(i + 1), forms[i].str());
                return;
            }
            case Statement::Kind::anntop_cmd: {
                auto forms = ann_top(s.submanifold(st.target), st.order);
                r.verdict = "ok";
                r.fields.emplace_back("count", std::to_string(forms.size()));
                for (std::size_t i = 0; i < forms.size(); ++i)
                    r.fields.emplace_back("form_" + std::to_string(i + 1), forms[i].str());
                return;
            }
            case Statement::Kind::reduce_cmd: {
                ReducedStructure red = reduce(build_problem(st));
                r.verdict = "reduced";
                r.fields.emplace_back("chart", dsl::chart_text(red.quotient_chart));
                r.fields.emplace_back("tensor", red.tensor.tensor().str());
                r.fields.emplace_back("licensed", red.hypothesis_report.licensed_by);
                std::string hyp = red.hypothesis_report.str();
                while (!hyp.empty() && hyp.back() == '\n') hyp.pop_back();
                r.fields.emplace_back("hypotheses", hyp);
                if (!st.as_name.empty()) registered.emplace(st.as_name, red.tensor);
                return;
            }
            case Statement::Kind::subordinate_cmd: {
                const NambuStructure& pi = structure(st.target);
                NambuStructure out =
                    subordinate(pi, resolve_fns(pi.chart(), st.fn_args));
                FiReport rep = check_fi(out, opts.jobs);
                r.verdict = "ok";
                r.pass = rep.verified;
                r.fields.emplace_back("tensor", out.tensor().str());
                r.fields.emplace_back("fi", rep.verified ? "verified" : "refuted");
                if (!st.as_name.empty()) registered.emplace(st.as_name, out);
                return;
            }
            case Statement::Kind::canonicity_cmd: {
                CanonicityReport rep = falsify_canonicity(structure(st.target),
                                                          s.bundle(st.by_name), st.bound);
                r.verdict = rep.canonical_up_to_bound ? "canonical" : "counterexample";
                r.pass = rep.canonical_up_to_bound;
                r.fields.emplace_back("bound", std::to_string(st.bound));
                if (rep.counterexample) {
                    std::string tup;
                    for (const auto& f : rep.counterexample->tuple)
                        tup += (tup.empty() ? "" : ", ") + f.str();
                    r.fields.emplace_back("tuple", "(" + tup + ")");
                    r.fields.emplace_back("bracket",
                                          rep.counterexample->bracket_value.str());
                }
                return;
            }
            case Statement::Kind::gauge_cmd: {
                const NambuStructure& pi = structure(st.target);
                const Form& b = s.form(st.by_name);
                GaugeData g = gauge_matrix(pi, b);
                LeibnizIsoReport iso = check_leibniz_iso(pi, b);
                r.verdict = "transported";
                r.pass = iso.holds;
                r.fields.emplace_back("det", g.det.str());
                r.fields.emplace_back("vanishing_locus", g.vanishing_locus.str());
                r.fields.emplace_back("transported", g.transported.tensor().str());
                r.fields.emplace_back("leibniz_iso", iso.holds ? "holds" : "fails");
                if (!st.as_name.empty()) registered.emplace(st.as_name, g.transported);
                return;
            }
            case Statement::Kind::commute_cmd: {
                CommuteReport rep =
                    gauge_reduce_commute(build_problem(st), s.form(st.gauge_name));
                r.verdict = rep.equal ? "commute" : "differ";
                r.pass = rep.equal;
                r.fields.emplace_back("chart",
                                      dsl::chart_text(rep.gauged_then_reduced.chart()));
                r.fields.emplace_back("gauged_then_reduced",
                                      rep.gauged_then_reduced.tensor().str());
                r.fields.emplace_back("reduced_then_gauged",
                                      rep.reduced_then_gauged.tensor().str());
                r.fields.emplace_back("projected_form", rep.projected_b.str());
                return;
            }
            case Statement::Kind::oracle_cmd: {
                const NambuStructure& pi = structure(st.target);
                OracleOutcome o;
                if (st.oracle_kind == "fi")
                    o = oracle_fi(pi, st.points, opts.seed);
                else if (st.oracle_kind == "adjunction")
                    o = oracle_pair_adjunction(pi, st.points, opts.seed);
                else
                    o = oracle_anchor(pi, s.form(st.by_name), st.points, opts.seed);
                r.verdict = o.ok() ? "agreed" : "mismatch";
                r.pass = o.ok();
                r.fields.emplace_back("points", std::to_string(o.points));
                r.fields.emplace_back("skipped", std::to_string(o.skipped));
                if (o.first_mismatch) r.fields.emplace_back("detail", *o.first_mismatch);
                return;
            }
            case Statement::Kind::decl:
                r.verdict = "ok";
                return;
        }
    }
};

Report Session::run(const RunOptions& opts) const {
    Report rep;
    rep.seed = opts.seed;
    rep.warnings = warnings_;
    Runner runner{*this, opts, {}};
    for (const auto& st : statements_) {
        if (st.kind == dsl::Statement::Kind::decl) continue;
        CommandResult r;
        r.echo = st.echo;
        auto t0 = std::chrono::steady_clock::now();
        try {
            runner.run_one(st, r);
        } catch (const NambuError& e) {
            r.verdict = "error";
            r.pass = false;
            r.fields.emplace_back("error", e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                        .count();
        rep.commands.push_back(std::move(r));
    }
    return rep;
}

} // namespace nambukit
