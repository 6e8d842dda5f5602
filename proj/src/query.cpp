#include "selsense/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace selsense {

std::string push_policy_name(PushPolicy p) {
    switch (p) {
        case PushPolicy::DeferredWifi: return "DEFERRED_WIFI";
        case PushPolicy::RainRealtime3G: return "RAIN_REALTIME_3G";
        case PushPolicy::Immediate: return "IMMEDIATE";
    }
    throw Error("BAD_POLICY", "unhandled push policy");
}

PushPolicy push_policy_from_name(const std::string& name) {
    if (name == "DEFERRED_WIFI") return PushPolicy::DeferredWifi;
    if (name == "RAIN_REALTIME_3G") return PushPolicy::RainRealtime3G;
    if (name == "IMMEDIATE") return PushPolicy::Immediate;
    throw Error("BAD_POLICY", "unknown push policy: " + name);
}

std::string cmp_symbol(Cmp c) {
    switch (c) {
        case Cmp::Lt: return "<";
        case Cmp::Le: return "<=";
        case Cmp::Eq: return "=";
        case Cmp::Ge: return ">=";
        case Cmp::Gt: return ">";
        case Cmp::Ne: return "!=";
    }
    throw Error("BAD_CMP", "unhandled comparator");
}

bool Predicate::operator==(const Predicate& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
        case Kind::ActivityEquals: return activity_code == other.activity_code;
        case Kind::ActivityInSet: return activity_set == other.activity_set;
        case Kind::WithinFence:
            return fence_id == other.fence_id && within_expected == other.within_expected;
        case Kind::NumericCompare:
            return field == other.field && cmp == other.cmp && constant == other.constant;
        case Kind::RainFlag: return rain_expected == other.rain_expected;
    }
    return false;
}

bool GateExpr::operator==(const GateExpr& other) const {
    if (kind != other.kind) return false;
    if (kind == Kind::Leaf) return pred == other.pred;
    return children == other.children;
}

GateExpr GateExpr::leaf(Predicate p) {
    GateExpr g;
    g.kind = Kind::Leaf;
    g.pred = std::move(p);
    return g;
}

GateExpr GateExpr::make_and(GateExpr a, GateExpr b) {
    GateExpr g;
    g.kind = Kind::And;
    g.children = {std::move(a), std::move(b)};
    return g;
}

GateExpr GateExpr::make_or(GateExpr a, GateExpr b) {
    GateExpr g;
    g.kind = Kind::Or;
    g.children = {std::move(a), std::move(b)};
    return g;
}

GateExpr GateExpr::make_not(GateExpr a) {
    GateExpr g;
    g.kind = Kind::Not;
    g.children = {std::move(a)};
    return g;
}

bool QueryAst::operator==(const QueryAst& other) const {
    return selected_fields == other.selected_fields && source == other.source &&
           gate == other.gate && sample_period_sec == other.sample_period_sec &&
           push_policy == other.push_policy;
}

std::vector<std::string> QueryAst::field_names() const {
    std::vector<std::string> names;
    names.reserve(selected_fields.size());
    for (const auto& f : selected_fields) names.push_back(f.name);
    return names;
}

void ValidationReport::add(std::string code, std::string message, SourcePos pos) {
    ok = false;
    issues.push_back({std::move(code), std::move(message), pos});
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Ident, Number, Comma, LParen, RParen, CmpOp, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;
};

struct Lexer {
    explicit Lexer(const std::string& text) : src(text) {}

    const std::string& src;
    size_t i = 0;
    int line = 1;
    int col = 1;

    void advance() {
        if (src[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    }

    Token next() {
        while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) advance();
        Token tok;
        tok.pos = {line, col};
        if (i >= src.size()) {
            tok.kind = Tok::End;
            return tok;
        }
        const char c = src[i];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
                tok.text += src[i];
                advance();
            }
            tok.kind = Tok::Ident;
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            if (c == '-') {
                tok.text += c;
                advance();
            }
            bool seen_dot = false;
            while (i < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) {
                if (src[i] == '.') {
                    if (seen_dot) {
                        throw ParseError("malformed numeric literal", tok.pos.line, tok.pos.column);
                    }
                    seen_dot = true;
                }
                tok.text += src[i];
                advance();
            }
            if (tok.text.back() == '.') {
                throw ParseError("malformed numeric literal", tok.pos.line, tok.pos.column);
            }
            tok.kind = Tok::Number;
            return tok;
        }
        switch (c) {
            case ',': advance(); tok.kind = Tok::Comma; tok.text = ","; return tok;
            case '(': advance(); tok.kind = Tok::LParen; tok.text = "("; return tok;
            case ')': advance(); tok.kind = Tok::RParen; tok.text = ")"; return tok;
            case '<':
                advance();
                tok.kind = Tok::CmpOp;
                tok.text = "<";
                if (i < src.size() && src[i] == '=') {
                    tok.text = "<=";
                    advance();
                }
                return tok;
            case '>':
                advance();
                tok.kind = Tok::CmpOp;
                tok.text = ">";
                if (i < src.size() && src[i] == '=') {
                    tok.text = ">=";
                    advance();
                }
                return tok;
            case '=': advance(); tok.kind = Tok::CmpOp; tok.text = "="; return tok;
            case '!':
                advance();
                if (i < src.size() && src[i] == '=') {
                    advance();
                    tok.kind = Tok::CmpOp;
                    tok.text = "!=";
                    return tok;
                }
                throw ParseError("unexpected character '!'", tok.pos.line, tok.pos.column);
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", tok.pos.line,
                                 tok.pos.column);
        }
    }
};

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

bool is_keyword(const Token& t, const char* kw) {
    return t.kind == Tok::Ident && upper(t.text) == kw;
}

const char* kReservedKeywords[] = {"SELECT", "FROM", "WHERE",  "EVERY",  "AND",
                                   "OR",     "NOT",  "IN",     "ACTIVITY", "WITHIN",
                                   "RAINING"};

bool is_reserved(const Token& t) {
    if (t.kind != Tok::Ident) return false;
    const std::string u = upper(t.text);
    for (const char* kw : kReservedKeywords) {
        if (u == kw) return true;
    }
    return false;
}

struct Parser {
    explicit Parser(const std::string& text) : lexer(text) { cur = lexer.next(); }

    Lexer lexer;
    Token cur;

    void bump() { cur = lexer.next(); }

    [[noreturn]] void fail(const std::string& what) {
        const std::string got = cur.kind == Tok::End ? "end of input" : "'" + cur.text + "'";
        throw ParseError("expected " + what + ", got " + got, cur.pos.line, cur.pos.column);
    }

    void expect_keyword(const char* kw) {
        if (!is_keyword(cur, kw)) fail(std::string("keyword ") + kw);
        bump();
    }

    std::string expect_ident(const char* what) {
        if (cur.kind != Tok::Ident) fail(what);
        if (is_reserved(cur)) {
            throw ParseError("keyword '" + cur.text + "' cannot be used as " + what, cur.pos.line,
                             cur.pos.column);
        }
        std::string name = cur.text;
        bump();
        return name;
    }

    long expect_int(const char* what) {
        if (cur.kind != Tok::Number || cur.text.find('.') != std::string::npos) fail(what);
        long value = 0;
        const auto [ptr, ec] =
            std::from_chars(cur.text.data(), cur.text.data() + cur.text.size(), value);
        if (ec != std::errc() || ptr != cur.text.data() + cur.text.size()) {
            throw ParseError("malformed numeric literal", cur.pos.line, cur.pos.column);
        }
        bump();
        return value;
    }

    double expect_number(const char* what) {
        if (cur.kind != Tok::Number) fail(what);
        double value = 0.0;
        try {
            value = std::stod(cur.text);
        } catch (const std::exception&) {
            throw ParseError("malformed numeric literal", cur.pos.line, cur.pos.column);
        }
        bump();
        return value;
    }

    int expect_bool_literal(const char* what) {
        if (cur.kind != Tok::Number || (cur.text != "0" && cur.text != "1")) fail(what);
        const int v = cur.text == "1" ? 1 : 0;
        bump();
        return v;
    }

    Cmp expect_cmp() {
        if (cur.kind != Tok::CmpOp) fail("comparator");
        Cmp c;
        if (cur.text == "<") c = Cmp::Lt;
        else if (cur.text == "<=") c = Cmp::Le;
        else if (cur.text == "=") c = Cmp::Eq;
        else if (cur.text == ">=") c = Cmp::Ge;
        else if (cur.text == ">") c = Cmp::Gt;
        else c = Cmp::Ne;
        bump();
        return c;
    }

    GateExpr parse_atom() {
        if (cur.kind != Tok::Ident) fail("predicate");
        const SourcePos pos = cur.pos;
        if (is_keyword(cur, "ACTIVITY")) {
            bump();
            if (is_keyword(cur, "IN")) {
                bump();
                if (cur.kind != Tok::LParen) fail("'('");
                bump();
                Predicate p;
                p.kind = Predicate::Kind::ActivityInSet;
                p.pos = pos;
                p.activity_set.push_back(static_cast<int>(expect_int("activity code")));
                while (cur.kind == Tok::Comma) {
                    bump();
                    p.activity_set.push_back(static_cast<int>(expect_int("activity code")));
                }
                if (cur.kind != Tok::RParen) fail("')'");
                bump();
                return GateExpr::leaf(std::move(p));
            }
            if (!(cur.kind == Tok::CmpOp && cur.text == "=")) fail("'=' or IN");
            bump();
            Predicate p;
            p.kind = Predicate::Kind::ActivityEquals;
            p.pos = pos;
            p.activity_code = static_cast<int>(expect_int("activity code"));
            return GateExpr::leaf(std::move(p));
        }
        if (is_keyword(cur, "WITHIN")) {
            bump();
            if (cur.kind != Tok::LParen) fail("'('");
            bump();
            Predicate p;
            p.kind = Predicate::Kind::WithinFence;
            p.pos = pos;
            p.fence_id = expect_ident("fence id");
            if (cur.kind != Tok::RParen) fail("')'");
            bump();
            if (!(cur.kind == Tok::CmpOp && cur.text == "=")) fail("'='");
            bump();
            p.within_expected = expect_bool_literal("0 or 1");
            return GateExpr::leaf(std::move(p));
        }
        if (is_keyword(cur, "RAINING")) {
            bump();
            if (!(cur.kind == Tok::CmpOp && cur.text == "=")) fail("'='");
            bump();
            Predicate p;
            p.kind = Predicate::Kind::RainFlag;
            p.pos = pos;
            p.rain_expected = expect_bool_literal("0 or 1") == 1;
            return GateExpr::leaf(std::move(p));
        }
        Predicate p;
        p.kind = Predicate::Kind::NumericCompare;
        p.pos = pos;
        p.field = expect_ident("field name");
        p.cmp = expect_cmp();
        p.constant = expect_number("numeric constant");
        return GateExpr::leaf(std::move(p));
    }

    GateExpr parse_term() {
        if (is_keyword(cur, "NOT")) {
            bump();
            return GateExpr::make_not(parse_atom());
        }
        return parse_atom();
    }

    GateExpr parse_expr() {
        GateExpr lhs = parse_term();
        while (is_keyword(cur, "AND") || is_keyword(cur, "OR")) {
            const bool is_and = is_keyword(cur, "AND");
            bump();
            GateExpr rhs = parse_term();
            lhs = is_and ? GateExpr::make_and(std::move(lhs), std::move(rhs))
                         : GateExpr::make_or(std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    QueryAst parse() {
        QueryAst ast;
        expect_keyword("SELECT");
        SourcePos fpos = cur.pos;
        ast.selected_fields.push_back({expect_ident("field name"), fpos});
        while (cur.kind == Tok::Comma) {
            bump();
            fpos = cur.pos;
            ast.selected_fields.push_back({expect_ident("field name"), fpos});
        }
        for (size_t a = 0; a < ast.selected_fields.size(); ++a) {
            for (size_t b = a + 1; b < ast.selected_fields.size(); ++b) {
                if (ast.selected_fields[a].name == ast.selected_fields[b].name) {
                    throw ParseError("duplicate field '" + ast.selected_fields[b].name + "'",
                                     ast.selected_fields[b].pos.line,
                                     ast.selected_fields[b].pos.column);
                }
            }
        }
        expect_keyword("FROM");
        ast.source = expect_ident("source name");
        expect_keyword("WHERE");
        ast.gate = parse_expr();
        expect_keyword("EVERY");
        const SourcePos dur_pos = cur.pos;
        const long amount = expect_int("duration");
        if (cur.kind != Tok::Ident) fail("duration unit 's' or 'ms'");
        const std::string unit = upper(cur.text);
        if (unit == "S") {
            ast.sample_period_sec = static_cast<double>(amount);
        } else if (unit == "MS") {
            ast.sample_period_sec = static_cast<double>(amount) / 1000.0;
        } else {
            fail("duration unit 's' or 'ms'");
        }
        bump();
        if (ast.sample_period_sec <= 0.0) {
            throw ParseError("sample period must be positive", dur_pos.line, dur_pos.column);
        }
        if (cur.kind != Tok::End) fail("end of query");
        return ast;
    }
};

std::string fmt_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string unparse_atom(const GateExpr& g) {
    if (g.kind != GateExpr::Kind::Leaf) {
        throw Error("UNPARSEABLE", "grammar allows NOT only directly on a predicate");
    }
    const Predicate& p = g.pred;
    switch (p.kind) {
        case Predicate::Kind::ActivityEquals:
            return "activity = " + std::to_string(p.activity_code);
        case Predicate::Kind::ActivityInSet: {
            std::string out = "activity IN (";
            for (size_t i = 0; i < p.activity_set.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(p.activity_set[i]);
            }
            return out + ")";
        }
        case Predicate::Kind::WithinFence:
            return "within(" + p.fence_id + ") = " + std::to_string(p.within_expected);
        case Predicate::Kind::NumericCompare:
            return p.field + " " + cmp_symbol(p.cmp) + " " + fmt_number(p.constant);
        case Predicate::Kind::RainFlag:
            return std::string("raining = ") + (p.rain_expected ? "1" : "0");
    }
    throw Error("UNPARSEABLE", "unhandled predicate kind");
}

std::string unparse_term(const GateExpr& g) {
    if (g.kind == GateExpr::Kind::Not) {
        return "NOT " + unparse_atom(g.children.at(0));
    }
    return unparse_atom(g);
}

std::string unparse_expr(const GateExpr& g) {
    if (g.kind == GateExpr::Kind::And || g.kind == GateExpr::Kind::Or) {
        // Left-associative chain: the right child must be a term.
        return unparse_expr(g.children.at(0)) +
               (g.kind == GateExpr::Kind::And ? " AND " : " OR ") + unparse_term(g.children.at(1));
    }
    return unparse_term(g);
}

std::string unparse_duration(double period_sec) {
    const double ms = period_sec * 1000.0;
    const double rounded_ms = std::round(ms);
    if (std::abs(ms - rounded_ms) > 1e-9 || rounded_ms < 1.0) {
        throw Error("UNPARSEABLE", "sample period not expressible as whole milliseconds");
    }
    const long ms_int = static_cast<long>(rounded_ms);
    if (ms_int % 1000 == 0) return std::to_string(ms_int / 1000) + "s";
    return std::to_string(ms_int) + "ms";
}

} // namespace

QueryAst parse_query(const std::string& text) {
    Parser parser(text);
    return parser.parse();
}

std::string unparse_query(const QueryAst& ast) {
    if (ast.selected_fields.empty()) throw Error("UNPARSEABLE", "no selected fields");
    std::string out = "SELECT ";
    for (size_t i = 0; i < ast.selected_fields.size(); ++i) {
        if (i) out += ", ";
        out += ast.selected_fields[i].name;
    }
    out += " FROM " + ast.source + " WHERE " + unparse_expr(ast.gate) + " EVERY " +
           unparse_duration(ast.sample_period_sec);
    return out;
}

namespace {

void validate_gate_node(const GateExpr& g, const std::set<std::string>& field_catalog,
                        const std::vector<GeoFence>& fences, ValidationReport& report) {
    if (g.kind != GateExpr::Kind::Leaf) {
        for (const auto& child : g.children) {
            validate_gate_node(child, field_catalog, fences, report);
        }
        return;
    }
    const Predicate& p = g.pred;
    switch (p.kind) {
        case Predicate::Kind::ActivityEquals:
            if (!activity_code_valid(p.activity_code)) {
                report.add("BAD_ACTIVITY_CODE",
                           "activity code " + std::to_string(p.activity_code) + " outside 1..6",
                           p.pos);
            }
            break;
        case Predicate::Kind::ActivityInSet:
            for (int code : p.activity_set) {
                if (!activity_code_valid(code)) {
                    report.add("BAD_ACTIVITY_CODE",
                               "activity code " + std::to_string(code) + " outside 1..6", p.pos);
                }
            }
            break;
        case Predicate::Kind::WithinFence: {
            const bool known = std::any_of(fences.begin(), fences.end(),
                                           [&](const GeoFence& f) { return f.id == p.fence_id; });
            if (!known) {
                report.add("UNKNOWN_FENCE", "fence '" + p.fence_id + "' not in catalog", p.pos);
            }
            if (p.within_expected != 0 && p.within_expected != 1) {
                report.add("BAD_WITHIN_VALUE",
                           "within() compares to 0 or 1, got " + std::to_string(p.within_expected),
                           p.pos);
            }
            break;
        }
        case Predicate::Kind::NumericCompare:
            if (!field_catalog.contains(p.field)) {
                report.add("UNKNOWN_FIELD", "field '" + p.field + "' not in catalog", p.pos);
            }
            break;
        case Predicate::Kind::RainFlag: break;
    }
}

} // namespace

ValidationReport validate_query(const QueryAst& ast, const std::set<std::string>& field_catalog,
                                const std::vector<GeoFence>& fences) {
    ValidationReport report;
    if (ast.selected_fields.empty()) {
        report.add("EMPTY_FIELDS", "query selects no fields");
    }
    for (size_t a = 0; a < ast.selected_fields.size(); ++a) {
        const auto& f = ast.selected_fields[a];
        if (!field_catalog.contains(f.name)) {
            report.add("UNKNOWN_FIELD", "field '" + f.name + "' not in catalog", f.pos);
        }
        for (size_t b = a + 1; b < ast.selected_fields.size(); ++b) {
            if (ast.selected_fields[b].name == f.name) {
                report.add("DUPLICATE_FIELD", "field '" + f.name + "' selected twice",
                           ast.selected_fields[b].pos);
            }
        }
    }
    if (!(ast.sample_period_sec > 0.0)) {
        report.add("BAD_PERIOD", "sample period must be positive");
    }
    validate_gate_node(ast.gate, field_catalog, fences, report);
    return report;
}

namespace {

bool compare(double lhs, Cmp cmp, double rhs) {
    switch (cmp) {
        case Cmp::Lt: return lhs < rhs;
        case Cmp::Le: return lhs <= rhs;
        case Cmp::Eq: return lhs == rhs;
        case Cmp::Ge: return lhs >= rhs;
        case Cmp::Gt: return lhs > rhs;
        case Cmp::Ne: return lhs != rhs;
    }
    throw Error("BAD_CMP", "unhandled comparator");
}

bool evaluate_leaf(const Predicate& p, const ContextState& state) {
    switch (p.kind) {
        case Predicate::Kind::ActivityEquals:
            return activity_code(state.activity) == p.activity_code;
        case Predicate::Kind::ActivityInSet:
            return std::find(p.activity_set.begin(), p.activity_set.end(),
                             activity_code(state.activity)) != p.activity_set.end();
        case Predicate::Kind::WithinFence: {
            const auto it = state.fence_membership.find(p.fence_id);
            if (it == state.fence_membership.end()) {
                throw Error("UNRESOLVED_FENCE", "fence '" + p.fence_id + "' not in context state");
            }
            return it->second == (p.within_expected == 1);
        }
        case Predicate::Kind::NumericCompare: {
            const auto it = state.latest_samples.find(p.field);
            if (it == state.latest_samples.end()) {
                throw Error("MISSING_FIELD", "field '" + p.field + "' not in sample set");
            }
            return compare(it->second, p.cmp, p.constant);
        }
        case Predicate::Kind::RainFlag: return state.raining == p.rain_expected;
    }
    throw Error("BAD_PREDICATE", "unhandled predicate kind");
}

} // namespace

bool evaluate_gate(const GateExpr& gate, const ContextState& state) {
    switch (gate.kind) {
        case GateExpr::Kind::Leaf: return evaluate_leaf(gate.pred, state);
        case GateExpr::Kind::And:
            return evaluate_gate(gate.children.at(0), state) &&
                   evaluate_gate(gate.children.at(1), state);
        case GateExpr::Kind::Or:
            return evaluate_gate(gate.children.at(0), state) ||
                   evaluate_gate(gate.children.at(1), state);
        case GateExpr::Kind::Not: return !evaluate_gate(gate.children.at(0), state);
    }
    throw Error("BAD_PREDICATE", "unhandled gate node kind");
}

std::set<std::string> gate_numeric_fields(const GateExpr& gate) {
    std::set<std::string> fields;
    if (gate.kind == GateExpr::Kind::Leaf) {
        if (gate.pred.kind == Predicate::Kind::NumericCompare) fields.insert(gate.pred.field);
        return fields;
    }
    for (const auto& child : gate.children) {
        auto sub = gate_numeric_fields(child);
        fields.insert(sub.begin(), sub.end());
    }
    return fields;
}

Record select_fields(const QueryAst& ast, const SampleSet& samples, double t_sec,
                     const std::string& worker_id) {
    Record rec;
    rec.t_sec = t_sec;
    rec.worker_id = worker_id;
    rec.fields.reserve(ast.selected_fields.size());
    for (const auto& f : ast.selected_fields) {
        const auto it = samples.find(f.name);
        if (it == samples.end()) {
            throw Error("MISSING_FIELD", "field '" + f.name + "' absent from sample set");
        }
        rec.fields.emplace_back(f.name, it->second);
    }
    return rec;
}

} // namespace selsense
