#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "selsense/context.hpp"
#include "selsense/error.hpp"

namespace selsense {

// How a worker decides when and over which transport to push its buffer.
enum class PushPolicy {
    DeferredWifi,   // hold the buffer, flush only while WiFi is available
    RainRealtime3G, // raining: flush every interval over 3G; otherwise deferred WiFi
    Immediate,      // flush every interval, WiFi when available else 3G
};

std::string push_policy_name(PushPolicy p);
PushPolicy push_policy_from_name(const std::string& name);

enum class Cmp { Lt, Le, Eq, Ge, Gt, Ne };

std::string cmp_symbol(Cmp c);

struct SourcePos {
    int line = 0;
    int column = 0;
};

struct Predicate {
    enum class Kind { ActivityEquals, ActivityInSet, WithinFence, NumericCompare, RainFlag };

    Kind kind = Kind::ActivityEquals;
    int activity_code = 0;               // ActivityEquals
    std::vector<int> activity_set;       // ActivityInSet, source order
    std::string fence_id;                // WithinFence
    int within_expected = 1;             // WithinFence, 0 or 1
    std::string field;                   // NumericCompare
    Cmp cmp = Cmp::Eq;                   // NumericCompare
    double constant = 0.0;               // NumericCompare
    bool rain_expected = false;          // RainFlag
    SourcePos pos;                       // ignored by equality

    bool operator==(const Predicate& other) const;
};

// Boolean expression tree: predicate leaves under AND/OR/NOT nodes.
struct GateExpr {
    enum class Kind { Leaf, And, Or, Not };

    Kind kind = Kind::Leaf;
    Predicate pred;                 // Leaf only
    std::vector<GateExpr> children; // And/Or: 2, Not: 1

    bool operator==(const GateExpr& other) const;

    static GateExpr leaf(Predicate p);
    static GateExpr make_and(GateExpr a, GateExpr b);
    static GateExpr make_or(GateExpr a, GateExpr b);
    static GateExpr make_not(GateExpr a);
};

struct SelectedField {
    std::string name;
    SourcePos pos; // ignored by equality

    bool operator==(const SelectedField& other) const { return name == other.name; }
};

struct QueryAst {
    std::vector<SelectedField> selected_fields; // non-empty, no duplicates
    std::string source;
    GateExpr gate;
    double sample_period_sec = 1.0; // > 0
    PushPolicy push_policy = PushPolicy::Immediate; // assigned at task level, not in the text form

    bool operator==(const QueryAst& other) const;
    std::vector<std::string> field_names() const;
};

struct ValidationIssue {
    std::string code;
    std::string message;
    SourcePos location;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;

    void add(std::string code, std::string message, SourcePos pos = {});
};

// Grammar (keywords case-insensitive, identifiers case-sensitive):
//   query   := "SELECT" fields "FROM" ident "WHERE" expr "EVERY" duration
//   fields  := ident ("," ident)*
//   expr    := term (("AND"|"OR") term)*           -- left associative
//   term    := ["NOT"] atom
//   atom    := "activity" "=" int
//            | "activity" "IN" "(" int ("," int)* ")"
//            | "within" "(" ident ")" "=" ("0"|"1")
//            | "raining" "=" ("0"|"1")
//            | ident cmp number
//   cmp     := "<"|"<="|"="|">="|">"|"!="
//   duration:= int ("s"|"ms")
QueryAst parse_query(const std::string& text);

// Canonical text form; parse(unparse(ast)) == ast for any grammar-shaped AST.
std::string unparse_query(const QueryAst& ast);

ValidationReport validate_query(const QueryAst& ast, const std::set<std::string>& field_catalog,
                                const std::vector<GeoFence>& fences);

// Pure boolean evaluation of the gate against one context snapshot.
bool evaluate_gate(const GateExpr& gate, const ContextState& state);

// All sensor field names referenced by numeric-compare predicates.
std::set<std::string> gate_numeric_fields(const GateExpr& gate);

// One projected result row: the selected fields in declaration order plus
// capture time and worker id.
struct Record {
    double t_sec = 0.0;
    std::string worker_id;
    std::vector<std::pair<std::string, std::vector<double>>> fields;

    bool operator==(const Record&) const = default;
};

// Sample set at one instant: field name -> values (length = sensor arity).
using SampleSet = std::map<std::string, std::vector<double>>;

Record select_fields(const QueryAst& ast, const SampleSet& samples, double t_sec,
                     const std::string& worker_id);

} // namespace selsense
