#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace ahd::script {

// ----------------------------------------------------------------------------
// Syntax tree. One node struct for every construct; `kind` drives both the
// interpreter and the tree-similarity diagnostics, which serialize nodes to
// preorder token streams (raw or normalized) and count category occurrences.
// ----------------------------------------------------------------------------

enum class NodeKind {
    module,
    func_def,
    param,
    if_stmt,       // children: cond, then-block, [else-block]
    while_stmt,    // children: cond, body-block
    for_stmt,      // text: loop variable; children: iterable, body-block
    return_stmt,   // children: [value]
    break_stmt,
    continue_stmt,
    pass_stmt,
    assign,        // children: target, value
    aug_assign,    // text: op; children: target, value
    expr_stmt,     // children: value
    block,         // children: statements
    bool_op,       // text: "and"|"or"
    bin_op,        // text: operator
    unary_op,      // text: "-"|"not"
    compare,       // text: operator (chained comparisons desugar to bool_op of compares)
    ternary,       // children: cond, then, else
    call,          // text: direct callee name when the callee is a plain name
    subscript,     // children: object, index
    name,          // text: identifier
    num_literal,   // text: source spelling
    str_literal,
    bool_literal,  // text: "True"|"False"
    none_literal,
    list_expr,
    comprehension,  // text: loop variable; children: element, iterable, [condition]
};

/// Buckets used for similarity statistics. Nodes outside the named categories
/// count as `other`.
enum class NodeCategory { branch, loop, call, binary_op, literal, name, argument, other };

inline NodeCategory node_category(NodeKind k) {
    switch (k) {
        case NodeKind::if_stmt:
        case NodeKind::ternary:
            return NodeCategory::branch;
        case NodeKind::while_stmt:
        case NodeKind::for_stmt:
        case NodeKind::comprehension:
            return NodeCategory::loop;
        case NodeKind::call:
            return NodeCategory::call;
        case NodeKind::bool_op:
        case NodeKind::bin_op:
        case NodeKind::unary_op:
        case NodeKind::compare:
        case NodeKind::aug_assign:
            return NodeCategory::binary_op;
        case NodeKind::num_literal:
        case NodeKind::str_literal:
        case NodeKind::bool_literal:
        case NodeKind::none_literal:
            return NodeCategory::literal;
        case NodeKind::name:
            return NodeCategory::name;
        case NodeKind::param:
            return NodeCategory::argument;
        default:
            return NodeCategory::other;
    }
}

inline constexpr int kNodeCategoryCount = 8;

struct Node {
    NodeKind kind;
    std::string text;        // identifier, operator, or literal spelling
    double number = 0.0;     // value for num_literal
    int line = 0;
    std::vector<std::unique_ptr<Node>> children;

    Node(NodeKind k, std::string t = "", int line_ = 0)
        : kind(k), text(std::move(t)), line(line_) {}

    Node* add(std::unique_ptr<Node> child) {
        children.push_back(std::move(child));
        return children.back().get();
    }
};

using NodePtr = std::unique_ptr<Node>;

inline NodePtr make_node(NodeKind k, std::string text = "", int line = 0) {
    return std::make_unique<Node>(k, std::move(text), line);
}

namespace detail {

inline const char* kind_label(NodeKind k) {
    switch (k) {
        case NodeKind::module: return "module";
        case NodeKind::func_def: return "def";
        case NodeKind::param: return "param";
        case NodeKind::if_stmt: return "if";
        case NodeKind::while_stmt: return "while";
        case NodeKind::for_stmt: return "for";
        case NodeKind::return_stmt: return "return";
        case NodeKind::break_stmt: return "break";
        case NodeKind::continue_stmt: return "continue";
        case NodeKind::pass_stmt: return "pass";
        case NodeKind::assign: return "assign";
        case NodeKind::aug_assign: return "augassign";
        case NodeKind::expr_stmt: return "expr";
        case NodeKind::block: return "block";
        case NodeKind::bool_op: return "boolop";
        case NodeKind::bin_op: return "binop";
        case NodeKind::unary_op: return "unaryop";
        case NodeKind::compare: return "cmp";
        case NodeKind::ternary: return "ternary";
        case NodeKind::call: return "call";
        case NodeKind::subscript: return "subscript";
        case NodeKind::name: return "name";
        case NodeKind::num_literal: return "num";
        case NodeKind::str_literal: return "str";
        case NodeKind::bool_literal: return "bool";
        case NodeKind::none_literal: return "none";
        case NodeKind::list_expr: return "list";
        case NodeKind::comprehension: return "listcomp";
    }
    return "?";
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Preorder token streams. The raw stream keeps identifier spellings and
// literal values; the normalized stream is the structure-preserving pass used
// by the novelty tool: every name becomes VAR, parameter declarations become
// ARG, and literals collapse to NUM / STR / BOOL. Loop variables and direct
// callee names are name-like payloads and normalize to VAR as well.
// ----------------------------------------------------------------------------
inline void preorder_tokens(const Node& node, bool normalized, std::vector<std::string>& out) {
    std::string tok = detail::kind_label(node.kind);
    switch (node.kind) {
        case NodeKind::name:
        case NodeKind::call:
        case NodeKind::for_stmt:
        case NodeKind::comprehension:
            if (!node.text.empty()) tok += normalized ? ":VAR" : ":" + node.text;
            break;
        case NodeKind::param:
            tok += normalized ? ":ARG" : ":" + node.text;
            break;
        case NodeKind::func_def:
            // Entry names are fixed per domain; keep them in both streams.
            tok += ":" + node.text;
            break;
        case NodeKind::num_literal:
            tok += normalized ? ":NUM" : ":" + node.text;
            break;
        case NodeKind::str_literal:
            tok += normalized ? ":STR" : ":" + node.text;
            break;
        case NodeKind::bool_literal:
            tok += normalized ? ":BOOL" : ":" + node.text;
            break;
        case NodeKind::bool_op:
        case NodeKind::bin_op:
        case NodeKind::unary_op:
        case NodeKind::compare:
        case NodeKind::aug_assign:
            tok += ":" + node.text;
            break;
        default:
            break;
    }
    out.push_back(std::move(tok));
    for (const auto& child : node.children) preorder_tokens(*child, normalized, out);
}

inline std::vector<std::string> preorder_tokens(const Node& node, bool normalized) {
    std::vector<std::string> out;
    preorder_tokens(node, normalized, out);
    return out;
}

inline void category_counts(const Node& node, std::array<double, kNodeCategoryCount>& counts) {
    counts[static_cast<std::size_t>(node_category(node.kind))] += 1.0;
    for (const auto& child : node.children) category_counts(*child, counts);
}

inline std::array<double, kNodeCategoryCount> category_counts(const Node& node) {
    std::array<double, kNodeCategoryCount> counts{};
    category_counts(node, counts);
    return counts;
}

inline std::size_t node_count(const Node& node) {
    std::size_t n = 1;
    for (const auto& child : node.children) n += node_count(*child);
    return n;
}

}  // namespace ahd::script
