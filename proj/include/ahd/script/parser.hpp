#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ahd/script/ast.hpp"
#include "ahd/script/lexer.hpp"

namespace ahd::script {

// ----------------------------------------------------------------------------
// Recursive-descent parser. Grammar (simplified Python):
//
//   module  : stmt* EOF
//   stmt    : simple NEWLINE | def | if | while | for
//   simple  : return [expr] | break | continue | pass
//           | target (= | += | -= | *= | /=) expr | expr
//   suite   : simple NEWLINE | NEWLINE INDENT stmt+ DEDENT
//   expr    : or_expr [if or_expr else expr]
//   or_expr : and_expr (or and_expr)*
//   and_expr: not_expr (and not_expr)*
//   not_expr: not not_expr | comparison
//   comparison: arith ((== != < <= > >= in | not in) arith)*
//   arith   : term ((+|-) term)*
//   term    : factor ((*|/|//|%) factor)*
//   factor  : (-|+) factor | power
//   power   : postfix [** factor]
//   postfix : atom (call | [expr])*
//   atom    : NUMBER | STRING | True | False | None | NAME | (expr) | list
//   list    : [ items ] | [ expr for NAME in expr [if expr] ]
//
// Chained comparisons a<b<c desugar to (a<b) and (b<c).
// ----------------------------------------------------------------------------
class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    NodePtr parse_module() {
        auto mod = make_node(NodeKind::module);
        skip_newlines();
        while (!at(Tok::eof)) {
            mod->add(statement());
            skip_newlines();
        }
        return mod;
    }

private:
    // ---- token plumbing ----
    const Token& peek(int ahead = 0) const {
        const std::size_t i = pos_ + static_cast<std::size_t>(ahead);
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_op(const char* text) const { return at(Tok::op) && peek().text == text; }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        advance();
        return true;
    }
    bool accept_op(const char* text) {
        if (!at_op(text)) return false;
        advance();
        return true;
    }
    const Token& expect(Tok k, const char* what) {
        if (!at(k)) throw ParseError(std::string("expected ") + what, peek().line);
        return advance();
    }
    void expect_op(const char* text) {
        if (!accept_op(text))
            throw ParseError(std::string("expected '") + text + "'", peek().line);
    }
    void skip_newlines() {
        while (accept(Tok::newline)) {
        }
    }

    // ---- statements ----
    NodePtr statement() {
        switch (peek().kind) {
            case Tok::kw_def: return func_def();
            case Tok::kw_if: return if_stmt();
            case Tok::kw_while: return while_stmt();
            case Tok::kw_for: return for_stmt();
            default: {
                auto s = simple_stmt();
                expect(Tok::newline, "end of statement");
                return s;
            }
        }
    }

    NodePtr func_def() {
        const int line = peek().line;
        advance();  // def
        const Token& name = expect(Tok::name, "function name");
        auto fn = make_node(NodeKind::func_def, name.text, line);
        expect_op("(");
        if (!at_op(")")) {
            do {
                const Token& p = expect(Tok::name, "parameter name");
                fn->add(make_node(NodeKind::param, p.text, p.line));
            } while (accept_op(","));
        }
        expect_op(")");
        expect_op(":");
        fn->add(suite());
        return fn;
    }

    NodePtr if_stmt() {
        const int line = peek().line;
        advance();  // if / elif
        auto node = make_node(NodeKind::if_stmt, "", line);
        node->add(expression());
        expect_op(":");
        node->add(suite());
        skip_blank_before_branch_keyword();
        if (at(Tok::kw_elif)) {
            auto block = make_node(NodeKind::block, "", peek().line);
            block->add(if_stmt());
            node->add(std::move(block));
        } else if (accept(Tok::kw_else)) {
            expect_op(":");
            node->add(suite());
        }
        return node;
    }

    // elif/else arrive after the suite's DEDENT; nothing to skip, but keep the
    // hook explicit in case of stray NEWLINE tokens between branches.
    void skip_blank_before_branch_keyword() {}

    NodePtr while_stmt() {
        const int line = peek().line;
        advance();
        auto node = make_node(NodeKind::while_stmt, "", line);
        node->add(expression());
        expect_op(":");
        node->add(suite());
        return node;
    }

    NodePtr for_stmt() {
        const int line = peek().line;
        advance();
        const Token& var = expect(Tok::name, "loop variable");
        auto node = make_node(NodeKind::for_stmt, var.text, line);
        expect(Tok::kw_in, "'in'");
        node->add(expression());
        expect_op(":");
        node->add(suite());
        return node;
    }

    NodePtr suite() {
        if (!at(Tok::newline)) {
            // Inline suite: `if x: return y`
            auto block = make_node(NodeKind::block, "", peek().line);
            block->add(simple_stmt());
            expect(Tok::newline, "end of statement");
            return block;
        }
        advance();  // newline
        expect(Tok::indent, "indented block");
        auto block = make_node(NodeKind::block, "", peek().line);
        skip_newlines();
        while (!at(Tok::dedent) && !at(Tok::eof)) {
            block->add(statement());
            skip_newlines();
        }
        expect(Tok::dedent, "dedent");
        if (block->children.empty()) throw ParseError("empty block", peek().line);
        return block;
    }

    NodePtr simple_stmt() {
        const int line = peek().line;
        if (accept(Tok::kw_return)) {
            auto node = make_node(NodeKind::return_stmt, "", line);
            if (!at(Tok::newline)) node->add(expression());
            return node;
        }
        if (accept(Tok::kw_break)) return make_node(NodeKind::break_stmt, "", line);
        if (accept(Tok::kw_continue)) return make_node(NodeKind::continue_stmt, "", line);
        if (accept(Tok::kw_pass)) return make_node(NodeKind::pass_stmt, "", line);

        auto lhs = expression();
        if (at_op("=")) {
            advance();
            require_assignable(*lhs);
            auto node = make_node(NodeKind::assign, "", line);
            node->add(std::move(lhs));
            node->add(expression());
            return node;
        }
        for (const char* aug : {"+=", "-=", "*=", "/="}) {
            if (at_op(aug)) {
                advance();
                require_assignable(*lhs);
                auto node = make_node(NodeKind::aug_assign, std::string(aug, 1), line);
                node->add(std::move(lhs));
                node->add(expression());
                return node;
            }
        }
        auto node = make_node(NodeKind::expr_stmt, "", line);
        node->add(std::move(lhs));
        return node;
    }

    void require_assignable(const Node& n) const {
        if (n.kind != NodeKind::name && n.kind != NodeKind::subscript)
            throw ParseError("cannot assign to this expression", n.line);
    }

    // ---- expressions ----
    NodePtr expression() {
        auto value = or_expr();
        if (at(Tok::kw_if)) {
            const int line = peek().line;
            advance();
            auto cond = or_expr();
            expect(Tok::kw_else, "'else' of conditional expression");
            auto other = expression();
            auto node = make_node(NodeKind::ternary, "", line);
            node->add(std::move(cond));
            node->add(std::move(value));
            node->add(std::move(other));
            return node;
        }
        return value;
    }

    NodePtr or_expr() {
        auto lhs = and_expr();
        while (at(Tok::kw_or)) {
            const int line = advance().line;
            auto node = make_node(NodeKind::bool_op, "or", line);
            node->add(std::move(lhs));
            node->add(and_expr());
            lhs = std::move(node);
        }
        return lhs;
    }

    NodePtr and_expr() {
        auto lhs = not_expr();
        while (at(Tok::kw_and)) {
            const int line = advance().line;
            auto node = make_node(NodeKind::bool_op, "and", line);
            node->add(std::move(lhs));
            node->add(not_expr());
            lhs = std::move(node);
        }
        return lhs;
    }

    NodePtr not_expr() {
        if (at(Tok::kw_not)) {
            const int line = advance().line;
            auto node = make_node(NodeKind::unary_op, "not", line);
            node->add(not_expr());
            return node;
        }
        return comparison();
    }

    NodePtr comparison() {
        auto first = arith();
        std::vector<std::pair<std::string, NodePtr>> chain;
        while (true) {
            std::string op;
            if (at_op("==") || at_op("!=") || at_op("<") || at_op("<=") || at_op(">") ||
                at_op(">=")) {
                op = advance().text;
            } else if (at(Tok::kw_in)) {
                advance();
                op = "in";
            } else if (at(Tok::kw_not) && peek(1).kind == Tok::kw_in) {
                advance();
                advance();
                op = "not in";
            } else {
                break;
            }
            chain.emplace_back(op, arith());
        }
        if (chain.empty()) return first;

        // Desugar a<b<c to (a<b) and (b<c); the middle term is duplicated.
        NodePtr result;
        NodePtr prev = std::move(first);
        for (std::size_t i = 0; i < chain.size(); ++i) {
            auto cmp = make_node(NodeKind::compare, chain[i].first, prev->line);
            NodePtr rhs_copy;
            if (i + 1 < chain.size()) rhs_copy = clone(*chain[i].second);
            cmp->add(std::move(prev));
            cmp->add(std::move(chain[i].second));
            prev = std::move(rhs_copy);
            if (!result) {
                result = std::move(cmp);
            } else {
                auto conj = make_node(NodeKind::bool_op, "and", result->line);
                conj->add(std::move(result));
                conj->add(std::move(cmp));
                result = std::move(conj);
            }
        }
        return result;
    }

    NodePtr arith() {
        auto lhs = term();
        while (at_op("+") || at_op("-")) {
            const Token& op = advance();
            auto node = make_node(NodeKind::bin_op, op.text, op.line);
            node->add(std::move(lhs));
            node->add(term());
            lhs = std::move(node);
        }
        return lhs;
    }

    NodePtr term() {
        auto lhs = factor();
        while (at_op("*") || at_op("/") || at_op("//") || at_op("%")) {
            const Token& op = advance();
            auto node = make_node(NodeKind::bin_op, op.text, op.line);
            node->add(std::move(lhs));
            node->add(factor());
            lhs = std::move(node);
        }
        return lhs;
    }

    NodePtr factor() {
        if (at_op("-") || at_op("+")) {
            const Token& op = advance();
            if (op.text == "+") return factor();  // unary plus is a no-op
            auto node = make_node(NodeKind::unary_op, "-", op.line);
            node->add(factor());
            return node;
        }
        return power();
    }

    NodePtr power() {
        auto base = postfix();
        if (at_op("**")) {
            const int line = advance().line;
            auto node = make_node(NodeKind::bin_op, "**", line);
            node->add(std::move(base));
            node->add(factor());  // right associative, allows -x exponents
            return node;
        }
        return base;
    }

    NodePtr postfix() {
        auto node = atom();
        while (true) {
            if (at_op("(")) {
                const int line = advance().line;
                // Direct calls carry the callee name in `text`; anything else
                // (e.g. a subscripted callee) is not callable in this language.
                if (node->kind != NodeKind::name)
                    throw ParseError("only named functions can be called", line);
                auto call = make_node(NodeKind::call, node->text, line);
                if (!at_op(")")) {
                    do {
                        call->add(expression());
                    } while (accept_op(","));
                }
                expect_op(")");
                node = std::move(call);
            } else if (at_op("[")) {
                const int line = advance().line;
                auto sub = make_node(NodeKind::subscript, "", line);
                sub->add(std::move(node));
                sub->add(expression());
                expect_op("]");
                node = std::move(sub);
            } else {
                break;
            }
        }
        return node;
    }

    NodePtr atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::number: {
                advance();
                auto node = make_node(NodeKind::num_literal, t.text, t.line);
                node->number = t.number;
                return node;
            }
            case Tok::string:
                advance();
                return make_node(NodeKind::str_literal, t.text, t.line);
            case Tok::kw_true:
                advance();
                return make_node(NodeKind::bool_literal, "True", t.line);
            case Tok::kw_false:
                advance();
                return make_node(NodeKind::bool_literal, "False", t.line);
            case Tok::kw_none:
                advance();
                return make_node(NodeKind::none_literal, "", t.line);
            case Tok::name:
                advance();
                return make_node(NodeKind::name, t.text, t.line);
            case Tok::op:
                if (t.text == "(") {
                    advance();
                    auto inner = expression();
                    expect_op(")");
                    return inner;
                }
                if (t.text == "[") return list_expr();
                break;
            default:
                break;
        }
        throw ParseError("unexpected token '" + t.text + "'", t.line);
    }

    NodePtr list_expr() {
        const int line = peek().line;
        expect_op("[");
        if (accept_op("]")) return make_node(NodeKind::list_expr, "", line);
        auto first = expression();
        if (at(Tok::kw_for)) {
            advance();
            const Token& var = expect(Tok::name, "comprehension variable");
            auto comp = make_node(NodeKind::comprehension, var.text, line);
            comp->add(std::move(first));
            expect(Tok::kw_in, "'in'");
            // No bare ternary here: a trailing `if` belongs to the filter.
            comp->add(or_expr());
            if (accept(Tok::kw_if)) comp->add(or_expr());
            expect_op("]");
            return comp;
        }
        auto node = make_node(NodeKind::list_expr, "", line);
        node->add(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) break;  // trailing comma
            node->add(expression());
        }
        expect_op("]");
        return node;
    }

    static NodePtr clone(const Node& n) {
        auto copy = make_node(n.kind, n.text, n.line);
        copy->number = n.number;
        for (const auto& child : n.children) copy->add(clone(*child));
        return copy;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

inline NodePtr parse_source(std::string source) {
    return Parser(tokenize(std::move(source))).parse_module();
}

}  // namespace ahd::script
