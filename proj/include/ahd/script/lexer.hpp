#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>
#include <string>
#include <vector>

namespace ahd::script {

// ----------------------------------------------------------------------------
// Lexer for the heuristic scripting language: a small Python-like notation
// with significant indentation. Logical lines end with NEWLINE; indentation
// changes emit INDENT/DEDENT. Newlines inside brackets are joined.
// ----------------------------------------------------------------------------

enum class Tok {
    name,
    number,
    string,
    kw_def,
    kw_if,
    kw_elif,
    kw_else,
    kw_for,
    kw_while,
    kw_return,
    kw_break,
    kw_continue,
    kw_pass,
    kw_and,
    kw_or,
    kw_not,
    kw_in,
    kw_true,
    kw_false,
    kw_none,
    op,        // punctuation and operators, text carried in the token
    newline,
    indent,
    dedent,
    eof,
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    int line = 0;
    int col = 0;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(const std::string& msg, int line_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

namespace detail {

inline Tok keyword_kind(const std::string& word) {
    if (word == "def") return Tok::kw_def;
    if (word == "if") return Tok::kw_if;
    if (word == "elif") return Tok::kw_elif;
    if (word == "else") return Tok::kw_else;
    if (word == "for") return Tok::kw_for;
    if (word == "while") return Tok::kw_while;
    if (word == "return") return Tok::kw_return;
    if (word == "break") return Tok::kw_break;
    if (word == "continue") return Tok::kw_continue;
    if (word == "pass") return Tok::kw_pass;
    if (word == "and") return Tok::kw_and;
    if (word == "or") return Tok::kw_or;
    if (word == "not") return Tok::kw_not;
    if (word == "in") return Tok::kw_in;
    if (word == "True") return Tok::kw_true;
    if (word == "False") return Tok::kw_false;
    if (word == "None") return Tok::kw_none;
    return Tok::name;
}

}  // namespace detail

class Lexer {
public:
    explicit Lexer(std::string source) : src_(std::move(source)) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        at_line_start_ = true;
        while (pos_ < src_.size()) lex_line_piece();
        // Close any open logical line, then unwind indentation.
        if (!tokens_.empty() && tokens_.back().kind != Tok::newline)
            push(Tok::newline, "");
        while (indents_.back() > 0) {
            indents_.pop_back();
            push(Tok::dedent, "");
        }
        push(Tok::eof, "");
        return std::move(tokens_);
    }

private:
    void lex_line_piece() {
        if (at_line_start_ && bracket_depth_ == 0) {
            handle_indentation();
            if (pos_ >= src_.size()) return;
        }
        const char c = src_[pos_];
        if (c == '\n') {
            ++pos_;
            ++line_;
            line_start_ = pos_;
            if (bracket_depth_ > 0) return;  // implicit joining
            if (!tokens_.empty() && tokens_.back().kind != Tok::newline &&
                tokens_.back().kind != Tok::indent && tokens_.back().kind != Tok::dedent)
                push(Tok::newline, "");
            at_line_start_ = true;
            return;
        }
        if (c == '#') {
            while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            return;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++pos_;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            lex_word();
            return;
        }
        if (c == '"' || c == '\'') {
            lex_string();
            return;
        }
        lex_operator();
    }

    void handle_indentation() {
        // Measure leading spaces of the next non-blank, non-comment line.
        while (true) {
            std::size_t p = pos_;
            int width = 0;
            while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) {
                if (src_[p] == '\t')
                    throw ParseError("tab character in indentation", line_);
                ++width;
                ++p;
            }
            if (p >= src_.size()) {
                pos_ = p;
                return;
            }
            if (src_[p] == '\n') {
                pos_ = p + 1;
                ++line_;
                line_start_ = pos_;
                continue;
            }
            if (src_[p] == '\r') {
                pos_ = p + 1;
                continue;
            }
            if (src_[p] == '#') {
                pos_ = p;
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            pos_ = p;
            apply_indent(width);
            at_line_start_ = false;
            return;
        }
    }

    void apply_indent(int width) {
        if (width > indents_.back()) {
            indents_.push_back(width);
            push(Tok::indent, "");
            return;
        }
        while (width < indents_.back()) {
            indents_.pop_back();
            push(Tok::dedent, "");
        }
        if (width != indents_.back())
            throw ParseError("unindent does not match any outer level", line_);
    }

    void lex_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // bare 'e' belongs to the next token
            }
        }
        const std::string text = src_.substr(start, pos_ - start);
        double parsed = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), parsed);
        if (res.ec != std::errc{}) throw ParseError("bad numeric literal " + text, line_);
        Token t{Tok::number, text, parsed, line_, col_of(start)};
        tokens_.push_back(std::move(t));
    }

    void lex_word() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_'))
            ++pos_;
        const std::string word = src_.substr(start, pos_ - start);
        Token t{detail::keyword_kind(word), word, 0.0, line_, col_of(start)};
        tokens_.push_back(std::move(t));
    }

    void lex_string() {
        const char quote = src_[pos_];
        const std::size_t start = pos_;
        const bool triple = src_.compare(pos_, 3, std::string(3, quote)) == 0;
        pos_ += triple ? 3 : 1;
        std::string out;
        while (pos_ < src_.size()) {
            if (triple && src_.compare(pos_, 3, std::string(3, quote)) == 0) {
                pos_ += 3;
                push_string(out, start);
                return;
            }
            const char c = src_[pos_];
            if (!triple && c == quote) {
                ++pos_;
                push_string(out, start);
                return;
            }
            if (!triple && c == '\n') throw ParseError("unterminated string literal", line_);
            if (c == '\\' && pos_ + 1 < src_.size()) {
                const char e = src_[pos_ + 1];
                pos_ += 2;
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '\\': out += '\\'; break;
                    case '\'': out += '\''; break;
                    case '"': out += '"'; break;
                    case '\n': ++line_; break;  // line continuation inside string
                    default: out += e; break;
                }
                continue;
            }
            if (c == '\n') ++line_;
            out += c;
            ++pos_;
        }
        throw ParseError("unterminated string literal", line_);
    }

    void push_string(std::string text, std::size_t start) {
        Token t{Tok::string, std::move(text), 0.0, line_, col_of(start)};
        tokens_.push_back(std::move(t));
    }

    void lex_operator() {
        static const char* two_char[] = {"**", "//", "==", "!=", "<=", ">=",
                                         "+=", "-=", "*=", "/="};
        for (const char* op : two_char) {
            if (src_.compare(pos_, 2, op) == 0) {
                // "**=" and "//=" are not part of the language; reject rather
                // than mislex.
                if (pos_ + 2 < src_.size() && src_[pos_ + 2] == '=' &&
                    (std::string(op) == "**" || std::string(op) == "//"))
                    throw ParseError("unsupported operator", line_);
                push(Tok::op, op);
                pos_ += 2;
                return;
            }
        }
        const char c = src_[pos_];
        static const std::string singles = "+-*/%<>=()[],:";
        if (singles.find(c) == std::string::npos)
            throw ParseError(std::string("unexpected character '") + c + "'", line_);
        if (c == '(' || c == '[') ++bracket_depth_;
        if (c == ')' || c == ']') bracket_depth_ = std::max(0, bracket_depth_ - 1);
        push(Tok::op, std::string(1, c));
        ++pos_;
    }

    void push(Tok kind, std::string text) {
        tokens_.push_back(Token{kind, std::move(text), 0.0, line_, col_of(pos_)});
    }

    int col_of(std::size_t p) const { return static_cast<int>(p - line_start_) + 1; }

    std::string src_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    int line_ = 1;
    int bracket_depth_ = 0;
    bool at_line_start_ = true;
    std::vector<int> indents_;
    std::vector<Token> tokens_;
};

inline std::vector<Token> tokenize(std::string source) { return Lexer(std::move(source)).run(); }

}  // namespace ahd::script
