#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ahd/script/ast.hpp"
#include "ahd/script/value.hpp"

namespace ahd::script {

// ----------------------------------------------------------------------------
// Tree-walking evaluator. Each execution runs in a fresh Interpreter: no
// state survives between calls, and the language exposes no I/O, clock, or
// randomness, so a program is a pure function of its arguments.
//
// Limits: `max_steps` is the deterministic budget (one step per node
// evaluation) and the primary timeout mechanism; `wall_seconds` is a backstop
// checked every few thousand steps; `max_cells` bounds total array cells and
// string bytes ever allocated.
// ----------------------------------------------------------------------------

struct Limits {
    double wall_seconds = 10.0;
    std::uint64_t max_steps = 200'000'000;
    std::uint64_t max_cells = 32'000'000;  // ~512 MB at 16 bytes per cell
    int max_depth = 200;
};

struct RuntimeError : std::runtime_error {
    int line;
    explicit RuntimeError(const std::string& msg, int line_ = 0)
        : std::runtime_error(line_ ? "line " + std::to_string(line_) + ": " + msg : msg),
          line(line_) {}
};

struct TimeoutError : std::runtime_error {
    explicit TimeoutError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

struct BreakSig {};
struct ContinueSig {};
struct ReturnSig {
    Value value;
};

inline double checked_index(const Value& v, std::size_t size, int line, const char* what) {
    if (!v.is_number() && !v.is_bool()) throw RuntimeError(std::string(what) + " must be a number", line);
    const double raw = v.as_number_unchecked();
    if (raw != std::floor(raw)) throw RuntimeError(std::string(what) + " must be an integer", line);
    double idx = raw;
    if (idx < 0) idx += static_cast<double>(size);
    if (idx < 0 || idx >= static_cast<double>(size))
        throw RuntimeError(std::string(what) + " out of range", line);
    return idx;
}

inline long long checked_integer(const Value& v, int line, const char* what) {
    if (!v.is_number() && !v.is_bool())
        throw RuntimeError(std::string(what) + " must be a number", line);
    const double raw = v.as_number_unchecked();
    if (raw != std::floor(raw) || std::fabs(raw) > 9.0e15)
        throw RuntimeError(std::string(what) + " must be an integer", line);
    return static_cast<long long>(raw);
}

}  // namespace detail

class Interpreter {
public:
    explicit Interpreter(const Node& module, Limits limits = {})
        : limits_(limits), start_(std::chrono::steady_clock::now()) {
        if (module.kind != NodeKind::module)
            throw RuntimeError("interpreter expects a module root");
        // Top-level pass: register functions and execute module statements.
        scopes_.push_back(&globals_);
        for (const auto& stmt : module.children) {
            if (stmt->kind == NodeKind::func_def) {
                functions_[stmt->text] = stmt.get();
            } else {
                exec(*stmt);
            }
        }
    }

    bool has_function(const std::string& name) const { return functions_.count(name) > 0; }

    const Node* function(const std::string& name) const {
        auto it = functions_.find(name);
        return it == functions_.end() ? nullptr : it->second;
    }

    std::vector<std::string> function_params(const std::string& name) const {
        std::vector<std::string> out;
        if (const Node* fn = function(name))
            for (const auto& child : fn->children)
                if (child->kind == NodeKind::param) out.push_back(child->text);
        return out;
    }

    Value call(const std::string& name, std::vector<Value> args) {
        const Node* fn = function(name);
        if (!fn) throw RuntimeError("name '" + name + "' is not defined");
        return call_user(*fn, std::move(args), 0);
    }

    std::uint64_t steps_used() const { return steps_; }
    std::uint64_t cells_used() const { return cells_; }

private:
    using Scope = std::unordered_map<std::string, Value>;

    // ---- bookkeeping ----
    void tick(int line) {
        if (++steps_ > limits_.max_steps)
            throw TimeoutError("step limit exceeded (" + std::to_string(limits_.max_steps) + ")");
        if ((steps_ & 2047) == 0) {
            const auto elapsed = std::chrono::duration<double>(
                                     std::chrono::steady_clock::now() - start_)
                                     .count();
            if (elapsed > limits_.wall_seconds)
                throw TimeoutError("wall-time limit exceeded");
        }
        (void)line;
    }

    void charge(std::uint64_t cells, int line) {
        cells_ += cells;
        if (cells_ > limits_.max_cells)
            throw RuntimeError("allocation limit exceeded", line);
    }

    Scope& locals() { return *scopes_.back(); }

    // ---- statements ----
    void exec(const Node& n) {
        tick(n.line);
        switch (n.kind) {
            case NodeKind::block:
                for (const auto& s : n.children) exec(*s);
                return;
            case NodeKind::pass_stmt:
                return;
            case NodeKind::expr_stmt:
                eval(*n.children[0]);
                return;
            case NodeKind::assign:
                store(*n.children[0], eval(*n.children[1]));
                return;
            case NodeKind::aug_assign: {
                Value current = eval(*n.children[0]);
                Value rhs = eval(*n.children[1]);
                store(*n.children[0], binary(n.text, current, rhs, n.line));
                return;
            }
            case NodeKind::return_stmt: {
                Value v = n.children.empty() ? Value() : eval(*n.children[0]);
                throw detail::ReturnSig{std::move(v)};
            }
            case NodeKind::break_stmt:
                throw detail::BreakSig{};
            case NodeKind::continue_stmt:
                throw detail::ContinueSig{};
            case NodeKind::if_stmt: {
                if (eval(*n.children[0]).truthy())
                    exec(*n.children[1]);
                else if (n.children.size() > 2)
                    exec(*n.children[2]);
                return;
            }
            case NodeKind::while_stmt: {
                while (eval(*n.children[0]).truthy()) {
                    tick(n.line);
                    try {
                        exec(*n.children[1]);
                    } catch (detail::BreakSig&) {
                        break;
                    } catch (detail::ContinueSig&) {
                    }
                }
                return;
            }
            case NodeKind::for_stmt:
                exec_for(n);
                return;
            case NodeKind::func_def:
                // Nested defs register in the module function table.
                functions_[n.text] = &n;
                return;
            default:
                throw RuntimeError("cannot execute this construct", n.line);
        }
    }

    void exec_for(const Node& n) {
        const Value iterable = eval(*n.children[0]);
        auto body = [&](Value item) {
            locals()[n.text] = std::move(item);
            tick(n.line);
            try {
                exec(*n.children[1]);
            } catch (detail::ContinueSig&) {
            }
        };
        try {
            if (iterable.is_range()) {
                const RangeVal r = iterable.range();
                if (r.step > 0)
                    for (long long i = r.start; i < r.stop; i += r.step)
                        body(Value(static_cast<double>(i)));
                else
                    for (long long i = r.start; i > r.stop; i += r.step)
                        body(Value(static_cast<double>(i)));
            } else if (iterable.is_array()) {
                const ArrayPtr arr = iterable.array();
                for (std::size_t i = 0; i < arr->size(); ++i) body((*arr)[i]);
            } else if (iterable.is_string()) {
                for (char c : iterable.string()) body(Value(std::string(1, c)));
            } else {
                throw RuntimeError(std::string("cannot iterate over ") + iterable.type_name(),
                                   n.line);
            }
        } catch (detail::BreakSig&) {
        }
    }

    void store(const Node& target, Value v) {
        if (target.kind == NodeKind::name) {
            locals()[target.text] = std::move(v);
            return;
        }
        // Subscript store: evaluate the container, then the index.
        const Value container = eval(*target.children[0]);
        if (!container.is_array())
            throw RuntimeError(std::string("cannot assign into ") + container.type_name(),
                               target.line);
        const Value idx = eval(*target.children[1]);
        auto& items = *container.array();
        const std::size_t i = static_cast<std::size_t>(
            detail::checked_index(idx, items.size(), target.line, "array index"));
        items[i] = std::move(v);
    }

    // ---- expressions ----
    Value eval(const Node& n) {
        tick(n.line);
        switch (n.kind) {
            case NodeKind::num_literal:
                return Value(n.number);
            case NodeKind::str_literal:
                charge(n.text.size(), n.line);
                return Value(n.text);
            case NodeKind::bool_literal:
                return Value(n.text == "True");
            case NodeKind::none_literal:
                return Value();
            case NodeKind::name: {
                auto& sc = locals();
                if (auto it = sc.find(n.text); it != sc.end()) return it->second;
                if (&sc != &globals_) {
                    if (auto it = globals_.find(n.text); it != globals_.end()) return it->second;
                }
                throw RuntimeError("name '" + n.text + "' is not defined", n.line);
            }
            case NodeKind::list_expr: {
                charge(n.children.size(), n.line);
                auto arr = make_array(n.children.size());
                for (const auto& c : n.children) arr->push_back(eval(*c));
                return Value(arr);
            }
            case NodeKind::comprehension:
                return eval_comprehension(n);
            case NodeKind::subscript:
                return load_subscript(n);
            case NodeKind::ternary:
                return eval(*n.children[0]).truthy() ? eval(*n.children[1])
                                                     : eval(*n.children[2]);
            case NodeKind::bool_op: {
                Value lhs = eval(*n.children[0]);
                if (n.text == "and") return lhs.truthy() ? eval(*n.children[1]) : lhs;
                return lhs.truthy() ? lhs : eval(*n.children[1]);
            }
            case NodeKind::unary_op: {
                Value operand = eval(*n.children[0]);
                if (n.text == "not") return Value(!operand.truthy());
                return negate(operand, n.line);
            }
            case NodeKind::bin_op: {
                Value lhs = eval(*n.children[0]);
                Value rhs = eval(*n.children[1]);
                return binary(n.text, lhs, rhs, n.line);
            }
            case NodeKind::compare: {
                Value lhs = eval(*n.children[0]);
                Value rhs = eval(*n.children[1]);
                return compare(n.text, lhs, rhs, n.line);
            }
            case NodeKind::call:
                return eval_call(n);
            default:
                throw RuntimeError("cannot evaluate this construct", n.line);
        }
    }

    Value eval_comprehension(const Node& n) {
        const Node& element = *n.children[0];
        const Value iterable = eval(*n.children[1]);
        const Node* cond = n.children.size() > 2 ? n.children[2].get() : nullptr;
        auto arr = make_array();
        auto step = [&](Value item) {
            tick(n.line);
            locals()[n.text] = std::move(item);
            if (cond && !eval(*cond).truthy()) return;
            charge(1, n.line);
            arr->push_back(eval(element));
        };
        if (iterable.is_range()) {
            const RangeVal r = iterable.range();
            if (r.step > 0)
                for (long long i = r.start; i < r.stop; i += r.step)
                    step(Value(static_cast<double>(i)));
            else
                for (long long i = r.start; i > r.stop; i += r.step)
                    step(Value(static_cast<double>(i)));
        } else if (iterable.is_array()) {
            const ArrayPtr src = iterable.array();
            for (std::size_t i = 0; i < src->size(); ++i) step((*src)[i]);
        } else if (iterable.is_string()) {
            for (char c : iterable.string()) step(Value(std::string(1, c)));
        } else {
            throw RuntimeError(std::string("cannot iterate over ") + iterable.type_name(), n.line);
        }
        return Value(arr);
    }

    Value load_subscript(const Node& n) {
        const Value container = eval(*n.children[0]);
        const Value idx = eval(*n.children[1]);
        if (container.is_array()) {
            const auto& items = *container.array();
            return items[static_cast<std::size_t>(
                detail::checked_index(idx, items.size(), n.line, "array index"))];
        }
        if (container.is_string()) {
            const auto& s = container.string();
            const auto i = static_cast<std::size_t>(
                detail::checked_index(idx, s.size(), n.line, "string index"));
            charge(1, n.line);
            return Value(std::string(1, s[i]));
        }
        if (container.is_range()) {
            const RangeVal r = container.range();
            const auto i = static_cast<long long>(detail::checked_index(
                idx, static_cast<std::size_t>(r.size()), n.line, "range index"));
            return Value(static_cast<double>(r.start + i * r.step));
        }
        throw RuntimeError(std::string("cannot index into ") + container.type_name(), n.line);
    }

    // ---- operators ----
    Value negate(const Value& v, int line) {
        if (v.is_number() || v.is_bool()) return Value(-v.as_number_unchecked());
        if (v.is_array()) {
            return elementwise_unary(
                v, line, [](double x) { return -x; });
        }
        throw RuntimeError(std::string("cannot negate ") + v.type_name(), line);
    }

    template <class F>
    Value elementwise_unary(const Value& v, int line, F f) {
        const auto& src = *v.array();
        charge(src.size(), line);
        auto out = make_array(src.size());
        for (const auto& item : src) {
            if (item.is_number() || item.is_bool())
                out->push_back(Value(f(item.as_number_unchecked())));
            else if (item.is_array())
                out->push_back(elementwise_unary(item, line, f));
            else
                throw RuntimeError(std::string("array element is not numeric: ") +
                                       item.type_name(),
                                   line);
        }
        return Value(out);
    }

    Value binary(const std::string& op, const Value& lhs, const Value& rhs, int line) {
        // Array operands broadcast elementwise, numpy style; zero divisors
        // follow IEEE inside arrays but raise on scalars.
        if (lhs.is_array() || rhs.is_array()) return elementwise_binary(op, lhs, rhs, line);
        if (lhs.is_string() || rhs.is_string()) {
            if (op == "+" && lhs.is_string() && rhs.is_string()) {
                charge(lhs.string().size() + rhs.string().size(), line);
                return Value(lhs.string() + rhs.string());
            }
            if (op == "*" && lhs.is_string() != rhs.is_string()) {
                const Value& s = lhs.is_string() ? lhs : rhs;
                const Value& k = lhs.is_string() ? rhs : lhs;
                const long long times =
                    std::max(0LL, detail::checked_integer(k, line, "repeat count"));
                charge(s.string().size() * static_cast<std::uint64_t>(times), line);
                std::string out;
                for (long long i = 0; i < times; ++i) out += s.string();
                return Value(out);
            }
            throw RuntimeError("unsupported string operation '" + op + "'", line);
        }
        if ((lhs.is_number() || lhs.is_bool()) && (rhs.is_number() || rhs.is_bool()))
            return Value(scalar_op(op, lhs.as_number_unchecked(), rhs.as_number_unchecked(),
                                   line, true));
        throw RuntimeError(std::string("unsupported operands for '") + op + "': " +
                               lhs.type_name() + " and " + rhs.type_name(),
                           line);
    }

    double scalar_op(const std::string& op, double a, double b, int line, bool strict_zero) {
        switch (op[0]) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return op == "**" ? std::pow(a, b) : a * b;
            case '/':
                if (b == 0.0 && strict_zero) throw RuntimeError("division by zero", line);
                if (op == "//") return std::floor(a / b);
                return a / b;
            case '%': {
                if (b == 0.0 && strict_zero) throw RuntimeError("modulo by zero", line);
                const double m = std::fmod(a, b);
                // Result carries the divisor's sign, matching the reference
                // notation's semantics.
                return (m != 0.0 && ((m < 0) != (b < 0))) ? m + b : m;
            }
            default:
                throw RuntimeError("unknown operator '" + op + "'", line);
        }
    }

    Value elementwise_binary(const std::string& op, const Value& lhs, const Value& rhs,
                             int line) {
        if (lhs.is_array() && rhs.is_array()) {
            const auto& a = *lhs.array();
            const auto& b = *rhs.array();
            if (a.size() != b.size())
                throw RuntimeError("array length mismatch: " + std::to_string(a.size()) +
                                       " vs " + std::to_string(b.size()),
                                   line);
            charge(a.size(), line);
            auto out = make_array(a.size());
            for (std::size_t i = 0; i < a.size(); ++i)
                out->push_back(elementwise_binary(op, a[i], b[i], line));
            return Value(out);
        }
        if (lhs.is_array() || rhs.is_array()) {
            const Value& arr = lhs.is_array() ? lhs : rhs;
            const Value& scalar = lhs.is_array() ? rhs : lhs;
            if (!scalar.is_number() && !scalar.is_bool())
                throw RuntimeError(std::string("unsupported operands for '") + op + "': " +
                                       lhs.type_name() + " and " + rhs.type_name(),
                                   line);
            const auto& a = *arr.array();
            charge(a.size(), line);
            auto out = make_array(a.size());
            for (const auto& item : a) {
                out->push_back(lhs.is_array() ? elementwise_binary(op, item, scalar, line)
                                              : elementwise_binary(op, scalar, item, line));
            }
            return Value(out);
        }
        if ((lhs.is_number() || lhs.is_bool()) && (rhs.is_number() || rhs.is_bool()))
            return Value(scalar_op(op, lhs.as_number_unchecked(), rhs.as_number_unchecked(),
                                   line, false));
        throw RuntimeError(std::string("array element is not numeric: ") +
                               (lhs.is_number() || lhs.is_bool() ? rhs.type_name()
                                                                 : lhs.type_name()),
                           line);
    }

    Value compare(const std::string& op, const Value& lhs, const Value& rhs, int line) {
        if (op == "==") return Value(lhs.equals(rhs));
        if (op == "!=") return Value(!lhs.equals(rhs));
        if (op == "in" || op == "not in") {
            bool found = false;
            if (rhs.is_array()) {
                for (const auto& item : *rhs.array())
                    if (item.equals(lhs)) {
                        found = true;
                        break;
                    }
            } else if (rhs.is_string()) {
                if (!lhs.is_string())
                    throw RuntimeError("'in <string>' requires a string operand", line);
                found = rhs.string().find(lhs.string()) != std::string::npos;
            } else if (rhs.is_range()) {
                const RangeVal r = rhs.range();
                if (lhs.is_number() || lhs.is_bool()) {
                    const double x = lhs.as_number_unchecked();
                    if (x == std::floor(x)) {
                        const long long i = static_cast<long long>(x);
                        if (r.step > 0)
                            found = i >= r.start && i < r.stop && (i - r.start) % r.step == 0;
                        else
                            found = i <= r.start && i > r.stop && (r.start - i) % (-r.step) == 0;
                    }
                }
            } else {
                throw RuntimeError(std::string("'in' needs an iterable, got ") + rhs.type_name(),
                                   line);
            }
            return Value(op == "in" ? found : !found);
        }
        // Ordering comparisons.
        if ((lhs.is_number() || lhs.is_bool()) && (rhs.is_number() || rhs.is_bool())) {
            const double a = lhs.as_number_unchecked(), b = rhs.as_number_unchecked();
            if (op == "<") return Value(a < b);
            if (op == "<=") return Value(a <= b);
            if (op == ">") return Value(a > b);
            return Value(a >= b);
        }
        if (lhs.is_string() && rhs.is_string()) {
            const int c = lhs.string().compare(rhs.string());
            if (op == "<") return Value(c < 0);
            if (op == "<=") return Value(c <= 0);
            if (op == ">") return Value(c > 0);
            return Value(c >= 0);
        }
        throw RuntimeError(std::string("cannot order ") + lhs.type_name() + " and " +
                               rhs.type_name(),
                           line);
    }

    // ---- calls ----
    Value eval_call(const Node& n) {
        std::vector<Value> args;
        args.reserve(n.children.size());
        for (const auto& c : n.children) args.push_back(eval(*c));
        if (const Node* fn = function(n.text)) return call_user(*fn, std::move(args), n.line);
        return call_builtin(n.text, args, n.line);
    }

    Value call_user(const Node& fn, std::vector<Value> args, int line) {
        std::vector<const Node*> params;
        const Node* body = nullptr;
        for (const auto& c : fn.children) {
            if (c->kind == NodeKind::param)
                params.push_back(c.get());
            else
                body = c.get();
        }
        if (params.size() != args.size())
            throw RuntimeError(fn.text + "() takes " + std::to_string(params.size()) +
                                   " arguments, got " + std::to_string(args.size()),
                               line);
        if (static_cast<int>(scopes_.size()) > limits_.max_depth)
            throw RuntimeError("recursion depth limit exceeded", line);
        Scope frame;
        for (std::size_t i = 0; i < params.size(); ++i)
            frame[params[i]->text] = std::move(args[i]);
        scopes_.push_back(&frame);
        Value result;
        try {
            exec(*body);
        } catch (detail::ReturnSig& r) {
            result = std::move(r.value);
        } catch (...) {
            scopes_.pop_back();
            throw;
        }
        scopes_.pop_back();
        return result;
    }

    // Builtin surface: deliberately free of I/O, clock, and randomness, so
    // execution is a pure function of the arguments.
    Value call_builtin(const std::string& name, std::vector<Value>& args, int line) {
        auto want = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi)
                throw RuntimeError(name + "() argument count", line);
        };
        auto num = [&](const Value& v) -> double {
            if (!v.is_number() && !v.is_bool())
                throw RuntimeError(name + "() expects numbers, got " +
                                       std::string(v.type_name()),
                                   line);
            return v.as_number_unchecked();
        };

        if (name == "len") {
            want(1, 1);
            const Value& v = args[0];
            if (v.is_array()) return Value(static_cast<double>(v.array()->size()));
            if (v.is_string()) return Value(static_cast<double>(v.string().size()));
            if (v.is_range()) return Value(static_cast<double>(v.range().size()));
            throw RuntimeError(std::string("len() of ") + v.type_name(), line);
        }
        if (name == "range") {
            want(1, 3);
            RangeVal r;
            if (args.size() == 1) {
                r.stop = detail::checked_integer(args[0], line, "range bound");
            } else {
                r.start = detail::checked_integer(args[0], line, "range bound");
                r.stop = detail::checked_integer(args[1], line, "range bound");
                if (args.size() == 3) {
                    r.step = detail::checked_integer(args[2], line, "range step");
                    if (r.step == 0) throw RuntimeError("range() step cannot be zero", line);
                }
            }
            return Value(r);
        }
        if (name == "abs") {
            want(1, 1);
            if (args[0].is_array())
                return elementwise_unary(args[0], line, [](double x) { return std::fabs(x); });
            return Value(std::fabs(num(args[0])));
        }
        if (name == "sqrt" || name == "exp" || name == "log" || name == "floor" ||
            name == "ceil" || name == "round") {
            want(1, 1);
            auto f = [&](double x) {
                if (name == "sqrt") return std::sqrt(x);
                if (name == "exp") return std::exp(x);
                if (name == "log") return std::log(x);
                if (name == "floor") return std::floor(x);
                if (name == "ceil") return std::ceil(x);
                return std::nearbyint(x);  // round half to even, platform-stable
            };
            if (args[0].is_array()) return elementwise_unary(args[0], line, f);
            return Value(f(num(args[0])));
        }
        if (name == "int") {
            want(1, 1);
            return Value(std::trunc(num(args[0])));
        }
        if (name == "float") {
            want(1, 1);
            return Value(num(args[0]));
        }
        if (name == "isnan" || name == "isinf") {
            want(1, 1);
            auto f = [&](double x) {
                return name == "isnan" ? (std::isnan(x) ? 1.0 : 0.0)
                                       : (std::isinf(x) ? 1.0 : 0.0);
            };
            if (args[0].is_array()) return elementwise_unary(args[0], line, f);
            return Value(f(num(args[0])) != 0.0);
        }
        if (name == "min" || name == "max") {
            want(1, 64);
            const bool take_min = name == "min";
            if (args.size() == 1) {
                flat_numeric(args[0], line, name.c_str());
                const auto& a = *args[0].array();
                if (a.empty()) throw RuntimeError(name + "() of empty array", line);
                double best = a[0].as_number_unchecked();
                for (const auto& v : a) {
                    const double x = v.as_number_unchecked();
                    if (take_min ? x < best : x > best) best = x;
                }
                return Value(best);
            }
            double best = num(args[0]);
            for (std::size_t i = 1; i < args.size(); ++i) {
                const double x = num(args[i]);
                if (take_min ? x < best : x > best) best = x;
            }
            return Value(best);
        }
        if (name == "argmin" || name == "argmax") {
            want(1, 1);
            flat_numeric(args[0], line, name.c_str());
            const auto& a = *args[0].array();
            if (a.empty()) throw RuntimeError(name + "() of empty array", line);
            std::size_t best = 0;
            for (std::size_t i = 1; i < a.size(); ++i) {
                const double x = a[i].as_number_unchecked();
                const double b = a[best].as_number_unchecked();
                if (name == "argmin" ? x < b : x > b) best = i;
            }
            return Value(static_cast<double>(best));
        }
        if (name == "sum" || name == "mean") {
            want(1, 1);
            flat_numeric(args[0], line, name.c_str());
            const auto& a = *args[0].array();
            double s = 0.0;
            for (const auto& v : a) s += v.as_number_unchecked();
            if (name == "sum") return Value(s);
            if (a.empty()) throw RuntimeError("mean() of empty array", line);
            return Value(s / static_cast<double>(a.size()));
        }
        if (name == "zeros" || name == "ones") {
            want(1, 2);
            return filled_array(args, name == "zeros" ? 0.0 : 1.0, line);
        }
        if (name == "full") {
            want(2, 3);
            const double fill = num(args.back());
            std::vector<Value> dims(args.begin(), args.end() - 1);
            return filled_array(dims, fill, line);
        }
        if (name == "append") {
            want(2, 2);
            if (!args[0].is_array()) throw RuntimeError("append() needs an array", line);
            charge(1, line);
            args[0].array()->push_back(args[1]);
            return Value();
        }
        if (name == "sorted") {
            want(1, 1);
            Value src = args[0];
            if (src.is_range()) src = materialize(src.range(), line);
            if (!src.is_array()) throw RuntimeError("sorted() needs an array", line);
            const auto& a = *src.array();
            charge(a.size(), line);
            auto out = make_array(a.size());
            *out = a;
            bool numeric = true, textual = true;
            for (const auto& v : *out) {
                if (!v.is_number() && !v.is_bool()) numeric = false;
                if (!v.is_string()) textual = false;
            }
            if (numeric)
                std::sort(out->begin(), out->end(), [](const Value& x, const Value& y) {
                    return x.as_number_unchecked() < y.as_number_unchecked();
                });
            else if (textual)
                std::sort(out->begin(), out->end(),
                          [](const Value& x, const Value& y) { return x.string() < y.string(); });
            else
                throw RuntimeError("sorted() needs uniform numbers or strings", line);
            return Value(out);
        }
        if (name == "copy") {
            want(1, 1);
            return deep_copy(args[0], line);
        }
        if (name == "list") {
            want(1, 1);
            if (args[0].is_range()) return materialize(args[0].range(), line);
            if (args[0].is_array()) {
                const auto& a = *args[0].array();
                charge(a.size(), line);
                auto out = make_array(a.size());
                *out = a;
                return Value(out);
            }
            throw RuntimeError("list() needs an array or range", line);
        }
        throw RuntimeError("name '" + name + "' is not defined", line);
    }

    void flat_numeric(const Value& v, int line, const char* what) {
        if (!v.is_array())
            throw RuntimeError(std::string(what) + "() expects an array", line);
        for (const auto& item : *v.array())
            if (!item.is_number() && !item.is_bool())
                throw RuntimeError(std::string(what) + "() expects a flat numeric array", line);
    }

    Value filled_array(const std::vector<Value>& dims, double fill, int line) {
        const long long n = detail::checked_integer(dims[0], line, "array size");
        if (n < 0) throw RuntimeError("array size cannot be negative", line);
        if (dims.size() == 1) {
            charge(static_cast<std::uint64_t>(n), line);
            auto arr = make_array(static_cast<std::size_t>(n));
            arr->assign(static_cast<std::size_t>(n), Value(fill));
            return Value(arr);
        }
        const long long m = detail::checked_integer(dims[1], line, "array size");
        if (m < 0) throw RuntimeError("array size cannot be negative", line);
        charge(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m) +
                   static_cast<std::uint64_t>(n),
               line);
        auto rows = make_array(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) {
            auto row = make_array(static_cast<std::size_t>(m));
            row->assign(static_cast<std::size_t>(m), Value(fill));
            rows->push_back(Value(row));
        }
        return Value(rows);
    }

    Value materialize(const RangeVal& r, int line) {
        const long long n = r.size();
        charge(static_cast<std::uint64_t>(n), line);
        auto arr = make_array(static_cast<std::size_t>(n));
        for (long long i = 0, v = r.start; i < n; ++i, v += r.step)
            arr->push_back(Value(static_cast<double>(v)));
        return Value(arr);
    }

    Value deep_copy(const Value& v, int line) {
        if (!v.is_array()) return v;
        const auto& a = *v.array();
        charge(a.size(), line);
        auto out = make_array(a.size());
        for (const auto& item : a) out->push_back(deep_copy(item, line));
        return Value(out);
    }

    Limits limits_;
    std::chrono::steady_clock::time_point start_;
    std::uint64_t steps_ = 0;
    std::uint64_t cells_ = 0;
    Scope globals_;
    std::vector<Scope*> scopes_;
    std::unordered_map<std::string, const Node*> functions_;
};

}  // namespace ahd::script
