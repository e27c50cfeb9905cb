#pragma once

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace ahd::script {

// ----------------------------------------------------------------------------
// Runtime values: None, Number (double), Bool, String, Array (shared,
// Python-list semantics), Range (lazy integer sequence). Matrices are arrays
// of arrays; numeric builtins treat them elementwise.
// ----------------------------------------------------------------------------

class Value;
using ArrayPtr = std::shared_ptr<std::vector<Value>>;

struct RangeVal {
    long long start = 0, stop = 0, step = 1;

    long long size() const {
        if (step > 0) return stop > start ? (stop - start + step - 1) / step : 0;
        return start > stop ? (start - stop - step - 1) / (-step) : 0;
    }
    bool operator==(const RangeVal&) const = default;
};

class Value {
public:
    Value() : v_(std::monostate{}) {}
    Value(double d) : v_(d) {}
    Value(bool b) : v_(b) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(ArrayPtr a) : v_(std::move(a)) {}
    Value(RangeVal r) : v_(r) {}

    bool is_none() const { return std::holds_alternative<std::monostate>(v_); }
    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_array() const { return std::holds_alternative<ArrayPtr>(v_); }
    bool is_range() const { return std::holds_alternative<RangeVal>(v_); }

    double number() const { return std::get<double>(v_); }
    bool boolean() const { return std::get<bool>(v_); }
    const std::string& string() const { return std::get<std::string>(v_); }
    const ArrayPtr& array() const { return std::get<ArrayPtr>(v_); }
    const RangeVal& range() const { return std::get<RangeVal>(v_); }

    const char* type_name() const {
        if (is_none()) return "None";
        if (is_number()) return "number";
        if (is_bool()) return "bool";
        if (is_string()) return "string";
        if (is_array()) return "array";
        return "range";
    }

    bool truthy() const {
        if (is_none()) return false;
        if (is_bool()) return boolean();
        if (is_number()) return number() != 0.0;
        if (is_string()) return !string().empty();
        if (is_array()) return !array()->empty();
        return range().size() > 0;
    }

    /// Deep structural equality; numbers and bools compare numerically, so
    /// True == 1 as in the reference notation.
    bool equals(const Value& o) const {
        if ((is_number() || is_bool()) && (o.is_number() || o.is_bool()))
            return as_number_unchecked() == o.as_number_unchecked();
        if (is_string() && o.is_string()) return string() == o.string();
        if (is_none() && o.is_none()) return true;
        if (is_range() && o.is_range()) return range() == o.range();
        if (is_array() && o.is_array()) {
            const auto& a = *array();
            const auto& b = *o.array();
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (!a[i].equals(b[i])) return false;
            return true;
        }
        return false;
    }

    double as_number_unchecked() const {
        return is_bool() ? (boolean() ? 1.0 : 0.0) : number();
    }

private:
    std::variant<std::monostate, double, bool, std::string, ArrayPtr, RangeVal> v_;
};

inline ArrayPtr make_array(std::size_t reserve = 0) {
    auto a = std::make_shared<std::vector<Value>>();
    if (reserve) a->reserve(reserve);
    return a;
}

inline std::string repr(const Value& v, int depth = 0) {
    if (v.is_none()) return "None";
    if (v.is_bool()) return v.boolean() ? "True" : "False";
    if (v.is_number()) {
        const double d = v.number();
        if (std::isnan(d)) return "nan";
        if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
        if (d == std::floor(d) && std::fabs(d) < 1e15) {
            return std::to_string(static_cast<long long>(d));
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g", d);
        return buf;
    }
    if (v.is_string()) return "'" + v.string() + "'";
    if (v.is_range())
        return "range(" + std::to_string(v.range().start) + ", " +
               std::to_string(v.range().stop) + ", " + std::to_string(v.range().step) + ")";
    if (depth > 3) return "[...]";
    std::string out = "[";
    const auto& items = *v.array();
    for (std::size_t i = 0; i < items.size() && i < 8; ++i) {
        if (i) out += ", ";
        out += repr(items[i], depth + 1);
    }
    if (items.size() > 8) out += ", ...";
    return out + "]";
}

}  // namespace ahd::script
