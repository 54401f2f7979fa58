#pragma once

// Field-checked access to JSON objects: every lookup records its path so a
// schema violation can name the field, and unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modalsyn/errors.hpp"
#include "modalsyn/types.hpp"

namespace modalsyn::io::detail {

using json = nlohmann::ordered_json;

inline json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // nlohmann reports "line L, column C" inside the message.
        throw ParseError("document", e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(where, "must be finite");
    return v;
}

inline std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where, "expected a list of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline Vector vector_from(const json& j, const std::string& where) {
    const auto v = number_list(j, where);
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = v[i];
    return out;
}

/// Column-major list of columns.
inline Matrix matrix_from(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where, "expected a list of columns");
    if (j.empty()) return Matrix();
    Matrix out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const Vector col = vector_from(j[k], where + "[" + std::to_string(k) + "]");
        if (k == 0) out.resize(col.size(), static_cast<Index>(j.size()));
        if (col.size() != out.rows()) throw ParseError(where, "columns differ in length");
        out.col(static_cast<Index>(k)) = col;
    }
    return out;
}

inline json to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline json to_json(const Matrix& m) {
    json out = json::array();
    for (Index k = 0; k < m.cols(); ++k) out.push_back(to_json(Vector(m.col(k))));
    return out;
}

class JsonReader {
public:
    JsonReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(path_.empty() ? "document" : path_, "expected an object");
    }

    std::string path() const { return path_.empty() ? "document" : path_; }
    std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        if (!has(key)) throw ParseError(path(key), "required field is missing");
        return j_.at(key);
    }

    double number(const std::string& key) { return as_number(at(key), path(key)); }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    int integer(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number_integer()) throw ParseError(path(key), "expected an integer");
        const auto wide = v.get<std::int64_t>();
        if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max()) {
            throw ParseError(path(key), "integer out of range");
        }
        return static_cast<int>(wide);
    }
    int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ParseError(path(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ParseError(path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) throw ParseError(path(key), "expected a string");
        return v.get<std::string>();
    }

    /// Rejects keys that were never looked up.
    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) throw ParseError(path(item.key()), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace modalsyn::io::detail
