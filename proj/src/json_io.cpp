#include "dynaopt/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "dynaopt/errors.hpp"

namespace dynaopt {

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void dump_value(const ordered_json& v, int indent, int depth, std::string& out) {
    const auto pad = [&](int d) {
        if (indent >= 0) {
            out += '\n';
            out.append(static_cast<std::size_t>(indent * d), ' ');
        }
    };
    switch (v.type()) {
        case ordered_json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ',';
                first = false;
                pad(depth + 1);
                append_escaped(out, it.key());
                out += indent >= 0 ? ": " : ":";
                dump_value(it.value(), indent, depth + 1, out);
            }
            pad(depth);
            out += '}';
            return;
        }
        case ordered_json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ',';
                first = false;
                pad(depth + 1);
                dump_value(item, indent, depth + 1, out);
            }
            pad(depth);
            out += ']';
            return;
        }
        case ordered_json::value_t::string:
            append_escaped(out, v.get<std::string>());
            return;
        case ordered_json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            return;
        case ordered_json::value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            return;
        case ordered_json::value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            return;
        case ordered_json::value_t::number_float:
            out += format_double(v.get<double>());
            return;
        default:
            out += "null";
            return;
    }
}

}  // namespace

std::string format_double(double value) {
    if (!std::isfinite(value)) {
        throw EvalError("cannot serialize non-finite number");
    }
    // Negative zero would serialize as "-0", which JSON parsers read back as
    // integer 0; normalize so save -> load -> save is byte-stable.
    if (value == 0.0) return "0";
    char buf[40];
    // 17 significant digits guarantee exact double round-trip.
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string format_decimal(double value) {
    if (!std::isfinite(value)) {
        throw EvalError("cannot serialize non-finite number");
    }
    char buf[40];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

std::string dump_json(const ordered_json& value, int indent) {
    std::string out;
    dump_value(value, indent, 0, out);
    return out;
}

ordered_json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw EvalError("cannot open " + path.string());
    }
    ordered_json j = ordered_json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        throw EvalError("invalid JSON in " + path.string());
    }
    return j;
}

void save_json_file(const ordered_json& value, const std::filesystem::path& path, int indent) {
    std::ofstream out(path);
    if (!out) {
        throw EvalError("cannot write " + path.string());
    }
    out << dump_json(value, indent) << '\n';
    if (!out) {
        throw EvalError("write failed for " + path.string());
    }
}

}  // namespace dynaopt
