#include "cra/format.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cra {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
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
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

void JsonWriter::indent() {
    for (std::size_t i = 0; i < stack_.size(); ++i) out_ += "  ";
}

void JsonWriter::prefix() {
    if (pending_key_) {
        pending_key_ = false;
        return;  // value follows "key": inline
    }
    if (stack_.empty()) return;
    if (has_items_.back()) out_ += ',';
    out_ += '\n';
    indent();
    has_items_.back() = true;
}

JsonWriter& JsonWriter::begin_object() {
    prefix();
    out_ += '{';
    stack_.push_back(Ctx::Object);
    has_items_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    if (stack_.empty() || stack_.back() != Ctx::Object)
        throw std::logic_error("JsonWriter: mismatched end_object");
    bool had = has_items_.back();
    stack_.pop_back();
    has_items_.pop_back();
    if (had) {
        out_ += '\n';
        indent();
    }
    out_ += '}';
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    prefix();
    out_ += '[';
    stack_.push_back(Ctx::Array);
    has_items_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    if (stack_.empty() || stack_.back() != Ctx::Array)
        throw std::logic_error("JsonWriter: mismatched end_array");
    bool had = has_items_.back();
    stack_.pop_back();
    has_items_.pop_back();
    if (had) {
        out_ += '\n';
        indent();
    }
    out_ += ']';
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    if (stack_.empty() || stack_.back() != Ctx::Object)
        throw std::logic_error("JsonWriter: key outside object");
    prefix();
    out_ += '"';
    out_ += json_escape(k);
    out_ += "\": ";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    prefix();
    out_ += '"';
    out_ += json_escape(v);
    out_ += '"';
    return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::value(double v) {
    prefix();
    if (std::isfinite(v)) {
        out_ += fmt17(v);
    } else {
        out_ += "null";  // JSON has no inf/nan
    }
    return *this;
}

JsonWriter& JsonWriter::value(long long v) {
    prefix();
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(int v) { return value(static_cast<long long>(v)); }

JsonWriter& JsonWriter::value(bool v) {
    prefix();
    out_ += v ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value_null() {
    prefix();
    out_ += "null";
    return *this;
}

std::string JsonWriter::str() const {
    if (!stack_.empty()) throw std::logic_error("JsonWriter: unterminated document");
    return out_ + "\n";
}

}  // namespace cra
