#pragma once

// Checked access to JSON documents. Every failure is a ParseError carrying the
// dotted path of the offending field.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "drivepred/common.hpp"

namespace drivepred::jsonutil {

using nlohmann::json;

/// Parses text; syntax errors are reported with their 1-based line number.
json parse(std::string_view text);

class ArrayReader;

class Reader {
public:
    Reader(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

    std::string path(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }
    const std::string& path() const { return path_; }
    const json& node() const { return *node_; }

    bool has(std::string_view key) const { return node_->is_object() && node_->contains(key); }
    const json& get(std::string_view key) const;

    double number(std::string_view key) const;
    std::int64_t integer(std::string_view key) const;
    std::uint64_t unsigned_integer(std::string_view key) const;
    bool boolean(std::string_view key) const;
    std::string string(std::string_view key) const;
    Reader object(std::string_view key) const;
    ArrayReader array(std::string_view key) const;
    std::vector<double> numbers(std::string_view key) const;
    std::vector<std::int64_t> integers(std::string_view key) const;

    /// Checks the "format" tag and that "version" is supported.
    void expect_format(std::string_view format, std::int64_t max_version) const;

    // Scalar conversions of this node itself.
    double as_number() const;
    std::int64_t as_integer() const;

private:
    const json* node_;
    std::string path_;
};

class ArrayReader {
public:
    ArrayReader(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}
    std::size_t size() const { return node_->size(); }
    Reader at(std::size_t i) const { return Reader((*node_)[i], path_ + "[" + std::to_string(i) + "]"); }

private:
    const json* node_;
    std::string path_;
};

json to_json(const Matrix& m);
Matrix matrix_from(const Reader& r, std::string_view key);

}  // namespace drivepred::jsonutil
