#include "json_util.hpp"

#include <algorithm>
#include <cmath>

namespace drivepred::jsonutil {

json parse(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
        throw ParseError("malformed document: " + std::string(e.what()), "", line);
    }
}

const json& Reader::get(std::string_view key) const {
    if (!node_->is_object()) throw ParseError(path_ + " must be an object", path_);
    auto it = node_->find(key);
    if (it == node_->end()) throw ParseError(path(key) + " required", path(key));
    return *it;
}

double Reader::number(std::string_view key) const { return Reader(get(key), path(key)).as_number(); }

std::int64_t Reader::integer(std::string_view key) const { return Reader(get(key), path(key)).as_integer(); }

std::uint64_t Reader::unsigned_integer(std::string_view key) const {
    const json& v = get(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ParseError(path(key) + " must be a non-negative integer", path(key));
    }
    return v.get<std::uint64_t>();
}

bool Reader::boolean(std::string_view key) const {
    const json& v = get(key);
    if (!v.is_boolean()) throw ParseError(path(key) + " must be a boolean", path(key));
    return v.get<bool>();
}

std::string Reader::string(std::string_view key) const {
    const json& v = get(key);
    if (!v.is_string()) throw ParseError(path(key) + " must be a string", path(key));
    return v.get<std::string>();
}

Reader Reader::object(std::string_view key) const {
    const json& v = get(key);
    if (!v.is_object()) throw ParseError(path(key) + " must be an object", path(key));
    return Reader(v, path(key));
}

ArrayReader Reader::array(std::string_view key) const {
    const json& v = get(key);
    if (!v.is_array()) throw ParseError(path(key) + " must be an array", path(key));
    return ArrayReader(v, path(key));
}

std::vector<double> Reader::numbers(std::string_view key) const {
    auto arr = array(key);
    std::vector<double> out(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) out[i] = arr.at(i).as_number();
    return out;
}

std::vector<std::int64_t> Reader::integers(std::string_view key) const {
    auto arr = array(key);
    std::vector<std::int64_t> out(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) out[i] = arr.at(i).as_integer();
    return out;
}

void Reader::expect_format(std::string_view format, std::int64_t max_version) const {
    if (!node_->is_object()) throw ParseError("document root must be an object", "");
    const std::string found = string("format");
    if (found != format) {
        throw ParseError("format is \"" + found + "\", expected \"" + std::string(format) + "\"", path("format"));
    }
    const auto version = integer("version");
    if (version < 1 || version > max_version) {
        throw ParseError("unsupported version " + std::to_string(version), path("version"));
    }
}

double Reader::as_number() const {
    if (!node_->is_number()) throw ParseError(path_ + " must be a number", path_);
    return node_->get<double>();
}

std::int64_t Reader::as_integer() const {
    if (!node_->is_number_integer()) throw ParseError(path_ + " must be an integer", path_);
    return node_->get<std::int64_t>();
}

json to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from(const Reader& r, std::string_view key) {
    Reader m = r.object(key);
    const auto rows = static_cast<std::size_t>(m.unsigned_integer("rows"));
    const auto cols = static_cast<std::size_t>(m.unsigned_integer("cols"));
    auto data = m.array("data");
    if (data.size() != rows) throw ParseError(m.path("data") + " row count mismatch", m.path("data"));
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        auto row = data.at(i);
        if (!row.node().is_array() || row.node().size() != cols) {
            throw ParseError(row.path() + " must hold " + std::to_string(cols) + " numbers", row.path());
        }
        for (std::size_t j = 0; j < cols; ++j) {
            out(i, j) = Reader(row.node()[j], row.path()).as_number();
        }
    }
    return out;
}

}  // namespace drivepred::jsonutil
