// PCD v0.7 reader/writer, ASCII and binary (little-endian). Reads any field
// layout that carries x/y/z as 4-byte floats and skips the rest; writes the
// canonical xyz-only header.
#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "decim/core.hpp"

namespace decim {

enum class PcdErrorKind {
    malformed_header,
    truncated_body,
    unsupported_field,
    bad_value,
};

class PcdParseError : public Error {
public:
    PcdParseError(PcdErrorKind kind, std::size_t byte_offset, const std::string& message)
        : Error(message + " (byte offset " + std::to_string(byte_offset) + ")"),
          kind(kind),
          byte_offset(byte_offset) {}

    PcdErrorKind kind;
    std::size_t byte_offset;
};

enum class PcdMode { ascii, binary };

namespace detail {

inline std::uint32_t load_u32_le(const unsigned char* b) {
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void store_u32_le(std::uint32_t v, char* out) {
    out[0] = static_cast<char>(v & 0xFF);
    out[1] = static_cast<char>((v >> 8) & 0xFF);
    out[2] = static_cast<char>((v >> 16) & 0xFF);
    out[3] = static_cast<char>((v >> 24) & 0xFF);
}

struct PcdHeader {
    std::vector<std::string> field_names;
    std::vector<int> sizes;
    std::vector<char> types;
    std::vector<int> counts;
    long long width = -1;
    long long height = -1;
    long long points = -1;
    std::string data_mode;
    std::size_t body_offset = 0;
    std::size_t fields_line = 0;
    std::size_t type_line = 0;
    std::size_t data_line = 0;
    std::size_t last_line = 0;
};

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

inline long long parse_ll(const std::string& token, std::size_t line_offset) {
    char* end = nullptr;
    const long long v = std::strtoll(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0' || v < 0)
        throw PcdParseError(PcdErrorKind::malformed_header, line_offset,
                            "read_pcd: expected a nonnegative integer, got '" + token + "'");
    return v;
}

inline PcdHeader parse_pcd_header(const std::string& data) {
    PcdHeader h;
    std::size_t pos = 0;
    bool have_data = false;
    while (pos < data.size()) {
        const std::size_t line_start = pos;
        std::size_t nl = data.find('\n', pos);
        if (nl == std::string::npos)
            nl = data.size();
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        h.last_line = line_start;

        const std::vector<std::string> tokens = split_tokens(line);
        if (tokens.empty())
            continue;
        const std::string& key = tokens[0];
        if (key == "VERSION") {
            // accepted as-is; only 0.7-style layouts are produced anyway
        } else if (key == "FIELDS" || key == "COLUMNS") {
            h.field_names.assign(tokens.begin() + 1, tokens.end());
            h.fields_line = line_start;
        } else if (key == "SIZE") {
            h.sizes.clear();
            for (std::size_t i = 1; i < tokens.size(); ++i)
                h.sizes.push_back(static_cast<int>(parse_ll(tokens[i], line_start)));
        } else if (key == "TYPE") {
            h.types.clear();
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                if (tokens[i].size() != 1)
                    throw PcdParseError(PcdErrorKind::malformed_header, line_start,
                                        "read_pcd: TYPE entries must be single characters");
                h.types.push_back(tokens[i][0]);
            }
            h.type_line = line_start;
        } else if (key == "COUNT") {
            h.counts.clear();
            for (std::size_t i = 1; i < tokens.size(); ++i)
                h.counts.push_back(static_cast<int>(parse_ll(tokens[i], line_start)));
        } else if (key == "WIDTH") {
            if (tokens.size() != 2)
                throw PcdParseError(PcdErrorKind::malformed_header, line_start,
                                    "read_pcd: WIDTH expects one value");
            h.width = parse_ll(tokens[1], line_start);
        } else if (key == "HEIGHT") {
            if (tokens.size() != 2)
                throw PcdParseError(PcdErrorKind::malformed_header, line_start,
                                    "read_pcd: HEIGHT expects one value");
            h.height = parse_ll(tokens[1], line_start);
        } else if (key == "POINTS") {
            if (tokens.size() != 2)
                throw PcdParseError(PcdErrorKind::malformed_header, line_start,
                                    "read_pcd: POINTS expects one value");
            h.points = parse_ll(tokens[1], line_start);
        } else if (key == "VIEWPOINT") {
            // ignored
        } else if (key == "DATA") {
            if (tokens.size() != 2)
                throw PcdParseError(PcdErrorKind::malformed_header, line_start,
                                    "read_pcd: DATA expects one value");
            h.data_mode = tokens[1];
            h.data_line = line_start;
            h.body_offset = pos;
            have_data = true;
            break;
        }
        // unknown keys are skipped
    }
    if (!have_data)
        throw PcdParseError(PcdErrorKind::malformed_header, h.last_line,
                            "read_pcd: header has no DATA line");
    return h;
}

}  // namespace detail

/// Parses a PCD v0.7 file. Points with any non-finite coordinate are dropped
/// and counted into *non_finite_dropped when given.
inline PointCloud read_pcd(const std::string& path, std::size_t* non_finite_dropped = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("read_pcd: cannot open '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    detail::PcdHeader h = detail::parse_pcd_header(data);

    const std::size_t n_fields = h.field_names.size();
    if (n_fields == 0)
        throw PcdParseError(PcdErrorKind::malformed_header, h.last_line,
                            "read_pcd: header has no FIELDS line");
    if (h.counts.empty())
        h.counts.assign(n_fields, 1);
    if (h.sizes.size() != n_fields || h.types.size() != n_fields || h.counts.size() != n_fields)
        throw PcdParseError(PcdErrorKind::malformed_header, h.fields_line,
                            "read_pcd: SIZE/TYPE/COUNT do not match the FIELDS count");
    if (h.width < 0)
        throw PcdParseError(PcdErrorKind::malformed_header, h.last_line,
                            "read_pcd: header has no WIDTH line");
    if (h.height < 0)
        h.height = 1;
    long long n_points = h.width * h.height;
    if (h.points >= 0 && h.points != n_points)
        throw PcdParseError(PcdErrorKind::malformed_header, h.last_line,
                            "read_pcd: POINTS disagrees with WIDTH*HEIGHT");

    int idx_x = -1, idx_y = -1, idx_z = -1;
    for (std::size_t i = 0; i < n_fields; ++i) {
        if (h.field_names[i] == "x")
            idx_x = static_cast<int>(i);
        else if (h.field_names[i] == "y")
            idx_y = static_cast<int>(i);
        else if (h.field_names[i] == "z")
            idx_z = static_cast<int>(i);
        if (h.types[i] != 'F' && h.types[i] != 'I' && h.types[i] != 'U')
            throw PcdParseError(PcdErrorKind::unsupported_field, h.type_line,
                                std::string("read_pcd: unsupported field type '") + h.types[i] +
                                    "'");
    }
    if (idx_x < 0 || idx_y < 0 || idx_z < 0)
        throw PcdParseError(PcdErrorKind::malformed_header, h.fields_line,
                            "read_pcd: FIELDS must include x, y and z");
    for (int idx : {idx_x, idx_y, idx_z}) {
        const auto i = static_cast<std::size_t>(idx);
        if (h.types[i] != 'F' || h.sizes[i] != 4 || h.counts[i] != 1)
            throw PcdParseError(PcdErrorKind::unsupported_field, h.type_line,
                                "read_pcd: field '" + h.field_names[i] +
                                    "' must be a 4-byte float with count 1");
    }

    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(n_points));
    std::size_t dropped = 0;

    if (h.data_mode == "ascii") {
        std::size_t pos = h.body_offset;
        auto next_token = [&](float* out) {
            while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos])))
                ++pos;
            if (pos >= data.size())
                throw PcdParseError(PcdErrorKind::truncated_body, data.size(),
                                    "read_pcd: body ends before all points were read");
            const std::size_t start = pos;
            while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
                ++pos;
            if (out) {
                const std::string token = data.substr(start, pos - start);
                char* end = nullptr;
                *out = std::strtof(token.c_str(), &end);
                if (end == token.c_str() || *end != '\0')
                    throw PcdParseError(PcdErrorKind::bad_value, start,
                                        "read_pcd: cannot parse '" + token + "' as a float");
            }
        };
        for (long long pt = 0; pt < n_points; ++pt) {
            Point p;
            for (std::size_t f = 0; f < n_fields; ++f) {
                for (int c = 0; c < h.counts[f]; ++c) {
                    float* dst = nullptr;
                    if (c == 0) {
                        if (static_cast<int>(f) == idx_x)
                            dst = &p.x;
                        else if (static_cast<int>(f) == idx_y)
                            dst = &p.y;
                        else if (static_cast<int>(f) == idx_z)
                            dst = &p.z;
                    }
                    next_token(dst);
                }
            }
            if (is_finite(p))
                cloud.points.push_back(p);
            else
                ++dropped;
        }
    } else if (h.data_mode == "binary") {
        std::size_t stride = 0;
        std::size_t off_x = 0, off_y = 0, off_z = 0;
        for (std::size_t f = 0; f < n_fields; ++f) {
            if (static_cast<int>(f) == idx_x)
                off_x = stride;
            else if (static_cast<int>(f) == idx_y)
                off_y = stride;
            else if (static_cast<int>(f) == idx_z)
                off_z = stride;
            stride += static_cast<std::size_t>(h.sizes[f]) * static_cast<std::size_t>(h.counts[f]);
        }
        const std::size_t need = stride * static_cast<std::size_t>(n_points);
        const std::size_t have = data.size() - h.body_offset;
        if (have < need)
            throw PcdParseError(PcdErrorKind::truncated_body, data.size(),
                                "read_pcd: binary body holds " + std::to_string(have) +
                                    " bytes, needs " + std::to_string(need));
        const auto* body = reinterpret_cast<const unsigned char*>(data.data()) + h.body_offset;
        for (long long pt = 0; pt < n_points; ++pt) {
            const unsigned char* row = body + static_cast<std::size_t>(pt) * stride;
            Point p{std::bit_cast<float>(detail::load_u32_le(row + off_x)),
                    std::bit_cast<float>(detail::load_u32_le(row + off_y)),
                    std::bit_cast<float>(detail::load_u32_le(row + off_z))};
            if (is_finite(p))
                cloud.points.push_back(p);
            else
                ++dropped;
        }
    } else {
        throw PcdParseError(PcdErrorKind::unsupported_field, h.data_line,
                            "read_pcd: unsupported DATA encoding '" + h.data_mode + "'");
    }

    if (non_finite_dropped)
        *non_finite_dropped = dropped;
    return cloud;
}

/// Writes the cloud as PCD v0.7 with FIELDS x y z. ASCII uses 9 significant
/// digits so single-precision values survive the round trip; binary bodies
/// round-trip bit-exactly.
inline void write_pcd(const PointCloud& cloud, const std::string& path, PcdMode mode) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("write_pcd: cannot open '" + path + "' for writing");

    const std::size_t n = cloud.size();
    out << "# .PCD v0.7 - Point Cloud Data file format\n"
        << "VERSION 0.7\n"
        << "FIELDS x y z\n"
        << "SIZE 4 4 4\n"
        << "TYPE F F F\n"
        << "COUNT 1 1 1\n"
        << "WIDTH " << n << "\n"
        << "HEIGHT 1\n"
        << "VIEWPOINT 0 0 0 1 0 0 0\n"
        << "POINTS " << n << "\n"
        << "DATA " << (mode == PcdMode::ascii ? "ascii" : "binary") << "\n";

    if (mode == PcdMode::ascii) {
        char line[96];
        for (const Point& p : cloud.points) {
            std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", static_cast<double>(p.x),
                          static_cast<double>(p.y), static_cast<double>(p.z));
            out << line;
        }
    } else {
        std::vector<char> row(12);
        for (const Point& p : cloud.points) {
            detail::store_u32_le(std::bit_cast<std::uint32_t>(p.x), row.data());
            detail::store_u32_le(std::bit_cast<std::uint32_t>(p.y), row.data() + 4);
            detail::store_u32_le(std::bit_cast<std::uint32_t>(p.z), row.data() + 8);
            out.write(row.data(), 12);
        }
    }
    out.flush();
    if (!out)
        throw IoError("write_pcd: failed while writing '" + path + "'");
}

}  // namespace decim
