#pragma once

// Snapshot serialization.
//
// Binary (little-endian throughout):
//
//   offset  size  field
//   0       4     magic "PGRN"
//   4       1     version (= 1)
//   5       4     n_points    (uint32)
//   9       4     components  (uint32)
//   13      8     spacing     (IEEE-754 binary64)
//   21      8     time        (IEEE-754 binary64)
//   29      8*n*m values, point-major (binary64)
//
// CSV: header "x,u0[,u1...]" preceded by a "# time=<t>" comment line; one row
// per grid point, every real written with 17 significant digits.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfrd/grid.hpp"

namespace pfrd {

constexpr std::array<char, 4> kSnapshotMagic{'P', 'G', 'R', 'N'};
constexpr std::uint8_t kSnapshotVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_f64(std::ostream& os, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) throw std::runtime_error("truncated snapshot");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

}  // namespace detail

inline void write_binary(std::ostream& os, const Field& f) {
    const GridSpec& g = f.grid();
    if (g.n_points() > std::numeric_limits<std::uint32_t>::max() ||
        g.components() > std::numeric_limits<std::uint32_t>::max())
        throw std::length_error("field too large for snapshot format");
    os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
    os.put(static_cast<char>(kSnapshotVersion));
    detail::put_u32(os, static_cast<std::uint32_t>(g.n_points()));
    detail::put_u32(os, static_cast<std::uint32_t>(g.components()));
    detail::put_f64(os, g.spacing());
    detail::put_f64(os, f.time());
    for (double v : f.values()) detail::put_f64(os, v);
}

inline Field read_binary(std::istream& is) {
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kSnapshotMagic) throw std::runtime_error("not a PGRN snapshot");
    const auto version = static_cast<std::uint8_t>(detail::get_le(is, 1));
    if (version != kSnapshotVersion) throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
    const auto n = static_cast<std::size_t>(detail::get_le(is, 4));
    const auto m = static_cast<std::size_t>(detail::get_le(is, 4));
    const double spacing = std::bit_cast<double>(detail::get_le(is, 8));
    const double time = std::bit_cast<double>(detail::get_le(is, 8));
    const GridSpec g = GridSpec::from_spacing(n, spacing, m);
    std::vector<double> values(g.size());
    for (double& v : values) v = std::bit_cast<double>(detail::get_le(is, 8));
    return Field(g, time, std::move(values));
}

inline std::string to_binary(const Field& f) {
    std::ostringstream os(std::ios::binary);
    write_binary(os, f);
    return os.str();
}

inline Field from_binary(const std::string& bytes) {
    std::istringstream is(bytes, std::ios::binary);
    return read_binary(is);
}

inline void write_csv(std::ostream& os, const Field& f) {
    const std::size_t m = f.grid().components();
    os << std::setprecision(17);
    os << "# time=" << f.time() << "\n";
    os << "x";
    for (std::size_t c = 0; c < m; ++c) os << ",u" << c;
    os << "\n";
    for (std::size_t k = 0; k < f.grid().n_points(); ++k) {
        os << f.grid().x(k);
        for (std::size_t c = 0; c < m; ++c) os << "," << f(k, c);
        os << "\n";
    }
}

/// Reads a CSV written by write_csv back onto a known grid.
inline Field read_csv(std::istream& is, const GridSpec& grid) {
    std::string line;
    double time = 0.0;
    if (!std::getline(is, line) || line.rfind("# time=", 0) != 0) throw std::runtime_error("missing time line");
    time = std::stod(line.substr(7));
    if (!std::getline(is, line)) throw std::runtime_error("missing header");
    std::vector<double> values;
    values.reserve(grid.size());
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // x
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
            ++cols;
        }
        if (cols != grid.components()) throw std::runtime_error("column count mismatch on row " + std::to_string(rows));
        ++rows;
    }
    if (rows != grid.n_points()) throw std::runtime_error("row count mismatch");
    return Field(grid, time, std::move(values));
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
template <typename Writer>
void write_atomically(const std::filesystem::path& path, Writer&& writer, bool binary = false) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string());
        writer(os);
        os.flush();
        if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace pfrd
