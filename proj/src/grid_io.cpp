#include "msgd/grid_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace msgd {

namespace {

[[noreturn]] void malformed(const std::string& path, const std::string& why) {
    throw std::runtime_error("malformed grid file " + path + ": " + why);
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw std::runtime_error("cannot open grid file: " + path);
    return in;
}

}  // namespace

// =============================================================================
// CSV
// =============================================================================

GridField read_grid_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string header;
    if (!std::getline(in, header)) malformed(path, "missing header");

    dims_t dims;
    {
        std::stringstream ss(header);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t used = 0;
                const int m = std::stoi(tok, &used);
                while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
                    ++used;
                if (used != tok.size()) malformed(path, "bad header token '" + tok + "'");
                dims.push_back(m);
            } catch (const std::logic_error&) {
                malformed(path, "bad header token '" + tok + "'");
            }
        }
    }
    if (dims.empty()) malformed(path, "empty header");
    check_dims(dims);
    const std::size_t want = total_count(dims);

    std::vector<double> values;
    values.reserve(want);
    std::string line;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
                    ++used;
                if (used != tok.size()) malformed(path, "bad value '" + tok + "'");
                values.push_back(v);
            } catch (const std::logic_error&) {
                malformed(path, "bad value '" + tok + "'");
            }
        }
    }
    if (values.size() != want)
        malformed(path, "expected " + std::to_string(want) + " values, found " +
                            std::to_string(values.size()));
    return GridField::from_values(dims, std::move(values));
}

void write_grid_csv(const std::string& path, const GridField& grid) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write grid file: " + path);
    out << join_ints(grid.dims) << '\n';
    const std::size_t row = static_cast<std::size_t>(grid.dims.back());
    for (std::size_t i = 0; i < grid.values.size(); i += row) {
        std::string line;
        for (std::size_t j = 0; j < row; ++j) {
            if (j) line.push_back(',');
            line += dbl_str(grid.values[i + j]);
        }
        out << line << '\n';
    }
    if (!out) throw std::runtime_error("cannot write grid file: " + path);
}

// =============================================================================
// Binary
// =============================================================================

namespace {

constexpr char kMagic[4] = {'M', 'S', 'G', 'D'};

static_assert(sizeof(double) == 8, "binary grid format requires 8-byte doubles");

}  // namespace

GridField read_grid_binary(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        malformed(path, "bad magic");
    std::uint32_t d = 0;
    if (!in.read(reinterpret_cast<char*>(&d), sizeof d) || d == 0 || d > 64)
        malformed(path, "bad dimension count");
    dims_t dims(d);
    for (std::uint32_t k = 0; k < d; ++k) {
        std::uint32_t m = 0;
        if (!in.read(reinterpret_cast<char*>(&m), sizeof m) || m == 0)
            malformed(path, "bad axis size");
        dims[k] = static_cast<int>(m);
    }
    check_dims(dims);
    const std::size_t count = total_count(dims);
    std::vector<double> values(count);
    if (!in.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(count * sizeof(double))))
        malformed(path, "truncated values");
    char extra;
    if (in.read(&extra, 1)) malformed(path, "trailing bytes");
    return GridField::from_values(dims, std::move(values));
}

void write_grid_binary(const std::string& path, const GridField& grid) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write grid file: " + path);
    out.write(kMagic, 4);
    const std::uint32_t d = static_cast<std::uint32_t>(grid.dims.size());
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    for (int m : grid.dims) {
        const std::uint32_t mm = static_cast<std::uint32_t>(m);
        out.write(reinterpret_cast<const char*>(&mm), sizeof mm);
    }
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("cannot write grid file: " + path);
}

GridField read_grid_auto(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
        return read_grid_csv(path);
    return read_grid_binary(path);
}

}  // namespace msgd
