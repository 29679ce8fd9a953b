#include "higcn/params.hpp"

#include "higcn/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace higcn {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

// Guards against reading garbage headers as huge allocations.
constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) {
        throw IoError("unexpected end of binary stream");
    }
    return v;
}

}  // namespace

const Matrix& ParamStore::at(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) {
        throw ConfigError("unknown parameter '" + name + "'");
    }
    return it->second;
}

Matrix& ParamStore::at(const std::string& name) {
    const auto it = entries_.find(name);
    if (it == entries_.end()) {
        throw ConfigError("unknown parameter '" + name + "'");
    }
    return it->second;
}

std::size_t ParamStore::scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [name, m] : entries_) {
        n += m.size();
    }
    return n;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, m] : entries_) {
        out.push_back(name);
    }
    return out;
}

ParamStore ParamStore::zeros_like() const {
    ParamStore out;
    for (const auto& [name, m] : entries_) {
        out.set(name, Matrix(m.rows(), m.cols()));
    }
    return out;
}

void ParamStore::accumulate(const ParamStore& other) {
    for (const auto& [name, m] : other) {
        auto it = entries_.find(name);
        if (it == entries_.end()) {
            entries_.emplace(name, m);
        } else {
            if (!it->second.same_shape(m)) {
                throw ShapeError("accumulate: parameter '" + name + "' has shape " +
                                 it->second.shape_string() + " but got " + m.shape_string());
            }
            add_in_place(it->second, m);
        }
    }
}

void write_matrix(std::ostream& os, const Matrix& m) {
    write_u64(os, m.rows());
    write_u64(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data().data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix read_matrix(std::istream& is) {
    const auto rows = read_u64(is);
    const auto cols = read_u64(is);
    if (rows > kMaxEntries || cols > kMaxEntries || rows * cols > kMaxEntries) {
        throw IoError("matrix header " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " is implausible");
    }
    std::vector<double> data(rows * cols);
    is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!is) {
        throw IoError("truncated matrix payload");
    }
    return Matrix(rows, cols, std::move(data));
}

void save_params(const std::filesystem::path& path, const ParamStore& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    write_u64(os, params.size());
    for (const auto& [name, m] : params) {
        write_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_matrix(os, m);
    }
    if (!os) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

ParamStore load_params(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    ParamStore out;
    const auto count = read_u64(is);
    if (count > kMaxEntries) {
        throw IoError("parameter count " + std::to_string(count) + " is implausible");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len = read_u64(is);
        if (len > 4096) {
            throw IoError("parameter name length " + std::to_string(len) + " is implausible");
        }
        std::string name(len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(len));
        if (!is) {
            throw IoError("truncated parameter name");
        }
        out.set(name, read_matrix(is));
    }
    return out;
}

}  // namespace higcn
