#pragma once

#include "higcn/matrix.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace higcn {

// Named matrices in deterministic (lexicographic) order. Used both for the
// trainable parameter registry and for gradients keyed the same way.
class ParamStore {
public:
    using Map = std::map<std::string, Matrix>;

    void set(const std::string& name, Matrix value) { entries_[name] = std::move(value); }
    bool contains(const std::string& name) const { return entries_.count(name) != 0; }
    const Matrix& at(const std::string& name) const;
    Matrix& at(const std::string& name);
    void erase(const std::string& name) { entries_.erase(name); }

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t scalar_count() const noexcept;
    std::vector<std::string> names() const;

    Map::const_iterator begin() const noexcept { return entries_.begin(); }
    Map::const_iterator end() const noexcept { return entries_.end(); }
    Map::iterator begin() noexcept { return entries_.begin(); }
    Map::iterator end() noexcept { return entries_.end(); }

    // Same names and shapes, all zeros.
    ParamStore zeros_like() const;
    // Adds `other` entry-wise; names missing here are inserted.
    void accumulate(const ParamStore& other);

    bool operator==(const ParamStore& other) const = default;

private:
    Map entries_;
};

// Binary matrix block: u64 rows, u64 cols, rows*cols f64, all little-endian.
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);

// Parameter file: u64 count, then per entry u64 name length, name bytes, matrix block.
void save_params(const std::filesystem::path& path, const ParamStore& params);
ParamStore load_params(const std::filesystem::path& path);

}  // namespace higcn
