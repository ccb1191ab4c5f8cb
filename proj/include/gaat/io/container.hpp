#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gaat/matrix.hpp"

namespace gaat::io {

/// Named tensor file.
///
/// Layout (little-endian): "GAAT", u16 version, u32 entry count, then per entry
/// u32 name length, name bytes, u8 dtype (1 = f64, 2 = UTF-8 text), u8 rank,
/// rank x u64 dims, payload. A trailing u64 FNV-1a checksum covers every preceding byte.
class ParamContainer {
public:
    static constexpr std::uint16_t kVersion = 1;

    enum class DType : std::uint8_t { f64 = 1, text = 2 };

    /// Both throw std::invalid_argument on a duplicate name.
    void add_matrix(std::string name, Matrix value);
    void add_text(std::string name, std::string value);

    bool contains(std::string_view name) const;
    DType dtype(std::string_view name) const;
    const Matrix& matrix(std::string_view name) const;
    const std::string& text(std::string_view name) const;
    /// Entry names in file order.
    const std::vector<std::string>& names() const { return names_; }

    std::string serialize() const;
    /// Throws InputError on bad magic, version, checksum, truncation or duplicate names.
    static ParamContainer parse(std::string_view bytes);

    void save(const std::filesystem::path& path) const;
    static ParamContainer load(const std::filesystem::path& path);

private:
    struct Item {
        DType dtype = DType::f64;
        Matrix matrix;
        std::string text;
    };
    const Item& item(std::string_view name) const;
    void insert(std::string name, Item item);

    std::vector<std::string> names_;
    std::unordered_map<std::string, Item> items_;
};

}  // namespace gaat::io
