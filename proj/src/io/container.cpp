#include "gaat/io/container.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gaat/error.hpp"
#include "gaat/rng.hpp"

namespace gaat::io {

namespace {

constexpr std::string_view kMagic = "GAAT";

template <typename T>
void put(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw InputError("container is truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace

void ParamContainer::insert(std::string name, Item item) {
    if (items_.contains(name)) throw std::invalid_argument("duplicate container entry: " + name);
    names_.push_back(name);
    items_.emplace(std::move(name), std::move(item));
}

void ParamContainer::add_matrix(std::string name, Matrix value) {
    insert(std::move(name), Item{DType::f64, std::move(value), {}});
}

void ParamContainer::add_text(std::string name, std::string value) {
    insert(std::move(name), Item{DType::text, {}, std::move(value)});
}

bool ParamContainer::contains(std::string_view name) const { return items_.contains(std::string(name)); }

const ParamContainer::Item& ParamContainer::item(std::string_view name) const {
    const auto it = items_.find(std::string(name));
    if (it == items_.end()) throw InputError("container has no entry named " + std::string(name));
    return it->second;
}

ParamContainer::DType ParamContainer::dtype(std::string_view name) const { return item(name).dtype; }

const Matrix& ParamContainer::matrix(std::string_view name) const {
    const Item& it = item(name);
    if (it.dtype != DType::f64) throw InputError("entry " + std::string(name) + " is not numeric");
    return it.matrix;
}

const std::string& ParamContainer::text(std::string_view name) const {
    const Item& it = item(name);
    if (it.dtype != DType::text) throw InputError("entry " + std::string(name) + " is not text");
    return it.text;
}

std::string ParamContainer::serialize() const {
    std::string out(kMagic);
    put<std::uint16_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(names_.size()));
    for (const std::string& name : names_) {
        const Item& it = items_.at(name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put<std::uint8_t>(out, static_cast<std::uint8_t>(it.dtype));
        if (it.dtype == DType::f64) {
            put<std::uint8_t>(out, 2);
            put<std::uint64_t>(out, static_cast<std::uint64_t>(it.matrix.rows()));
            put<std::uint64_t>(out, static_cast<std::uint64_t>(it.matrix.cols()));
            for (Eigen::Index k = 0; k < it.matrix.size(); ++k) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(it.matrix.data()[k]));
        } else {
            put<std::uint8_t>(out, 1);
            put<std::uint64_t>(out, it.text.size());
            out += it.text;
        }
    }
    put<std::uint64_t>(out, fnv1a64(out));
    return out;
}

ParamContainer ParamContainer::parse(std::string_view bytes) {
    if (bytes.size() < kMagic.size() + 2 + 4 + 8) throw InputError("container is truncated");
    const std::string_view body = bytes.substr(0, bytes.size() - 8);
    Reader tail(bytes.substr(bytes.size() - 8));
    if (tail.get<std::uint64_t>() != fnv1a64(body)) throw InputError("container checksum mismatch");

    Reader r(body);
    if (r.bytes(kMagic.size()) != kMagic) throw InputError("not a GAAT container (bad magic)");
    const auto version = r.get<std::uint16_t>();
    if (version != kVersion) throw InputError("unsupported container version " + std::to_string(version));
    const auto count = r.get<std::uint32_t>();

    ParamContainer c;
    for (std::uint32_t e = 0; e < count; ++e) {
        const auto name_len = r.get<std::uint32_t>();
        std::string name(r.bytes(name_len));
        const auto tag = r.get<std::uint8_t>();
        const auto rank = r.get<std::uint8_t>();
        std::vector<std::uint64_t> dims(rank);
        for (auto& d : dims) d = r.get<std::uint64_t>();
        if (c.contains(name)) throw InputError("duplicate container entry: " + name);
        if (tag == static_cast<std::uint8_t>(DType::f64)) {
            if (rank < 1 || rank > 2) throw InputError("entry " + name + " has unsupported rank");
            const std::uint64_t rows = dims[0], cols = rank == 2 ? dims[1] : 1;
            if (cols != 0 && rows > r.remaining() / 8 / cols) throw InputError("container is truncated");
            Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = std::bit_cast<double>(r.get<std::uint64_t>());
            c.add_matrix(std::move(name), std::move(m));
        } else if (tag == static_cast<std::uint8_t>(DType::text)) {
            if (rank != 1) throw InputError("text entry " + name + " must have rank 1");
            c.add_text(std::move(name), std::string(r.bytes(dims[0])));
        } else {
            throw InputError("entry " + name + " has unknown dtype tag " + std::to_string(tag));
        }
    }
    if (r.remaining() != 0) throw InputError("trailing bytes after the last container entry");
    return c;
}

void ParamContainer::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    const std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("failed writing " + path.string());
}

ParamContainer ParamContainer::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace gaat::io
