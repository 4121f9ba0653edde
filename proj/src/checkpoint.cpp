#include "adams/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "adams/io.hpp"

namespace adams {

namespace {

constexpr char kMagic[4] = {'A', 'O', 'P', 'T'};

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                     std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
        if (pos_ + sizeof(U) > bytes_.size()) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(U);
        return std::bit_cast<T>(bits);
    }

    bool at_end() const noexcept { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> TensorArchive::serialize() const {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint8_t>(out, kind);
    put<std::uint64_t>(out, step);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape().size()));
        for (auto d : t.shape()) put<std::uint64_t>(out, d);
    }
    for (const auto& t : tensors) {
        for (double x : t.data()) put<double>(out, x);
    }
    return out;
}

TensorArchive TensorArchive::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw CheckpointError("bad checkpoint magic");
    Reader in(bytes.subspan(4));
    auto version = in.get<std::uint32_t>();
    if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    TensorArchive archive;
    archive.kind = in.get<std::uint8_t>();
    archive.step = in.get<std::uint64_t>();
    auto count = in.get<std::uint32_t>();
    std::vector<Shape> shapes(count);
    for (auto& shape : shapes) {
        auto rank = in.get<std::uint32_t>();
        if (rank == 0 || rank > 16) throw CheckpointError("invalid tensor rank " + std::to_string(rank));
        shape.resize(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(in.get<std::uint64_t>());
    }
    for (auto& shape : shapes) {
        std::size_t n = shape_size(shape);
        if (n > bytes.size() / 8) throw CheckpointError("tensor larger than checkpoint payload");
        std::vector<double> data(n);
        for (auto& x : data) x = in.get<double>();
        archive.tensors.emplace_back(std::move(shape), std::move(data));
    }
    if (!in.at_end()) throw CheckpointError("trailing bytes after checkpoint payload");
    return archive;
}

void TensorArchive::save(const std::filesystem::path& path) const {
    auto bytes = serialize();
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
    std::string raw = read_file(path);
    return deserialize(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

TensorArchive archive_optimizer(const Optimizer& opt) {
    TensorArchive a;
    a.kind = static_cast<std::uint8_t>(opt.kind());
    a.step = static_cast<std::uint64_t>(opt.step_count());
    a.tensors = opt.state_tensors();
    return a;
}

void restore_optimizer(Optimizer& opt, const TensorArchive& archive) {
    if (archive.kind != static_cast<std::uint8_t>(opt.kind())) {
        throw CheckpointError("checkpoint holds optimizer kind " + std::to_string(archive.kind) + ", expected " +
                              std::string(to_string(opt.kind())));
    }
    opt.restore(static_cast<std::int64_t>(archive.step), archive.tensors);
}

}  // namespace adams
