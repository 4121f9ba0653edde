#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "adams/optimizer.hpp"
#include "adams/tensor.hpp"

namespace adams {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary tensor container, little-endian:
///   "AOPT" | version u32 | kind u8 | step u64 | count u32 |
///   per tensor: rank u32, dims u64[rank] | then every tensor's f64 data in order.
/// kind 0 holds model parameters; other values are OptimizerKind.
struct TensorArchive {
    static constexpr std::uint32_t kVersion = 1;
    static constexpr std::uint8_t kModelKind = 0;

    std::uint8_t kind = kModelKind;
    std::uint64_t step = 0;
    std::vector<Tensor> tensors;

    std::vector<std::uint8_t> serialize() const;
    static TensorArchive deserialize(std::span<const std::uint8_t> bytes);

    void save(const std::filesystem::path& path) const;
    static TensorArchive load(const std::filesystem::path& path);
};

TensorArchive archive_optimizer(const Optimizer& opt);
/// Loads state into an optimizer constructed with the same kind, params and partition.
void restore_optimizer(Optimizer& opt, const TensorArchive& archive);

}  // namespace adams
