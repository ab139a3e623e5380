#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "mpdr/tensor.hpp"

namespace mpdr {

/// FNV-1a, 64-bit. Used for parameter checksums and config hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Checksum over shapes and raw little-endian value bytes of a tensor list.
/// Bit-identical parameters give identical checksums.
inline std::uint64_t tensor_checksum(std::span<const Tensor> tensors) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Tensor& t : tensors) {
        for (std::size_t d : t.shape()) {
            std::uint64_t v = d;
            h = fnv1a64(&v, sizeof v, h);
        }
        for (std::size_t i = 0; i < t.numel(); ++i) {
            double x = t[i];
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            h = fnv1a64(&bits, sizeof bits, h);
        }
    }
    return h;
}

} // namespace mpdr
