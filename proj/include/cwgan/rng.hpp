#pragma once

#include <cstdint>
#include <vector>

#include "cwgan/matrix.hpp"

namespace cwgan {

// Deterministic counter-based random stream. Every draw is a pure function of
// (seed, stream, index), so sampled work can be partitioned across workers and
// the first k draws of a stream never depend on how many draws follow them
// (prefix property relied on by the sampled dual-gap evaluators).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    // Raw 64-bit word at position `index` of this stream.
    std::uint64_t word(std::uint64_t index) const noexcept;

    // Uniform double in (0, 1].
    double uniform(std::uint64_t index) const noexcept;

    // Standard normal via Box-Muller on two consecutive words.
    double gaussian(std::uint64_t index) const noexcept;

    // Unit vector of dimension dim, uniform on the sphere; sample `index` is
    // independent of any other index.
    std::vector<double> sphere_direction(std::uint64_t index, std::size_t dim) const;

    // Matrix of i.i.d. standard normal entries.
    DataMatrix gaussian_matrix(std::size_t rows, std::size_t cols) const;

    // Derive an independent child stream (for per-worker or per-run splitting).
    CounterRng split(std::uint64_t substream) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

// Random n×n orthogonal matrix from a seeded Gaussian draw followed by
// Gram-Schmidt with a positive-diagonal sign convention (deterministic).
DataMatrix random_orthogonal(std::uint64_t seed, std::size_t n);

}  // namespace cwgan
