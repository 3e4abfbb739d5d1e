#include "cwgan/rng.hpp"

#include <cmath>

#include "cwgan/errors.hpp"

namespace cwgan {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
    // Two scrambling rounds over a combined key; enough diffusion that nearby
    // (seed, stream, index) triples produce uncorrelated words.
    std::uint64_t h = splitmix64(a ^ (b * 0xD1342543DE82EF95ULL));
    h = splitmix64(h ^ (c * 0x2545F4914F6CDD1DULL));
    return h;
}

}  // namespace

std::uint64_t CounterRng::word(std::uint64_t index) const noexcept {
    return mix3(seed_, stream_, index);
}

double CounterRng::uniform(std::uint64_t index) const noexcept {
    // Top 53 bits mapped to (0, 1]; never returns 0 so log() is safe.
    const std::uint64_t bits = word(index) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t index) const noexcept {
    const double u1 = uniform(2 * index);
    const double u2 = uniform(2 * index + 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

std::vector<double> CounterRng::sphere_direction(std::uint64_t index, std::size_t dim) const {
    if (dim == 0) fail(ErrorKind::InvalidInput, "sphere_direction: dim must be positive");
    const CounterRng sub = split(0x5D1E9 ^ index);
    std::vector<double> v(dim);
    while (true) {
        for (std::size_t j = 0; j < dim; ++j) v[j] = sub.gaussian(j);
        const double n = norm2(v);
        if (n > 1e-12) {
            for (double& x : v) x /= n;
            return v;
        }
        // Astronomically unlikely; fall back to a fixed axis for determinism.
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = 1.0;
        return v;
    }
}

DataMatrix CounterRng::gaussian_matrix(std::size_t rows, std::size_t cols) const {
    DataMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = gaussian(i * cols + j);
    return m;
}

CounterRng CounterRng::split(std::uint64_t substream) const noexcept {
    return CounterRng(splitmix64(seed_ ^ (substream * kGolden)), splitmix64(stream_ + substream));
}

DataMatrix random_orthogonal(std::uint64_t seed, std::size_t n) {
    const CounterRng rng(seed, /*stream=*/0x0E7A0);
    DataMatrix a = rng.gaussian_matrix(n, n);
    // Modified Gram-Schmidt on columns with positive-diagonal convention.
    DataMatrix q(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> v = a.col(j);
        for (std::size_t p = 0; p < j; ++p) {
            const std::vector<double> qp = q.col(p);
            const double proj = dot(qp, v);
            for (std::size_t i = 0; i < n; ++i) v[i] -= proj * qp[i];
        }
        double nv = norm2(v);
        if (nv < 1e-12) {
            // Degenerate draw: substitute the j-th axis re-orthogonalized.
            std::fill(v.begin(), v.end(), 0.0);
            v[j] = 1.0;
            for (std::size_t p = 0; p < j; ++p) {
                const std::vector<double> qp = q.col(p);
                const double proj = dot(qp, v);
                for (std::size_t i = 0; i < n; ++i) v[i] -= proj * qp[i];
            }
            nv = norm2(v);
        }
        const double sign = v[j] >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) v[i] *= sign / nv;
        q.set_col(j, v);
    }
    return q;
}

}  // namespace cwgan
