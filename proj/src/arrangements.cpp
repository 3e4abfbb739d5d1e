#include "cwgan/arrangements.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>

#include "cwgan/errors.hpp"
#include "cwgan/numerics.hpp"
#include "cwgan/rng.hpp"

namespace cwgan {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Orthonormal basis of the row space of z (at most two vectors), from the
// right singular vectors with non-negligible singular value.
std::vector<std::vector<double>> row_space_basis(const DataMatrix& z, std::size_t rank) {
    const SvdResult s = svd(z);
    std::vector<std::vector<double>> basis;
    for (std::size_t k = 0; k < rank && k < s.singular_values.size(); ++k) {
        basis.push_back(s.V.col(k));
    }
    return basis;
}

// A unit vector orthogonal to every row of z (exists whenever rank < cols).
std::vector<double> null_space_vector(const DataMatrix& z,
                                      const std::vector<std::vector<double>>& basis) {
    const std::size_t d = z.cols();
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::vector<double> v(d, 0.0);
        v[axis] = 1.0;
        for (const auto& b : basis) {
            double coef = 0.0;
            for (std::size_t j = 0; j < d; ++j) coef += v[j] * b[j];
            for (std::size_t j = 0; j < d; ++j) v[j] -= coef * b[j];
        }
        double nrm = 0.0;
        for (double t : v) nrm += t * t;
        nrm = std::sqrt(nrm);
        if (nrm > 1e-8) {
            for (double& t : v) t /= nrm;
            return v;
        }
    }
    fail(ErrorKind::RankDeficient, "no null-space direction found");
}

struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
    double norm = 0.0;
};

// Exact enumeration of the sign patterns {1[p_i · v ≥ 0]} over directions v in
// the plane: the arrangement of lines {p_i · v = 0} cuts the circle into
// sectors, and the pattern is constant on each open sector.
struct SectorSweep {
    std::vector<std::vector<std::uint8_t>> patterns;
    std::vector<double> angles;  // witness angle per pattern
};

std::vector<std::uint8_t> bits_at_angle(const std::vector<PlanePoint>& pts, double theta) {
    const double vx = std::cos(theta);
    const double vy = std::sin(theta);
    std::vector<std::uint8_t> bits(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].norm == 0.0) {
            bits[i] = 1;  // zero row: 0 ≥ 0 holds for every direction
        } else {
            bits[i] = (pts[i].x * vx + pts[i].y * vy >= 0.0) ? 1 : 0;
        }
    }
    return bits;
}

// Smallest relative margin min_i |p_i · v| / ‖p_i‖ over nonzero points.
double angle_margin(const std::vector<PlanePoint>& pts, double theta) {
    const double vx = std::cos(theta);
    const double vy = std::sin(theta);
    double margin = 1.0;
    for (const auto& p : pts) {
        if (p.norm == 0.0) continue;
        margin = std::min(margin, std::abs(p.x * vx + p.y * vy) / p.norm);
    }
    return margin;
}

SectorSweep sweep_sectors(const std::vector<PlanePoint>& pts) {
    SectorSweep out;
    std::vector<double> bounds;
    for (const auto& p : pts) {
        if (p.norm == 0.0) continue;
        const double base = std::atan2(p.y, p.x);
        for (double shift : {1.5707963267948966, -1.5707963267948966}) {
            double a = std::fmod(base + shift, kTwoPi);
            if (a < 0.0) a += kTwoPi;
            bounds.push_back(a);
        }
    }
    if (bounds.empty()) {
        // Every point is zero: a single all-ones pattern, any direction works.
        out.patterns.push_back(std::vector<std::uint8_t>(pts.size(), 1));
        out.angles.push_back(0.0);
        return out;
    }
    std::sort(bounds.begin(), bounds.end());
    std::vector<double> uniq;
    for (double a : bounds) {
        if (uniq.empty() || a - uniq.back() > 1e-11) uniq.push_back(a);
    }
    if (uniq.size() > 1 && (uniq.front() + kTwoPi) - uniq.back() <= 1e-11) uniq.pop_back();

    for (std::size_t i = 0; i < uniq.size(); ++i) {
        const double lo = uniq[i];
        const double hi = (i + 1 < uniq.size()) ? uniq[i + 1] : uniq.front() + kTwoPi;
        double mid = 0.5 * (lo + hi);
        // Keep the witness strictly off every boundary line.
        if (angle_margin(pts, mid) < 1e-13) {
            const double width = hi - lo;
            for (double nudge : {1e-9, -1e-9, 0.25 * width, -0.25 * width}) {
                if (angle_margin(pts, mid + nudge) >= 1e-13) {
                    mid += nudge;
                    break;
                }
            }
        }
        out.patterns.push_back(bits_at_angle(pts, mid));
        out.angles.push_back(mid);
    }
    return out;
}

void add_pattern(std::map<std::vector<std::uint8_t>, SignPattern>& seen, SignPattern cand) {
    seen.emplace(cand.pattern, std::move(cand));
}

ArrangementSet sample_arrangements(const DataMatrix& z, bool with_bias, std::size_t budget,
                                   std::uint64_t seed) {
    const std::size_t d = z.cols();
    CounterRng rng(seed, 0x6172726E67u);  // arrangement sampling stream
    std::map<std::vector<std::uint8_t>, SignPattern> seen;
    for (std::size_t i = 0; i < budget; ++i) {
        std::vector<double> dir = rng.sphere_direction(i, with_bias ? d + 1 : d);
        SignPattern sp;
        sp.has_bias = with_bias;
        if (with_bias) {
            sp.bias = dir.back();
            dir.pop_back();
        }
        sp.witness = dir;
        sp.pattern = pattern_of_direction(z, sp.witness, sp.bias);
        add_pattern(seen, std::move(sp));
    }
    ArrangementSet out;
    out.complete = false;
    for (auto& kv : seen) out.patterns.push_back(std::move(kv.second));
    return out;
}

}  // namespace

std::vector<std::uint8_t> pattern_of_direction(const DataMatrix& z,
                                               const std::vector<double>& u, double bias) {
    if (u.size() != z.cols()) fail(ErrorKind::DimensionMismatch, "direction length vs columns");
    std::vector<std::uint8_t> bits(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double s = bias;
        for (std::size_t j = 0; j < z.cols(); ++j) s += z(i, j) * u[j];
        bits[i] = (s >= 0.0) ? 1 : 0;
    }
    return bits;
}

bool cone_membership(const std::vector<double>& u, const SignPattern& pattern,
                     const DataMatrix& z, double bias) {
    if (u.size() != z.cols()) fail(ErrorKind::DimensionMismatch, "direction length vs columns");
    if (pattern.pattern.size() != z.rows()) {
        fail(ErrorKind::DimensionMismatch, "pattern length vs rows");
    }
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double s = bias;
        for (std::size_t j = 0; j < z.cols(); ++j) s += z(i, j) * u[j];
        const double signed_val = (pattern.pattern[i] ? 1.0 : -1.0) * s;
        if (signed_val < -1e-10) return false;
    }
    return true;
}

ArrangementSet enumerate_arrangements(const DataMatrix& z, bool with_bias, std::size_t budget,
                                      std::uint64_t seed) {
    require_finite(z, "arrangement data");
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();
    const std::size_t rank = matrix_rank(z);

    const bool exact = with_bias ? (rank <= 1) : (rank <= 2);
    if (!exact) {
        if (budget == 0) fail(ErrorKind::InvalidInput, "sampling budget must be positive");
        return sample_arrangements(z, with_bias, budget, seed);
    }

    const auto basis = row_space_basis(z, rank);
    // Project rows into a plane where the sweep is exact. Without bias the
    // plane is the row space itself (padded if rank ≤ 1); with bias the second
    // coordinate carries the constant offset.
    std::vector<PlanePoint> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        double px = 0.0;
        double py = 0.0;
        if (!basis.empty()) {
            for (std::size_t j = 0; j < d; ++j) px += z(i, j) * basis[0][j];
        }
        if (with_bias) {
            py = 1.0;
        } else if (basis.size() > 1) {
            for (std::size_t j = 0; j < d; ++j) py += z(i, j) * basis[1][j];
        }
        pts[i] = {px, py, std::sqrt(px * px + py * py)};
    }

    const SectorSweep sweep = sweep_sectors(pts);
    std::map<std::vector<std::uint8_t>, SignPattern> seen;
    if (rank < d) {
        // Directions orthogonal to every row activate all units; such a
        // direction exists exactly when the row space does not fill R^d.
        // Inserted first so the all-ones pattern always carries a nonzero
        // witness even when the sweep plane degenerates.
        SignPattern sp;
        sp.pattern.assign(n, 1);
        sp.witness = null_space_vector(z, basis);
        sp.has_bias = with_bias;
        sp.bias = 0.0;
        add_pattern(seen, std::move(sp));
    }
    for (std::size_t s = 0; s < sweep.patterns.size(); ++s) {
        const double c = std::cos(sweep.angles[s]);
        const double sn = std::sin(sweep.angles[s]);
        SignPattern sp;
        sp.pattern = sweep.patterns[s];
        sp.has_bias = with_bias;
        sp.witness.assign(d, 0.0);
        if (!basis.empty()) {
            for (std::size_t j = 0; j < d; ++j) sp.witness[j] = c * basis[0][j];
        }
        if (with_bias) {
            sp.bias = sn;
        } else if (basis.size() > 1) {
            for (std::size_t j = 0; j < d; ++j) sp.witness[j] += sn * basis[1][j];
        }
        add_pattern(seen, std::move(sp));
    }

    ArrangementSet out;
    out.complete = true;
    for (auto& kv : seen) out.patterns.push_back(std::move(kv.second));
    return out;
}

}  // namespace cwgan
