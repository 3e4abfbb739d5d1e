#include "cwgan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cwgan/errors.hpp"

namespace cwgan {

namespace {

// Orthonormalize column j of m against columns [0, j) and normalize; used to
// complete the left factor where singular values vanish.
void fill_orthonormal_column(DataMatrix& m, std::size_t j) {
    const std::size_t n = m.rows();
    for (std::size_t axis = 0; axis < n; ++axis) {
        std::vector<double> v(n, 0.0);
        v[(j + axis) % n] = 1.0;
        for (std::size_t p = 0; p < m.cols(); ++p) {
            if (p == j) continue;
            const std::vector<double> qp = m.col(p);
            const double nq = norm2_squared(qp);
            if (nq < 0.5) continue;  // unfilled column
            const double proj = dot(qp, v);
            for (std::size_t i = 0; i < n; ++i) v[i] -= proj * qp[i];
        }
        const double nv = norm2(v);
        if (nv > 1e-6) {
            for (double& x : v) x /= nv;
            m.set_col(j, v);
            return;
        }
    }
    fail(ErrorKind::InvalidInput, "failed to complete orthonormal basis");
}

// One-sided Jacobi on a tall matrix (rows ≥ cols): rotates column pairs until
// mutually orthogonal; the rotations accumulate into V.
void one_sided_jacobi(DataMatrix& b, DataMatrix& v) {
    const std::size_t k = b.cols();
    const std::size_t m = b.rows();
    const int max_sweeps = 60;
    const double tol = 1e-15;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    alpha += bp * bp;
                    beta += bq * bq;
                    gamma += bp * bq;
                }
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    b(i, p) = c * bp - s * bq;
                    b(i, q) = s * bp + c * bq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
}

SvdResult svd_tall(const DataMatrix& a) {
    const std::size_t n = a.rows();
    const std::size_t d = a.cols();
    DataMatrix b = a;
    DataMatrix v = DataMatrix::identity(d);
    one_sided_jacobi(b, v);

    std::vector<double> sigma(d);
    for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += b(i, j) * b(i, j);
        sigma[j] = std::sqrt(acc);
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    SvdResult out;
    out.U = DataMatrix(n, d);
    out.V = DataMatrix(d, d);
    out.singular_values.resize(d);
    std::vector<std::size_t> degenerate;
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t src = order[j];
        out.singular_values[j] = sigma[src];
        out.V.set_col(j, v.col(src));
        if (sigma[src] > 1e-290) {
            std::vector<double> u = b.col(src);
            for (double& x : u) x /= sigma[src];
            out.U.set_col(j, u);
        } else {
            out.singular_values[j] = 0.0;
            degenerate.push_back(j);
        }
    }
    for (std::size_t j : degenerate) fill_orthonormal_column(out.U, j);
    return out;
}

}  // namespace

SvdResult svd(const DataMatrix& a) {
    require_finite(a, "svd");
    if (a.rows() == 0 || a.cols() == 0) fail(ErrorKind::InvalidInput, "svd: empty matrix");
    if (a.rows() >= a.cols()) return svd_tall(a);
    SvdResult t = svd_tall(a.transpose());
    SvdResult out;
    out.U = std::move(t.V);
    out.V = std::move(t.U);
    out.singular_values = std::move(t.singular_values);
    return out;
}

std::size_t matrix_rank(const DataMatrix& a) {
    const SvdResult s = svd(a);
    if (s.singular_values.empty() || s.singular_values[0] == 0.0) return 0;
    const double cutoff = kRankCutoff * s.singular_values[0] * s.singular_values[0];
    std::size_t r = 0;
    for (double sv : s.singular_values)
        if (sv * sv >= cutoff) ++r;
    return r;
}

double spectral_norm(const DataMatrix& a, double tol) {
    require_finite(a, "spectral_norm");
    if (tol <= 0.0) fail(ErrorKind::InvalidInput, "spectral_norm: tol must be positive");
    // Work on the smaller Gram matrix: eigenvalues are squared singular values.
    DataMatrix s = a.rows() >= a.cols() ? gram(a) : gram(a.transpose());
    const std::size_t d = s.rows();
    if (max_abs_entry(s) == 0.0) return 0.0;

    double best = 0.0;
    const std::size_t rounds = std::min<std::size_t>(d, 8);
    for (std::size_t round = 0; round < rounds; ++round) {
        // All-ones start; deterministic fallback to basis vectors if the
        // current start lies in the (deflated) null space.
        std::vector<double> vcur(d, 1.0 / std::sqrt(static_cast<double>(d)));
        double lambda = 0.0;
        bool live = false;
        for (std::size_t restart = 0; restart <= d; ++restart) {
            if (restart > 0) {
                std::fill(vcur.begin(), vcur.end(), 0.0);
                vcur[restart - 1] = 1.0;
            }
            double prev = -1.0;
            int stable = 0;
            live = false;
            for (int it = 0; it < 50000; ++it) {
                std::vector<double> w = matvec(s, vcur);
                const double nw = norm2(w);
                if (nw <= 1e-300) break;  // start in null space; restart
                for (double& x : w) x /= nw;
                const double ray = dot(w, matvec(s, w));
                vcur = std::move(w);
                live = true;
                if (prev >= 0.0 && std::abs(ray - prev) <= 0.1 * tol * std::max(ray, 1e-300)) {
                    if (++stable >= 3) {
                        lambda = ray;
                        break;
                    }
                } else {
                    stable = 0;
                }
                prev = ray;
                lambda = ray;
            }
            if (live) break;
        }
        if (!live) break;
        if (lambda <= best && round > 0) break;  // deflation found nothing larger
        best = std::max(best, lambda);
        // Deflate the converged direction and look again.
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) s(i, j) -= lambda * vcur[i] * vcur[j];
    }
    return std::sqrt(std::max(best, 0.0));
}

EigResult sym_eig(const DataMatrix& s_in) {
    require_finite(s_in, "sym_eig");
    if (s_in.rows() != s_in.cols()) fail(ErrorKind::InvalidInput, "sym_eig: matrix not square");
    const std::size_t d = s_in.rows();

    double asym = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            asym = std::max(asym, std::abs(s_in(i, j) - s_in(j, i)));
    const double scale = std::max(max_abs_entry(s_in), 1e-300);
    if (asym > 1e-10 * scale && asym > 1e-10)
        fail(ErrorKind::InvalidInput, "sym_eig: input asymmetric beyond tolerance");

    DataMatrix a(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = 0.5 * (s_in(i, j) + s_in(j, i));
    DataMatrix q = DataMatrix::identity(d);

    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= 1e-14 * scale) break;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t qq = p + 1; qq < d; ++qq) {
                const double apq = a(p, qq);
                if (std::abs(apq) <= 1e-300) continue;
                const double app = a(p, p), aqq = a(qq, qq);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = a(i, p), aiq = a(i, qq);
                    a(i, p) = c * aip - s * aiq;
                    a(i, qq) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < d; ++j) {
                    const double apj = a(p, j), aqj = a(qq, j);
                    a(p, j) = c * apj - s * aqj;
                    a(qq, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double qip = q(i, p), qiq = q(i, qq);
                    q(i, p) = c * qip - s * qiq;
                    q(i, qq) = s * qip + c * qiq;
                }
            }
        }
    }

    std::vector<double> lambda(d);
    for (std::size_t i = 0; i < d; ++i) lambda[i] = a(i, i);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return lambda[x] > lambda[y]; });

    EigResult out;
    out.eigenvalues.resize(d);
    out.eigenvectors = DataMatrix(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        out.eigenvalues[j] = lambda[order[j]];
        out.eigenvectors.set_col(j, q.col(order[j]));
    }
    return out;
}

DataMatrix pinv_sqrt(const DataMatrix& s, std::size_t k) {
    const EigResult eig = sym_eig(s);
    const std::size_t d = s.rows();
    const double lam_max = eig.eigenvalues.empty() ? 0.0 : std::max(eig.eigenvalues[0], 0.0);
    for (double lam : eig.eigenvalues)
        if (lam < -1e-8 * std::max(lam_max, 1.0))
            fail(ErrorKind::InvalidInput, "pinv_sqrt: matrix not positive semidefinite");
    std::size_t numerical_rank = 0;
    for (double lam : eig.eigenvalues)
        if (lam >= kRankCutoff * lam_max && lam > 0.0) ++numerical_rank;
    if (k > numerical_rank)
        fail(ErrorKind::RankDeficient, "pinv_sqrt: k = " + std::to_string(k) +
                                           " exceeds numerical rank " +
                                           std::to_string(numerical_rank));
    DataMatrix out(d, d);
    for (std::size_t t = 0; t < k; ++t) {
        const double inv_sqrt = 1.0 / std::sqrt(eig.eigenvalues[t]);
        const std::vector<double> qt = eig.eigenvectors.col(t);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) out(i, j) += inv_sqrt * qt[i] * qt[j];
    }
    return out;
}

}  // namespace cwgan
