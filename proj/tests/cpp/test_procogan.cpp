#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cwgan/errors.hpp"
#include "cwgan/matrix.hpp"
#include "cwgan/numerics.hpp"
#include "cwgan/procogan.hpp"
#include "cwgan/rng.hpp"
#include "cwgan/solvers.hpp"

using namespace cwgan;

namespace {

template <typename Fn>
std::optional<ErrorKind> thrown_kind(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

// Deterministic stack of soft blob images: one row per sample, planar layout.
DataMatrix blob_images(std::size_t count, const ImageShape& shape, std::uint64_t seed) {
    const CounterRng rng(seed, 0xB10B);
    DataMatrix out(count, shape.flat_size(), 0.0);
    const double h = static_cast<double>(shape.height);
    const double w = static_cast<double>(shape.width);
    for (std::size_t n = 0; n < count; ++n) {
        const CounterRng draw = rng.split(n);
        const double cr = draw.uniform(0) * (h - 1.0);
        const double cc = draw.uniform(1) * (w - 1.0);
        const double spread = 0.6 + 1.8 * draw.uniform(2);
        for (std::size_t ch = 0; ch < shape.channels; ++ch) {
            const double amp = 40.0 + 160.0 * draw.uniform(3 + ch);
            for (std::size_t r = 0; r < shape.height; ++r) {
                for (std::size_t c = 0; c < shape.width; ++c) {
                    const double dr = static_cast<double>(r) - cr;
                    const double dc = static_cast<double>(c) - cc;
                    const double v =
                        amp * std::exp(-(dr * dr + dc * dc) / (2.0 * spread * spread));
                    out(n, ch * shape.pixels_per_channel() + r * shape.width + c) =
                        v + 2.0 * draw.gaussian(100 + ch * 64 + r * 8 + c);
                }
            }
        }
    }
    return out;
}

DataMatrix centered_copy(const DataMatrix& a) {
    DataMatrix out = a;
    const std::vector<double> mean = column_means(a);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) -= mean[j];
    }
    return out;
}

std::vector<double> squared_singular_values(const DataMatrix& x, std::size_t count) {
    const SvdResult s = svd(x);
    std::vector<double> out(count, 0.0);
    for (std::size_t i = 0; i < s.singular_values.size() && i < count; ++i) {
        out[i] = s.singular_values[i] * s.singular_values[i];
    }
    return out;
}

}  // namespace

TEST_CASE("downsample averages blocks and validates its inputs") {
    const ImageShape shape{4, 4, 1};
    DataMatrix constant(3, shape.flat_size(), 7.25);
    const DataMatrix down = downsample(constant, shape, 2);
    CHECK(down.rows() == 3);
    CHECK(down.cols() == 4);
    for (std::size_t i = 0; i < down.size(); ++i) {
        CHECK(down.data()[i] == doctest::Approx(7.25).epsilon(1e-15));
    }

    const DataMatrix same = downsample(constant, shape, 1);
    CHECK(max_abs_entry(same - constant) == 0.0);

    // 0/1 checkerboard pools to exactly one half everywhere.
    DataMatrix board(1, shape.flat_size(), 0.0);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            board(0, r * 4 + c) = static_cast<double>((r + c) % 2);
        }
    }
    const DataMatrix half = downsample(board, shape, 2);
    for (std::size_t i = 0; i < half.size(); ++i) {
        CHECK(half.data()[i] == doctest::Approx(0.5).epsilon(1e-15));
    }

    CHECK(thrown_kind([&] { downsample(constant, shape, 3); }) == ErrorKind::InvalidInput);
    CHECK(thrown_kind([&] { downsample(constant, shape, 8); }) == ErrorKind::InvalidInput);
    CHECK(thrown_kind([&] { downsample(constant, ImageShape{4, 3, 1}, 2); }) ==
          ErrorKind::DimensionMismatch);
}

TEST_CASE("upsample replicates pixels and inverts through pooling") {
    const ImageShape shape{2, 2, 3};
    DataMatrix constant(2, shape.flat_size(), -1.5);
    const DataMatrix up = upsample(constant, shape, 2);
    CHECK(up.cols() == 4 * shape.flat_size());
    for (std::size_t i = 0; i < up.size(); ++i) {
        CHECK(up.data()[i] == doctest::Approx(-1.5).epsilon(1e-15));
    }

    // One bright pixel becomes a 2x2 block in the same channel.
    DataMatrix spot(1, shape.flat_size(), 0.0);
    spot(0, 4 + 1 * 2 + 0) = 9.0;  // channel 1, row 1, col 0
    const DataMatrix block = upsample(spot, shape, 2);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) {
                const double v = block(0, ch * 16 + r * 4 + c);
                const bool lit = ch == 1 && (r == 2 || r == 3) && (c == 0 || c == 1);
                CHECK(v == (lit ? 9.0 : 0.0));
            }
        }
    }

    // Round trip: pooling replicated blocks recovers the original exactly.
    const DataMatrix any = CounterRng(5).gaussian_matrix(4, shape.flat_size());
    const DataMatrix round = downsample(upsample(any, shape, 2), ImageShape{4, 4, 3}, 2);
    CHECK(max_abs_entry(round - any) < 1e-15);
}

TEST_CASE("mixer overload keeps the output covariance while rotating weights") {
    const DataMatrix z = CounterRng(71).gaussian_matrix(30, 8);
    const DataMatrix x = CounterRng(72).gaussian_matrix(25, 5);
    const double beta = beta_for_rank(x, 3);
    REQUIRE(thresholded_rank(x, beta) == 3);

    const DataMatrix w_id = closed_form_linear_weights(z, x, beta);
    const DataMatrix mixer = random_orthogonal(99, 3);
    const DataMatrix w_mix = closed_form_linear_weights(z, x, beta, mixer);
    CHECK(max_abs_entry(w_id - w_mix) > 1e-3);

    const DataMatrix cov_id = gram(matmul(z, w_id));
    const DataMatrix cov_mix = gram(matmul(z, w_mix));
    CHECK(max_abs_entry(cov_id - cov_mix) < 1e-8);

    CHECK(thrown_kind([&] {
              closed_form_linear_weights(z, x, beta, random_orthogonal(1, 2));
          }) == ErrorKind::DimensionMismatch);
    DataMatrix scaled = DataMatrix::identity(3);
    scaled(0, 0) = 2.0;
    CHECK(thrown_kind([&] { closed_form_linear_weights(z, x, beta, scaled); }) ==
          ErrorKind::InvalidInput);
}

TEST_CASE("train_stage certifies feasibility and reproduces the shrunk spectrum") {
    // Toy four-image dataset at 2x2.
    const DataMatrix x = centered_copy(blob_images(4, ImageShape{2, 2, 1}, 3));
    const DataMatrix z = CounterRng(8).gaussian_matrix(6, 4);
    const double beta = 0.5 * squared_singular_values(x, 1)[0];
    const StageTraining st = train_stage(z, x, beta);
    CHECK(st.report.gap_value <= beta + 1e-8);
    CHECK(st.report.margin >= -1e-8);

    // Output second-moment eigenvalues equal the thresholded data spectrum.
    const DataMatrix out = matmul(z, st.weights);
    const EigResult eig = sym_eig(gram(out));
    const std::vector<double> sigma2 = squared_singular_values(x, x.cols());
    const double scale = std::max(1.0, sigma2[0]);
    for (std::size_t i = 0; i < x.cols(); ++i) {
        const double expect = std::max(0.0, sigma2[i] - beta);
        CHECK(std::abs(eig.eigenvalues[i] - expect) <= 1e-6 * scale);
    }

    // A budget above the top squared singular value zeroes the stage.
    const StageTraining flat = train_stage(z, x, sigma2[0] * 1.01);
    CHECK(max_abs_entry(flat.weights) == 0.0);
    CHECK(flat.report.gap_value <= sigma2[0] * 1.01 + 1e-8);
}

TEST_CASE("beta_for_rank hits each truncation level") {
    const DataMatrix x = CounterRng(91).gaussian_matrix(20, 6);
    for (std::size_t keep = 0; keep <= 6; ++keep) {
        const double beta = beta_for_rank(x, keep);
        CHECK(thresholded_rank(x, beta) == keep);
    }
    CHECK(thrown_kind([&] { beta_for_rank(x, 2, 0.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("single-stage pipeline equals a direct stage solve") {
    const ImageShape shape{2, 2, 1};
    const DataMatrix data = blob_images(12, shape, 17);

    PipelineConfig cfg;
    cfg.stages = {{shape, 0.0}};
    const DataMatrix centered = centered_copy(data);
    cfg.stages[0].beta_d = beta_for_rank(centered, 2);
    cfg.latent_dim = 5;
    cfg.sample_count = 9;
    cfg.seed = 42;
    cfg.mixers = {StageMixer::Identity};

    const TrainedPipeline pipe = run_pipeline(cfg, data);
    REQUIRE(pipe.stage_weights.size() == 1);
    const StageTraining direct = train_stage(pipe.stage1_latent, centered, cfg.stages[0].beta_d);
    CHECK(max_abs_entry(pipe.stage_weights[0] - direct.weights) == 0.0);
    CHECK(pipe.stage_reports[0].gap_value ==
          doctest::Approx(direct.report.gap_value).epsilon(1e-12));

    // The latent is column-centered exactly.
    for (double s : column_sums(pipe.stage1_latent)) {
        CHECK(std::abs(s) < 1e-9);
    }
}

TEST_CASE("three-stage pipeline is feasible, deterministic, and sharper than stage one") {
    const ImageShape full{8, 8, 1};
    const DataMatrix data = blob_images(40, full, 23);
    const DataMatrix centered = centered_copy(data);

    PipelineConfig cfg;
    cfg.stages = {{ImageShape{2, 2, 1}, 0.0},
                  {ImageShape{4, 4, 1}, 0.0},
                  {ImageShape{8, 8, 1}, 0.0}};
    cfg.stages[0].beta_d = beta_for_rank(downsample(centered, full, 4), 3);
    cfg.stages[1].beta_d = beta_for_rank(downsample(centered, full, 2), 3);
    cfg.stages[2].beta_d = beta_for_rank(centered, 3);
    cfg.latent_dim = 16;
    cfg.sample_count = 60;
    cfg.seed = 7;

    const TrainedPipeline pipe = run_pipeline(cfg, data);
    REQUIRE(pipe.stage_outputs.size() == 3);

    // Per-stage feasibility invariant.
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(pipe.stage_reports[i].gap_value <= cfg.stages[i].beta_d + 1e-6);
    }

    // Determinism: identical config reruns bit-identically.
    const TrainedPipeline again = run_pipeline(cfg, data);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(max_abs_entry(pipe.stage_weights[i] - again.stage_weights[i]) == 0.0);
    }

    // Restored images carry the data's exact column means.
    const DataMatrix shown = pipe.final_images();
    const std::vector<double> shown_mean = column_means(shown);
    const std::vector<double> data_mean = column_means(data);
    for (std::size_t j = 0; j < shown_mean.size(); ++j) {
        CHECK(std::abs(shown_mean[j] - data_mean[j]) < 1e-8);
    }

    // The final stage sits closer to the full-resolution data than the
    // blocky stage-one output lifted to the same resolution.
    const double d_final = covariance_spectral_distance(pipe.stage_outputs[2], centered);
    const double d_first = covariance_spectral_distance(
        upsample(pipe.stage_outputs[0], cfg.stages[0].resolution, 4), centered);
    CHECK(d_final < d_first);

    // Per-stage covariance spectrum matches the thresholded data spectrum.
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t shrink = std::size_t{1} << (2 - i);
        const DataMatrix stage_data = downsample(centered, full, shrink);
        const std::vector<double> sigma2 =
            squared_singular_values(stage_data, stage_data.cols());
        const EigResult eig = sym_eig(gram(pipe.stage_outputs[i]));
        const double scale = std::max(1.0, sigma2[0]);
        for (std::size_t j = 0; j < stage_data.cols(); ++j) {
            const double expect = std::max(0.0, sigma2[j] - cfg.stages[i].beta_d);
            CHECK(std::abs(eig.eigenvalues[j] - expect) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("larger final budget never increases the output covariance trace") {
    const ImageShape full{4, 4, 1};
    const DataMatrix data = blob_images(25, full, 31);

    PipelineConfig cfg;
    cfg.stages = {{ImageShape{2, 2, 1}, 0.0}, {full, 0.0}};
    const DataMatrix centered = centered_copy(data);
    cfg.stages[0].beta_d = beta_for_rank(downsample(centered, full, 2), 3);
    cfg.stages[1].beta_d = beta_for_rank(centered, 3);
    cfg.latent_dim = 12;
    cfg.sample_count = 40;
    cfg.seed = 11;

    PipelineConfig wide = cfg;
    wide.stages[1].beta_d = cfg.stages[1].beta_d * 6.0;

    const TrainedPipeline base = run_pipeline(cfg, data);
    const TrainedPipeline damped = run_pipeline(wide, data);
    double trace_base = 0.0, trace_damped = 0.0;
    const DataMatrix gb = gram(base.stage_outputs[1]);
    const DataMatrix gd = gram(damped.stage_outputs[1]);
    for (std::size_t j = 0; j < gb.rows(); ++j) {
        trace_base += gb(j, j);
        trace_damped += gd(j, j);
    }
    CHECK(trace_damped <= trace_base + 1e-9);
}

TEST_CASE("pipeline errors carry the failing stage index") {
    const ImageShape full{4, 4, 1};
    const DataMatrix data = blob_images(10, full, 57);

    PipelineConfig cfg;
    cfg.stages = {{ImageShape{2, 2, 1}, 0.0}, {full, 0.0}};
    const DataMatrix centered = centered_copy(data);
    // Stage 1 keeps nothing, so stage 2 receives a rank-zero latent but still
    // demands modes.
    cfg.stages[0].beta_d = beta_for_rank(downsample(centered, full, 2), 0);
    cfg.stages[1].beta_d = beta_for_rank(centered, 2);
    cfg.latent_dim = 8;
    cfg.sample_count = 20;
    cfg.seed = 3;

    bool threw = false;
    try {
        run_pipeline(cfg, data);
    } catch (const Error& e) {
        threw = true;
        CHECK(e.kind() == ErrorKind::RankDeficient);
        CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
    }
    CHECK(threw);

    // Config validation failures.
    PipelineConfig bad = cfg;
    bad.stages[1].resolution = ImageShape{3, 4, 1};
    CHECK(thrown_kind([&] { run_pipeline(bad, data); }) == ErrorKind::InvalidInput);
    bad = cfg;
    bad.stages.clear();
    CHECK(thrown_kind([&] { run_pipeline(bad, data); }) == ErrorKind::InvalidInput);
    bad = cfg;
    bad.real_count = 99;
    CHECK(thrown_kind([&] { run_pipeline(bad, data); }) == ErrorKind::InvalidInput);
}

TEST_CASE("histogram matching is an identity on itself and rescales uniform grids") {
    const DataMatrix self = CounterRng(101).gaussian_matrix(6, 40);
    const DataMatrix mapped = histogram_match(self, self);
    CHECK(max_abs_entry(mapped - self) < 1e-12);

    // Uniform grid onto a doubled uniform grid: exact doubling.
    const std::size_t n = 500;
    DataMatrix g(1, n, 0.0);
    DataMatrix r(1, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t shuffled = (i * 7919) % n;
        g(0, i) = (static_cast<double>(shuffled) + 0.5) / static_cast<double>(n);
        r(0, i) = 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    }
    const DataMatrix doubled = histogram_match(g, r);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(doubled(0, i) == doctest::Approx(2.0 * g(0, i)).epsilon(1e-12));
    }
}

TEST_CASE("histogram matching is monotone, range-bounded, and channel-separated") {
    const DataMatrix gen = CounterRng(111).gaussian_matrix(5, 24);
    DataMatrix ref = CounterRng(112).gaussian_matrix(7, 24);
    // Shift the reference's second channel far away from the first.
    for (std::size_t i = 0; i < ref.rows(); ++i) {
        for (std::size_t j = 12; j < 24; ++j) ref(i, j) += 50.0;
    }
    const DataMatrix out = histogram_match(gen, ref, 2);

    for (std::size_t ch = 0; ch < 2; ++ch) {
        double ref_lo = 1e300, ref_hi = -1e300;
        for (std::size_t i = 0; i < ref.rows(); ++i) {
            for (std::size_t j = 0; j < 12; ++j) {
                ref_lo = std::min(ref_lo, ref(i, ch * 12 + j));
                ref_hi = std::max(ref_hi, ref(i, ch * 12 + j));
            }
        }
        std::vector<std::pair<double, double>> pairs;  // (input, output)
        for (std::size_t i = 0; i < gen.rows(); ++i) {
            for (std::size_t j = 0; j < 12; ++j) {
                const double in = gen(i, ch * 12 + j);
                const double mapped_v = out(i, ch * 12 + j);
                CHECK(mapped_v >= ref_lo);
                CHECK(mapped_v <= ref_hi);
                pairs.emplace_back(in, mapped_v);
            }
        }
        std::sort(pairs.begin(), pairs.end());
        for (std::size_t t = 1; t < pairs.size(); ++t) {
            CHECK(pairs[t].second >= pairs[t - 1].second);
        }
    }

    CHECK(thrown_kind([&] { histogram_match(gen, ref, 5); }) ==
          ErrorKind::DimensionMismatch);
    CHECK(thrown_kind([&] { histogram_match(DataMatrix(), ref, 1); }) ==
          ErrorKind::InvalidInput);
}

TEST_CASE("covariance spectral distance vanishes on matched samples") {
    const DataMatrix a = CounterRng(121).gaussian_matrix(9, 5);
    CHECK(covariance_spectral_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));

    // Row permutations leave both moments unchanged.
    DataMatrix perm(a.rows(), a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            perm((i + 4) % a.rows(), j) = a(i, j);
        }
    }
    CHECK(covariance_spectral_distance(a, perm) < 1e-12);

    CHECK(thrown_kind([&] {
              covariance_spectral_distance(a, CounterRng(2).gaussian_matrix(4, 3));
          }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("covariance spectral distance tracks the shrinkage budget") {
    const DataMatrix x = centered_copy(CounterRng(131).gaussian_matrix(15, 4));
    const double beta = 0.5 * squared_singular_values(x, 1)[0];
    const DataMatrix g = svt_generator(x, beta, OrthogonalChoice::u_aligned());
    REQUIRE(g.rows() == x.rows());

    // Direct evaluation of the two terms the metric is defined by.
    DataMatrix diff = gram(x);
    const DataMatrix gg = gram(g);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t i = 0; i < diff.rows(); ++i) {
        for (std::size_t j = 0; j < diff.cols(); ++j) {
            diff(i, j) = (diff(i, j) - gg(i, j)) * inv_n;
        }
    }
    const EigResult eig = sym_eig(diff);
    double direct_cov = 0.0;
    for (double lam : eig.eigenvalues) direct_cov = std::max(direct_cov, std::abs(lam));
    std::vector<double> mg = column_means(g);
    const std::vector<double> mx = column_means(x);
    double mean_term = 0.0;
    for (std::size_t j = 0; j < mg.size(); ++j) {
        mean_term += (mg[j] - mx[j]) * (mg[j] - mx[j]);
    }
    const double expected = direct_cov + std::sqrt(mean_term);

    const double metric = covariance_spectral_distance(g, x);
    CHECK(metric == doctest::Approx(expected).epsilon(1e-9));
    // The covariance part is the thresholded tail: at most beta / n.
    CHECK(direct_cov <= beta * inv_n + 1e-9);
}
