#include "cwgan/procogan.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "cwgan/errors.hpp"
#include "cwgan/numerics.hpp"
#include "cwgan/rng.hpp"
#include "cwgan/solvers.hpp"

namespace cwgan {

namespace {

constexpr std::uint64_t kLatentStream = 0x70726F31;  // stage-1 latent draws
constexpr std::uint64_t kMixerStream = 0x70726F32;   // per-stage mixer seeds

bool power_of_two(std::size_t f) { return f != 0 && (f & (f - 1)) == 0; }

void check_image_block(const DataMatrix& images, const ImageShape& shape,
                       const char* what) {
    if (shape.height == 0 || shape.width == 0 || shape.channels == 0) {
        fail(ErrorKind::InvalidInput, std::string(what) + ": empty image shape");
    }
    if (images.cols() != shape.flat_size()) {
        fail(ErrorKind::DimensionMismatch,
             std::string(what) + ": row length " + std::to_string(images.cols()) +
                 " does not match shape " + std::to_string(shape.flat_size()));
    }
}

// Subtract the column means in place; returns the removed mean row.
std::vector<double> center_columns(DataMatrix& a) {
    std::vector<double> mean = column_means(a);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= mean[j];
    }
    return mean;
}

StageMixer mixer_mode(const PipelineConfig& cfg, std::size_t stage) {
    if (cfg.mixers.empty()) return StageMixer::Seeded;
    if (cfg.mixers.size() == 1) return cfg.mixers.front();
    return cfg.mixers[stage];
}

}  // namespace

DataMatrix TrainedPipeline::final_images() const {
    if (stage_outputs.empty()) {
        fail(ErrorKind::InvalidInput, "pipeline holds no stage outputs");
    }
    DataMatrix out = stage_outputs.back();
    if (out.cols() != data_mean.size()) {
        fail(ErrorKind::DimensionMismatch, "stored mean does not match final stage");
    }
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += data_mean[j];
    }
    return out;
}

DataMatrix downsample(const DataMatrix& images, const ImageShape& shape, std::size_t factor) {
    check_image_block(images, shape, "downsample");
    if (!power_of_two(factor)) {
        fail(ErrorKind::InvalidInput, "downsample factor must be a power of two");
    }
    if (shape.height % factor != 0 || shape.width % factor != 0) {
        fail(ErrorKind::InvalidInput,
             "downsample factor " + std::to_string(factor) +
                 " does not divide the spatial dimensions");
    }
    if (factor == 1) return images;

    const std::size_t oh = shape.height / factor;
    const std::size_t ow = shape.width / factor;
    const std::size_t in_pp = shape.pixels_per_channel();
    const std::size_t out_pp = oh * ow;
    const double inv_area = 1.0 / static_cast<double>(factor * factor);

    DataMatrix out(images.rows(), out_pp * shape.channels, 0.0);
    for (std::size_t n = 0; n < images.rows(); ++n) {
        for (std::size_t ch = 0; ch < shape.channels; ++ch) {
            const std::size_t in_base = ch * in_pp;
            const std::size_t out_base = ch * out_pp;
            for (std::size_t r = 0; r < oh; ++r) {
                for (std::size_t c = 0; c < ow; ++c) {
                    double acc = 0.0;
                    for (std::size_t dr = 0; dr < factor; ++dr) {
                        const std::size_t row_off = in_base + (r * factor + dr) * shape.width;
                        for (std::size_t dc = 0; dc < factor; ++dc) {
                            acc += images(n, row_off + c * factor + dc);
                        }
                    }
                    out(n, out_base + r * ow + c) = acc * inv_area;
                }
            }
        }
    }
    return out;
}

DataMatrix upsample(const DataMatrix& images, const ImageShape& shape, std::size_t factor) {
    check_image_block(images, shape, "upsample");
    if (factor == 0) fail(ErrorKind::InvalidInput, "upsample factor must be positive");
    if (factor == 1) return images;

    const std::size_t oh = shape.height * factor;
    const std::size_t ow = shape.width * factor;
    const std::size_t in_pp = shape.pixels_per_channel();
    const std::size_t out_pp = oh * ow;

    DataMatrix out(images.rows(), out_pp * shape.channels, 0.0);
    for (std::size_t n = 0; n < images.rows(); ++n) {
        for (std::size_t ch = 0; ch < shape.channels; ++ch) {
            const std::size_t in_base = ch * in_pp;
            const std::size_t out_base = ch * out_pp;
            for (std::size_t r = 0; r < oh; ++r) {
                const std::size_t src_row = in_base + (r / factor) * shape.width;
                for (std::size_t c = 0; c < ow; ++c) {
                    out(n, out_base + r * ow + c) = images(n, src_row + c / factor);
                }
            }
        }
    }
    return out;
}

StageTraining train_stage(const DataMatrix& z, const DataMatrix& x, double beta_d,
                          const DataMatrix& mixer) {
    StageTraining st;
    st.weights = closed_form_linear_weights(z, x, beta_d, mixer);
    const DataMatrix generated = matmul(z, st.weights);
    DualConstraint constraint;
    constraint.activation = Activation::quadratic();
    constraint.beta_d = beta_d;
    constraint.mode = ConstraintMode::Regularized;
    st.report = check_feasible(x, generated, constraint);
    return st;
}

TrainedPipeline run_pipeline(const PipelineConfig& cfg, const DataMatrix& full_res_data) {
    const std::size_t n_stages = cfg.stages.size();
    if (n_stages == 0) fail(ErrorKind::InvalidInput, "pipeline needs at least one stage");
    for (std::size_t i = 0; i < n_stages; ++i) {
        const StageConfig& sc = cfg.stages[i];
        if (!(sc.beta_d > 0.0) || !std::isfinite(sc.beta_d)) {
            fail(ErrorKind::InvalidInput,
                 "stage " + std::to_string(i + 1) + ": beta_d must be a positive real");
        }
        if (sc.resolution.height == 0 || sc.resolution.width == 0 ||
            sc.resolution.channels == 0) {
            fail(ErrorKind::InvalidInput,
                 "stage " + std::to_string(i + 1) + ": empty resolution");
        }
        if (i > 0) {
            const ImageShape& prev = cfg.stages[i - 1].resolution;
            if (sc.resolution.height != 2 * prev.height ||
                sc.resolution.width != 2 * prev.width ||
                sc.resolution.channels != prev.channels) {
                fail(ErrorKind::InvalidInput,
                     "stage " + std::to_string(i + 1) +
                         ": resolution must double the previous stage's height and "
                         "width with unchanged channels");
            }
        }
    }
    if (cfg.latent_dim == 0) fail(ErrorKind::InvalidInput, "latent_dim must be positive");
    if (cfg.sample_count == 0) fail(ErrorKind::InvalidInput, "sample_count must be positive");
    if (!cfg.mixers.empty() && cfg.mixers.size() != 1 && cfg.mixers.size() != n_stages) {
        fail(ErrorKind::InvalidInput, "mixers must be empty, a single mode, or one per stage");
    }
    const ImageShape& full = cfg.stages.back().resolution;
    check_image_block(full_res_data, full, "run_pipeline data");
    std::size_t n_real = cfg.real_count == 0 ? full_res_data.rows() : cfg.real_count;
    if (n_real == 0 || n_real > full_res_data.rows()) {
        fail(ErrorKind::InvalidInput, "real_count exceeds the provided data rows");
    }

    DataMatrix used(n_real, full_res_data.cols(), 0.0);
    for (std::size_t i = 0; i < n_real; ++i) {
        for (std::size_t j = 0; j < full_res_data.cols(); ++j) {
            used(i, j) = full_res_data(i, j);
        }
    }
    require_finite(used, "pipeline data");

    TrainedPipeline pipe;
    pipe.data_mean = center_columns(used);
    for (const StageConfig& sc : cfg.stages) pipe.stage_shapes.push_back(sc.resolution);

    // Stage-1 latent: seeded Gaussian with exactly zero column means, so every
    // stage output inherits zero mean and the stored data mean restores the
    // channel statistics exactly.
    DataMatrix latent =
        CounterRng(cfg.seed, kLatentStream).gaussian_matrix(cfg.sample_count, cfg.latent_dim);
    center_columns(latent);
    pipe.stage1_latent = latent;

    const CounterRng mixer_seeds(cfg.seed, kMixerStream);
    for (std::size_t i = 0; i < n_stages; ++i) {
        const StageConfig& sc = cfg.stages[i];
        const std::size_t shrink = std::size_t{1} << (n_stages - 1 - i);
        const DataMatrix stage_data = downsample(used, full, shrink);
        try {
            DataMatrix mixer;
            if (mixer_mode(cfg, i) == StageMixer::Seeded) {
                const std::size_t k = thresholded_rank(stage_data, sc.beta_d);
                if (k > 0) mixer = random_orthogonal(mixer_seeds.word(i), k);
            }
            StageTraining st = train_stage(latent, stage_data, sc.beta_d, mixer);
            pipe.stage_outputs.push_back(matmul(latent, st.weights));
            pipe.stage_weights.push_back(std::move(st.weights));
            pipe.stage_reports.push_back(std::move(st.report));
        } catch (const Error& e) {
            throw Error(e.kind(), "stage " + std::to_string(i + 1) + ": " + e.what());
        }
        if (i + 1 < n_stages) {
            latent = upsample(pipe.stage_outputs.back(), sc.resolution, 2);
        }
    }
    return pipe;
}

double beta_for_rank(const DataMatrix& x, std::size_t keep, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        fail(ErrorKind::InvalidInput, "eps must be a positive real");
    }
    require_finite(x, "data matrix");
    const SvdResult s = svd(x);
    const double next =
        keep < s.singular_values.size() ? s.singular_values[keep] : 0.0;
    return next * next + eps;
}

DataMatrix histogram_match(const DataMatrix& generated, const DataMatrix& reference,
                           std::size_t channels) {
    if (generated.size() == 0 || reference.size() == 0) {
        fail(ErrorKind::InvalidInput, "histogram_match requires nonempty inputs");
    }
    if (channels == 0 || generated.cols() % channels != 0 ||
        reference.cols() % channels != 0) {
        fail(ErrorKind::DimensionMismatch,
             "channel count must divide both row lengths");
    }
    require_finite(generated, "generated samples");
    require_finite(reference, "reference samples");

    const std::size_t g_pp = generated.cols() / channels;
    const std::size_t r_pp = reference.cols() / channels;
    DataMatrix out(generated.rows(), generated.cols(), 0.0);

    std::vector<double> ref_vals;
    std::vector<std::pair<double, std::size_t>> gen_vals;  // (value, flat slot)
    for (std::size_t ch = 0; ch < channels; ++ch) {
        ref_vals.clear();
        ref_vals.reserve(reference.rows() * r_pp);
        for (std::size_t i = 0; i < reference.rows(); ++i) {
            for (std::size_t j = 0; j < r_pp; ++j) {
                ref_vals.push_back(reference(i, ch * r_pp + j));
            }
        }
        std::sort(ref_vals.begin(), ref_vals.end());

        gen_vals.clear();
        gen_vals.reserve(generated.rows() * g_pp);
        for (std::size_t i = 0; i < generated.rows(); ++i) {
            for (std::size_t j = 0; j < g_pp; ++j) {
                const std::size_t col = ch * g_pp + j;
                gen_vals.emplace_back(generated(i, col), i * generated.cols() + col);
            }
        }
        std::sort(gen_vals.begin(), gen_vals.end());

        // Ties share one mid-rank quantile, so equal inputs map to equal
        // outputs and the remap is monotone by construction.
        const double n_g = static_cast<double>(gen_vals.size());
        const double n_r = static_cast<double>(ref_vals.size());
        std::size_t run = 0;
        while (run < gen_vals.size()) {
            std::size_t end = run;
            while (end < gen_vals.size() && gen_vals[end].first == gen_vals[run].first) {
                ++end;
            }
            const double q = (static_cast<double>(run) +
                              0.5 * static_cast<double>(end - run)) / n_g;
            std::size_t idx = static_cast<std::size_t>(q * n_r);
            if (idx >= ref_vals.size()) idx = ref_vals.size() - 1;
            for (std::size_t t = run; t < end; ++t) {
                out.data()[gen_vals[t].second] = ref_vals[idx];
            }
            run = end;
        }
    }
    return out;
}

double covariance_spectral_distance(const DataMatrix& a, const DataMatrix& b) {
    if (a.cols() != b.cols()) {
        fail(ErrorKind::DimensionMismatch, "sample dimensions differ");
    }
    if (a.rows() == 0 || b.rows() == 0) {
        fail(ErrorKind::InvalidInput, "distance requires nonempty sample sets");
    }
    require_finite(a, "first sample set");
    require_finite(b, "second sample set");

    DataMatrix diff = gram(a);
    const DataMatrix gb = gram(b);
    const double inv_a = 1.0 / static_cast<double>(a.rows());
    const double inv_b = 1.0 / static_cast<double>(b.rows());
    for (std::size_t i = 0; i < diff.rows(); ++i) {
        for (std::size_t j = 0; j < diff.cols(); ++j) {
            diff(i, j) = diff(i, j) * inv_a - gb(i, j) * inv_b;
        }
    }
    const std::vector<double> ma = column_means(a);
    const std::vector<double> mb = column_means(b);
    double mean_gap = 0.0;
    for (std::size_t j = 0; j < ma.size(); ++j) {
        const double d = ma[j] - mb[j];
        mean_gap += d * d;
    }
    return spectral_norm(diff) + std::sqrt(mean_gap);
}

}  // namespace cwgan
