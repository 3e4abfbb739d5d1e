#pragma once

#include <cstdint>
#include <vector>

#include "cwgan/duality.hpp"
#include "cwgan/io.hpp"
#include "cwgan/matrix.hpp"

namespace cwgan {

// One resolution rung of the progressive pipeline.
struct StageConfig {
    ImageShape resolution;
    double beta_d = 0.0;
};

// How each stage picks the orthonormal mixer inside its closed-form weights:
// Identity keeps the canonical factorization (fully deterministic layouts for
// tests); Seeded draws a random orthogonal mixer from the pipeline seed so
// samples differ across latent draws while the output covariance is unchanged.
enum class StageMixer { Identity, Seeded };

struct PipelineConfig {
    std::vector<StageConfig> stages;  // strictly doubling height and width
    std::size_t latent_dim = 0;       // columns of the stage-1 Gaussian latent
    std::size_t real_count = 0;       // rows of data used; 0 = all rows
    std::size_t sample_count = 0;     // generated rows (stage-1 latent rows)
    std::uint64_t seed = 0;
    // One entry per stage, or a single entry applied to every stage, or empty
    // for all-Seeded.
    std::vector<StageMixer> mixers;
};

struct TrainedPipeline {
    std::vector<DataMatrix> stage_weights;          // W_i
    std::vector<FeasibilityReport> stage_reports;   // quadratic-gap certificate per stage
    std::vector<DataMatrix> stage_outputs;          // centered generated samples per stage
    std::vector<double> data_mean;                  // full-resolution mean row
    std::vector<ImageShape> stage_shapes;
    DataMatrix stage1_latent;                       // the seeded, column-centered draw

    // Final-stage samples with the data mean restored (visualization form).
    DataMatrix final_images() const;
};

// 2×2 average pooling applied log2(factor) times, per channel. `shape`
// describes the input rows; factor must be a power of two dividing both
// spatial dimensions.
DataMatrix downsample(const DataMatrix& images, const ImageShape& shape, std::size_t factor);

// Nearest-neighbor replication by `factor` per spatial axis; exact inverse of
// downsample on its own output: downsample(upsample(A, 2), 2) = A.
DataMatrix upsample(const DataMatrix& images, const ImageShape& shape, std::size_t factor);

// Closed-form stage solve: W = closed_form_linear_weights(z, x, beta_d) with
// an optional orthonormal mixer (empty = identity), plus the quadratic-gap
// feasibility certificate for the generated samples z·W.
struct StageTraining {
    DataMatrix weights;
    FeasibilityReport report;
};
StageTraining train_stage(const DataMatrix& z, const DataMatrix& x, double beta_d,
                          const DataMatrix& mixer = DataMatrix());

// Full progressive run: stage 1 trains a Gaussian latent against the most
// downsampled data; each later stage's latent is the upsampled previous
// output. The data mean is subtracted once at full resolution and restored
// only for visualization.
TrainedPipeline run_pipeline(const PipelineConfig& cfg, const DataMatrix& full_res_data);

// Smallest budget that keeps exactly `keep` spectral modes of x:
// sigma_{keep+1}^2 + eps.
double beta_for_rank(const DataMatrix& x, std::size_t keep, double eps = 1e-9);

// Per-channel monotone quantile remap of `generated` pixel values onto the
// empirical distribution of `reference`. Both column counts must be divisible
// by `channels`; outputs lie within the reference's per-channel range.
DataMatrix histogram_match(const DataMatrix& generated, const DataMatrix& reference,
                           std::size_t channels = 1);

// ‖A^TA/n_A − B^TB/n_B‖₂ + ‖mean(A) − mean(B)‖₂: a desk-scale distributional
// distance pairing the second-moment spectral mismatch with the mean shift.
double covariance_spectral_distance(const DataMatrix& a, const DataMatrix& b);

}  // namespace cwgan
