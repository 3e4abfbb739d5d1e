// convex-wgan: command-line front end for the convex WGAN training library.
// Each subcommand runs one experiment, writes its artifacts under --out-dir,
// and drops a <command>_result.json summary whose bytes are reproducible for
// identical flags and seed (only the wall_seconds line varies).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cwgan/arrangements.hpp"
#include "cwgan/baseline.hpp"
#include "cwgan/duality.hpp"
#include "cwgan/errors.hpp"
#include "cwgan/games.hpp"
#include "cwgan/generator.hpp"
#include "cwgan/io.hpp"
#include "cwgan/matrix.hpp"
#include "cwgan/numerics.hpp"
#include "cwgan/procogan.hpp"
#include "cwgan/rng.hpp"
#include "cwgan/solvers.hpp"

namespace {

using cwgan::DataMatrix;
using cwgan::Error;
using cwgan::ErrorKind;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::IoError:
        case ErrorKind::InvalidInput:
        case ErrorKind::DimensionMismatch:
            return 1;
        case ErrorKind::Infeasible:
        case ErrorKind::RankDeficient:
            return 2;
        case ErrorKind::RecoveryFailed:
        case ErrorKind::IncompleteArrangements:
            return 3;
        case ErrorKind::Diverged:
            return 4;
    }
    return 1;
}

std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        const std::string token = text.substr(pos, next - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidInput,
                        std::string(what) + ": cannot parse '" + token + "' as a number");
        }
        pos = next + 1;
    }
    if (out.empty()) {
        throw Error(ErrorKind::InvalidInput, std::string(what) + ": empty list");
    }
    return out;
}

struct ExperimentResult {
    std::string command;
    json config = json::object();
    std::map<std::string, double> metrics;
    std::vector<std::string> artifacts;
};

// Shared flags and the seed-resolution chain: --seed flag beats the
// CONVEX_WGAN_SEED environment variable, which beats the default 0.
struct CommonFlags {
    std::string out_dir = "./out";
    std::uint64_t seed = 0;
    bool seed_given = false;
};

std::uint64_t resolve_seed(const CommonFlags& common) {
    if (common.seed_given) return common.seed;
    if (const char* env = std::getenv("CONVEX_WGAN_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            throw Error(ErrorKind::InvalidInput,
                        "CONVEX_WGAN_SEED is not an unsigned integer: " + std::string(env));
        }
        return static_cast<std::uint64_t>(v);
    }
    return 0;
}

std::string artifact_path(const CommonFlags& common, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(common.out_dir);
    return (fs::path(common.out_dir) / name).string();
}

void write_result(const CommonFlags& common, const ExperimentResult& result,
                  double wall_seconds) {
    for (const auto& [key, value] : result.metrics) {
        if (!std::isfinite(value)) {
            throw Error(ErrorKind::InvalidInput,
                        "non-finite metric '" + key + "' = " + fmt17(value));
        }
    }
    for (const std::string& path : result.artifacts) {
        if (!std::filesystem::exists(path)) {
            throw Error(ErrorKind::IoError, "missing artifact: " + path);
        }
    }
    json j;
    j["command"] = result.command;
    j["config"] = result.config;
    j["metrics"] = result.metrics;
    j["artifacts"] = result.artifacts;
    j["wall_seconds"] = wall_seconds;
    cwgan::write_text_file(artifact_path(common, result.command + "_result.json"),
                           j.dump(2) + "\n");
}

DataMatrix load_matrix(const std::string& path) {
    try {
        return cwgan::read_matrix_csv(path);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::IoError, std::string("cannot read ") + path + ": " + e.what());
    }
}

cwgan::Activation parse_activation(const std::string& name, double a, double b, double c) {
    if (name == "linear") return cwgan::Activation::linear();
    if (name == "relu") return cwgan::Activation::relu();
    if (name == "quadratic") return cwgan::Activation::quadratic();
    if (name == "polynomial") return cwgan::Activation::polynomial(a, b, c);
    throw Error(ErrorKind::InvalidInput, "unknown activation: " + name);
}

// ---------------------------------------------------------------- toy1d

// Boundary sampling of the feasible polytope {w : max_j |a_j^T w + b_j| <= b}:
// bisection along rays from the solution point. Emitted rows are on (or, for
// rays that leave immediately, at) the boundary within the bisection tol.
std::string sample_polytope_boundary(const cwgan::AbsConstraintSystem& sys,
                                     const std::vector<double>& anchor,
                                     std::size_t directions, std::uint64_t seed) {
    const std::size_t dim = sys.dim;
    std::string csv = "# boundary_samples dim=" + std::to_string(dim) + "\n";
    const cwgan::CounterRng rng(seed, 0x706F6C79);
    for (std::size_t k = 0; k < directions; ++k) {
        std::vector<double> dir(dim, 0.0);
        if (dim == 2) {
            const double angle =
                2.0 * 3.14159265358979323846 * static_cast<double>(k) /
                static_cast<double>(directions);
            dir[0] = std::cos(angle);
            dir[1] = std::sin(angle);
        } else {
            dir = rng.sphere_direction(k, dim);
        }
        const auto violated = [&](double t) {
            std::vector<double> w(dim);
            for (std::size_t i = 0; i < dim; ++i) w[i] = anchor[i] + t * dir[i];
            return sys.violation(w) > 1e-11;
        };
        double hi = 1e-6;
        while (!violated(hi) && hi < 1e4) hi *= 2.0;
        double lo = 0.0;
        if (violated(hi)) {
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (violated(mid) ? hi : lo) = mid;
            }
        } else {
            lo = hi;  // numerically unbounded ray: emit the far point
        }
        std::string line;
        for (std::size_t i = 0; i < dim; ++i) {
            if (i) line += ",";
            line += fmt17(anchor[i] + lo * dir[i]);
        }
        csv += line + "\n";
    }
    return csv;
}

int cmd_toy1d(const CommonFlags& common, const std::string& x_text, double beta,
              const std::string& reg_name) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> xs = parse_number_list(x_text, "--x");
    const cwgan::Regularizer reg = reg_name == "l1"
                                       ? cwgan::Regularizer::lp_to_the_p(1.0)
                                       : cwgan::Regularizer::squared_frobenius();
    const std::uint64_t seed = resolve_seed(common);

    const std::vector<double> w = cwgan::solve_1d_relu_program(xs, beta, reg);
    std::sort(xs.begin(), xs.end());
    const cwgan::AbsConstraintSystem sys = cwgan::build_1d_constraints(xs, beta);

    ExperimentResult result;
    result.command = "toy1d";
    result.config = {{"x", xs},
                     {"beta", beta},
                     {"reg", reg_name},
                     {"seed", seed},
                     {"out_dir", common.out_dir}};

    const std::string w_path = artifact_path(common, "toy1d_solution.csv");
    cwgan::write_matrix_csv(w_path, DataMatrix::from_column(w));
    result.artifacts.push_back(w_path);

    const std::string boundary_path = artifact_path(common, "toy1d_polytope_boundary.csv");
    cwgan::write_text_file(boundary_path,
                           sample_polytope_boundary(sys, w, 256, seed));
    result.artifacts.push_back(boundary_path);

    // Reconstruct an explicit two-layer ReLU generator producing the solution
    // from Gaussian latents (one spare neuron beyond the data count is always
    // enough at this scale; the recovery reports how many fired).
    const DataMatrix z = cwgan::CounterRng(seed, 0x746F7931).gaussian_matrix(xs.size(), 2);
    const cwgan::ArrangementSet arr = cwgan::enumerate_arrangements(z, false, 0);
    const cwgan::RecoveryResult rec =
        cwgan::generator_recovery(z, DataMatrix::from_column(w), arr, 1e-6);
    const std::string w1_path = artifact_path(common, "toy1d_recovered_first_layer.csv");
    const std::string w2_path = artifact_path(common, "toy1d_recovered_second_layer.csv");
    cwgan::write_matrix_csv(w1_path, rec.w1);
    cwgan::write_matrix_csv(w2_path, rec.w2);
    result.artifacts.push_back(w1_path);
    result.artifacts.push_back(w2_path);

    double max_abs_w = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        result.metrics["w_" + std::to_string(i)] = w[i];
        max_abs_w = std::max(max_abs_w, std::abs(w[i]));
    }
    result.metrics["objective"] = reg.value(w);
    result.metrics["constraint_violation"] = sys.violation(w);
    result.metrics["mode_collapse"] = max_abs_w <= 1e-4 ? 1.0 : 0.0;
    result.metrics["recovered_neurons"] = static_cast<double>(rec.w1.cols());
    const DataMatrix replay =
        cwgan::GeneratorModel::two_layer_relu(rec.w1, rec.w2).evaluate(z);
    result.metrics["recovery_residual"] =
        cwgan::max_abs_entry(replay - DataMatrix::from_column(w));

    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    write_result(common, result, wall.count());
    return 0;
}

// ---------------------------------------------------------------- svt

int cmd_svt(const CommonFlags& common, const std::string& x_file, double beta,
            const std::string& orient_name) {
    const auto t0 = std::chrono::steady_clock::now();
    const DataMatrix x = load_matrix(x_file);
    const cwgan::OrthogonalChoice orient = orient_name == "u"
                                               ? cwgan::OrthogonalChoice::u_aligned()
                                               : cwgan::OrthogonalChoice::identity();
    const DataMatrix g = cwgan::svt_generator(x, beta, orient);

    const cwgan::SvdResult spectrum = cwgan::svd(x);
    std::string spectra = "# index,sigma_data,sigma_generated\n";
    for (std::size_t i = 0; i < spectrum.singular_values.size(); ++i) {
        const double s = spectrum.singular_values[i];
        const double after = std::sqrt(std::max(0.0, s * s - beta));
        spectra += std::to_string(i) + "," + fmt17(s) + "," + fmt17(after) + "\n";
    }

    cwgan::DualConstraint constraint;
    constraint.activation = cwgan::Activation::quadratic();
    constraint.beta_d = beta;
    const cwgan::FeasibilityReport report = cwgan::check_feasible(x, g, constraint);

    ExperimentResult result;
    result.command = "svt";
    result.config = {{"x_file", x_file},
                     {"beta", beta},
                     {"orient", orient_name},
                     {"out_dir", common.out_dir}};
    const std::string g_path = artifact_path(common, "svt_generated.csv");
    cwgan::write_matrix_csv(g_path, g);
    result.artifacts.push_back(g_path);
    const std::string spectra_path = artifact_path(common, "svt_spectra.csv");
    cwgan::write_text_file(spectra_path, spectra);
    result.artifacts.push_back(spectra_path);

    result.metrics["frobenius_sq"] = cwgan::frobenius_norm_squared(g);
    result.metrics["gap"] = report.gap_value;
    result.metrics["margin"] = report.margin;
    result.metrics["feasible"] = report.feasible ? 1.0 : 0.0;

    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    write_result(common, result, wall.count());
    return 0;
}

// ---------------------------------------------------------------- procogan

cwgan::PipelineConfig parse_pipeline_config(const std::string& path,
                                            const CommonFlags& common) {
    json cfg;
    try {
        cfg = json::parse(cwgan::read_text_file(path));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::IoError,
                    "cannot parse config " + path + ": " + e.what());
    }
    cwgan::PipelineConfig out;
    try {
        for (const json& st : cfg.at("stages")) {
            cwgan::StageConfig sc;
            sc.resolution.height = st.at("height").get<std::size_t>();
            sc.resolution.width = st.at("width").get<std::size_t>();
            sc.resolution.channels = st.value("channels", std::size_t{1});
            sc.beta_d = st.at("beta_d").get<double>();
            out.stages.push_back(sc);
        }
        out.latent_dim = cfg.at("latent_dim").get<std::size_t>();
        out.sample_count = cfg.at("sample_count").get<std::size_t>();
        out.real_count = cfg.value("real_count", std::size_t{0});
        if (common.seed_given || std::getenv("CONVEX_WGAN_SEED") != nullptr) {
            out.seed = resolve_seed(common);
        } else {
            out.seed = cfg.value("seed", std::uint64_t{0});
        }
        for (const std::string& name :
             cfg.value("mixers", std::vector<std::string>{})) {
            if (name == "identity") {
                out.mixers.push_back(cwgan::StageMixer::Identity);
            } else if (name == "seeded") {
                out.mixers.push_back(cwgan::StageMixer::Seeded);
            } else {
                throw Error(ErrorKind::InvalidInput, "unknown mixer mode: " + name);
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::InvalidInput,
                    "config " + path + " is malformed: " + e.what());
    }
    return out;
}

DataMatrix load_image_dataset(const std::string& data_path, cwgan::ImageShape& shape_out) {
    if (data_path.size() >= 5 && data_path.substr(data_path.size() - 5) == ".json") {
        json manifest;
        try {
            manifest = json::parse(cwgan::read_text_file(data_path));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorKind::IoError,
                        "cannot parse manifest " + data_path + ": " + e.what());
        }
        if (!manifest.is_array() || manifest.empty()) {
            throw Error(ErrorKind::InvalidInput,
                        "manifest must be a nonempty JSON list of image paths");
        }
        const std::filesystem::path base = std::filesystem::path(data_path).parent_path();
        DataMatrix data;
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            const std::string entry = manifest[i].get<std::string>();
            const std::filesystem::path p = std::filesystem::path(entry).is_absolute()
                                                ? std::filesystem::path(entry)
                                                : base / entry;
            cwgan::ImageShape shape;
            const std::vector<double> pixels = cwgan::read_image(p.string(), shape);
            if (i == 0) {
                shape_out = shape;
                data = DataMatrix(manifest.size(), shape.flat_size(), 0.0);
            } else if (shape.height != shape_out.height || shape.width != shape_out.width ||
                       shape.channels != shape_out.channels) {
                throw Error(ErrorKind::DimensionMismatch,
                            "image " + p.string() + " does not match the first image's shape");
            }
            for (std::size_t j = 0; j < pixels.size(); ++j) data(i, j) = pixels[j];
        }
        return data;
    }
    shape_out = cwgan::ImageShape{};
    return load_matrix(data_path);
}

int cmd_procogan(const CommonFlags& common, const std::string& config_file,
                 const std::string& data_file, std::size_t export_count) {
    const auto t0 = std::chrono::steady_clock::now();
    cwgan::PipelineConfig cfg = parse_pipeline_config(config_file, common);
    cwgan::ImageShape data_shape;
    const DataMatrix data = load_image_dataset(data_file, data_shape);

    const cwgan::TrainedPipeline pipe = cwgan::run_pipeline(cfg, data);

    // Centered stage data for the per-stage distance metric.
    DataMatrix centered = data;
    if (cfg.real_count != 0 && cfg.real_count < data.rows()) {
        centered = DataMatrix(cfg.real_count, data.cols(), 0.0);
        for (std::size_t i = 0; i < cfg.real_count; ++i) {
            for (std::size_t j = 0; j < data.cols(); ++j) centered(i, j) = data(i, j);
        }
    }
    const std::vector<double> mean = cwgan::column_means(centered);
    for (std::size_t i = 0; i < centered.rows(); ++i) {
        for (std::size_t j = 0; j < centered.cols(); ++j) centered(i, j) -= mean[j];
    }
    const cwgan::ImageShape full = cfg.stages.back().resolution;

    ExperimentResult result;
    result.command = "procogan";
    result.config = {{"config_file", config_file},
                     {"data_file", data_file},
                     {"seed", cfg.seed},
                     {"stages", cfg.stages.size()},
                     {"out_dir", common.out_dir}};

    json stage_metrics = json::array();
    for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
        const std::size_t shrink = std::size_t{1} << (cfg.stages.size() - 1 - i);
        const DataMatrix stage_data = cwgan::downsample(centered, full, shrink);
        const double dist =
            cwgan::covariance_spectral_distance(pipe.stage_outputs[i], stage_data);
        json entry;
        entry["stage"] = i + 1;
        entry["beta_d"] = cfg.stages[i].beta_d;
        entry["gap"] = pipe.stage_reports[i].gap_value;
        entry["frobenius"] = std::sqrt(cwgan::frobenius_norm_squared(pipe.stage_outputs[i]));
        entry["spectral_distance"] = dist;
        stage_metrics.push_back(entry);
        const std::string tag = "stage" + std::to_string(i + 1);
        result.metrics[tag + "_gap"] = pipe.stage_reports[i].gap_value;
        result.metrics[tag + "_spectral_distance"] = dist;
    }
    const std::string metrics_path = artifact_path(common, "procogan_stage_metrics.json");
    cwgan::write_text_file(metrics_path, stage_metrics.dump(2) + "\n");
    result.artifacts.push_back(metrics_path);

    // Histogram-match the mean-restored samples against the raw data, then
    // export the leading few as image files.
    const DataMatrix shown = cwgan::histogram_match(
        pipe.final_images(), centered.rows() == data.rows() ? data : centered,
        full.channels);
    const std::size_t n_export = std::min<std::size_t>(export_count, shown.rows());
    for (std::size_t i = 0; i < n_export; ++i) {
        std::vector<double> row(shown.cols());
        for (std::size_t j = 0; j < shown.cols(); ++j) row[j] = shown(i, j);
        const std::string ext = full.channels == 3 ? ".ppm" : ".pgm";
        const std::string img_path =
            artifact_path(common, "procogan_sample_" + std::to_string(i) + ext);
        cwgan::write_image(img_path, row, full);
        result.artifacts.push_back(img_path);
    }
    const std::string out_path = artifact_path(common, "procogan_final_output.csv");
    cwgan::write_matrix_csv(out_path, shown);
    result.artifacts.push_back(out_path);

    result.metrics["final_spectral_distance"] =
        cwgan::covariance_spectral_distance(pipe.stage_outputs.back(), centered);
    result.metrics["stage_count"] = static_cast<double>(cfg.stages.size());

    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    write_result(common, result, wall.count());
    return 0;
}

// ---------------------------------------------------------------- gda

int cmd_gda(const CommonFlags& common, const std::string& x_text, double beta,
            std::size_t seeds, std::size_t steps_override) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> xs = parse_number_list(x_text, "--x");
    std::sort(xs.begin(), xs.end());
    const std::uint64_t seed0 = resolve_seed(common);

    // The convex solution is the convergence target for classification.
    const std::vector<double> target = cwgan::solve_1d_relu_program(xs, beta);

    cwgan::TrainConfig cfg = cwgan::two_point_line_config();
    cfg.beta_d = beta;
    if (steps_override > 0) cfg.steps = steps_override;

    ExperimentResult result;
    result.command = "gda";
    result.config = {{"x", xs},
                     {"beta", beta},
                     {"seeds", seeds},
                     {"steps", cfg.steps},
                     {"seed", seed0},
                     {"out_dir", common.out_dir}};

    struct RunRow {
        std::uint64_t seed = 0;
        bool diverged = false;
        double distance = 0.0;
        double spread = 0.0;
    };
    std::vector<RunRow> rows;
    for (std::size_t s = 0; s < seeds; ++s) {
        RunRow row;
        row.seed = seed0 + s;
        try {
            const cwgan::TwoPointRun run =
                cwgan::run_line_experiment(xs, target, cfg, row.seed);
            row.distance = run.distance_to_target;
            row.spread = run.loss_spread;
            std::string csv = "step,disc_loss,gen_loss\n";
            for (std::size_t t = 0; t < run.result.disc_losses.size(); ++t) {
                csv += std::to_string(t) + "," + fmt17(run.result.disc_losses[t]) + "," +
                       fmt17(run.result.gen_losses[t]) + "\n";
            }
            const std::string curve_path = artifact_path(
                common, "gda_losses_seed" + std::to_string(row.seed) + ".csv");
            cwgan::write_text_file(curve_path, csv);
            result.artifacts.push_back(curve_path);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Diverged) throw;
            row.diverged = true;  // recorded, not fatal
        }
        rows.push_back(row);
    }

    double min_converged_spread = -1.0;
    for (const RunRow& row : rows) {
        if (!row.diverged && row.distance <= 0.1) {
            if (min_converged_spread < 0.0 || row.spread < min_converged_spread) {
                min_converged_spread = row.spread;
            }
        }
    }
    std::size_t converged = 0, oscillatory = 0, diverged = 0;
    for (const RunRow& row : rows) {
        const std::string tag = "seed" + std::to_string(row.seed);
        double cls = 0.0;  // 0 = other, 1 = converged, 2 = oscillatory, 3 = diverged
        if (row.diverged) {
            ++diverged;
            cls = 3.0;
        } else {
            result.metrics[tag + "_distance"] = row.distance;
            result.metrics[tag + "_loss_spread"] = row.spread;
            if (row.distance <= 0.1) {
                ++converged;
                cls = 1.0;
            } else if (min_converged_spread > 0.0 &&
                       row.spread > 10.0 * min_converged_spread) {
                ++oscillatory;
                cls = 2.0;
            }
        }
        result.metrics[tag + "_class"] = cls;
    }
    result.metrics["converged_count"] = static_cast<double>(converged);
    result.metrics["oscillatory_count"] = static_cast<double>(oscillatory);
    result.metrics["diverged_count"] = static_cast<double>(diverged);

    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    write_result(common, result, wall.count());
    return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const CommonFlags& common, const std::string& x_file,
               const std::string& g_file, const std::string& activation_name,
               double poly_a, double poly_b, double poly_c, double beta,
               std::size_t samples, bool skip_connection) {
    const auto t0 = std::chrono::steady_clock::now();
    const DataMatrix x = load_matrix(x_file);
    const DataMatrix g = load_matrix(g_file);

    cwgan::DualConstraint constraint;
    constraint.activation = parse_activation(activation_name, poly_a, poly_b, poly_c);
    constraint.beta_d = beta;
    constraint.skip_connection = skip_connection;
    const cwgan::FeasibilityReport report =
        cwgan::check_feasible(x, g, constraint, samples, resolve_seed(common));

    ExperimentResult result;
    result.command = "verify";
    result.config = {{"x_file", x_file},        {"g_file", g_file},
                     {"activation", activation_name}, {"beta", beta},
                     {"samples", samples},      {"skip_connection", skip_connection},
                     {"out_dir", common.out_dir}};
    result.metrics["gap"] = report.gap_value;
    result.metrics["margin"] = report.margin;
    result.metrics["feasible"] = report.feasible ? 1.0 : 0.0;
    if (!report.witness.empty()) {
        const std::string witness_path = artifact_path(common, "verify_witness.csv");
        cwgan::write_matrix_csv(witness_path, DataMatrix::from_column(report.witness));
        result.artifacts.push_back(witness_path);
    }

    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    write_result(common, result, wall.count());
    return report.feasible ? 0 : 3;
}

// ---------------------------------------------------------------- game

int cmd_game(const CommonFlags& common, const std::string& x_file,
             const std::string& z_file, double beta, const std::string& grid_text,
             std::size_t iters, double step, const std::string& w_freeze_file,
             double resid_tol) {
    const auto t0 = std::chrono::steady_clock::now();
    const DataMatrix x = load_matrix(x_file);
    const DataMatrix z = load_matrix(z_file);
    const std::vector<double> grid = parse_number_list(grid_text, "--lambda-grid");
    const std::uint64_t seed = resolve_seed(common);

    const DataMatrix w_freeze = w_freeze_file.empty()
                                    ? cwgan::closed_form_linear_weights(z, x, beta)
                                    : load_matrix(w_freeze_file);
    const cwgan::GameInstance instance =
        cwgan::make_game_instance(x, z, w_freeze, beta,
                                  cwgan::Regularizer::squared_frobenius(), 0, seed);

    struct Candidate {
        std::string name;
        cwgan::MultiplierAssignment lambdas;
    };
    std::vector<Candidate> candidates;
    for (double level : grid) {
        candidates.push_back({"uniform_" + fmt17(level),
                              cwgan::uniform_multipliers(instance, level, level)});
    }
    for (double level : grid) {
        if (level == 0.0) continue;  // cross at zero duplicates uniform zero
        candidates.push_back({"cross_" + fmt17(level),
                              cwgan::cross_pair_multipliers(instance, level)});
    }

    ExperimentResult result;
    result.command = "game";
    result.config = {{"x_file", x_file},   {"z_file", z_file}, {"beta", beta},
                     {"lambda_grid", grid}, {"iters", iters},   {"step", step},
                     {"seed", seed},        {"out_dir", common.out_dir}};

    std::optional<std::size_t> best;
    double best_objective = 0.0, best_residual = 0.0;
    std::vector<cwgan::GameState> states(candidates.size());
    std::vector<int> status(candidates.size(), 0);  // 0 solved, 4 diverged
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const std::string tag = "cand_" + candidates[c].name;
        try {
            states[c] = cwgan::primal_dual_solve(instance, candidates[c].lambdas, iters, step);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Diverged) throw;
            status[c] = 4;
            result.metrics[tag + "_diverged"] = 1.0;
            continue;
        }
        const double objective = cwgan::game_objective(states[c], instance);
        const double residual = cwgan::saddle_residual(states[c], instance, 200);
        result.metrics[tag + "_objective"] = objective;
        result.metrics[tag + "_residual"] = residual;
        const bool valid = residual <= resid_tol;
        const bool best_valid = best && best_residual <= resid_tol;
        const bool better =
            !best ||
            (valid && (!best_valid || objective < best_objective)) ||
            (!valid && !best_valid && residual < best_residual);
        if (better) {
            best = c;
            best_objective = objective;
            best_residual = residual;
        }
    }
    if (!best) {
        throw Error(ErrorKind::Diverged,
                    "every multiplier assignment diverged at step " + fmt17(step));
    }

    // Convergence trajectory of the winning assignment: geometric checkpoints.
    std::vector<std::size_t> checkpoints;
    for (std::size_t k = std::max<std::size_t>(iters / 512, 1); k < iters; k *= 2) {
        checkpoints.push_back(k);
    }
    checkpoints.push_back(iters);
    std::string trajectory = "iterations,objective,saddle_residual\n";
    for (std::size_t k : checkpoints) {
        const cwgan::GameState s =
            cwgan::primal_dual_solve(instance, candidates[*best].lambdas, k, step);
        trajectory += std::to_string(k) + "," +
                      fmt17(cwgan::game_objective(s, instance)) + "," +
                      fmt17(cwgan::saddle_residual(s, instance, 200)) + "\n";
    }
    const std::string trajectory_path = artifact_path(common, "game_trajectory.csv");
    cwgan::write_text_file(trajectory_path, trajectory);
    result.artifacts.push_back(trajectory_path);

    const std::string w_path = artifact_path(common, "game_weights.csv");
    cwgan::write_matrix_csv(w_path, states[*best].w);
    result.artifacts.push_back(w_path);

    result.metrics["best_objective"] = best_objective;
    result.metrics["best_residual"] = best_residual;
    result.metrics["best_candidate"] = static_cast<double>(*best);
    result.metrics["pair_count"] = static_cast<double>(instance.pairs.size());

    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    write_result(common, result, wall.count());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convex programs, duality certificates, and training games for "
                 "Wasserstein GAN generators"};
    app.set_version_flag("--version", "1.0.0");
    app.require_subcommand(1);

    CommonFlags common;
    int exit_code = 0;

    const auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--out-dir", common.out_dir, "Directory for artifacts")
            ->capture_default_str();
        sub->add_option("--seed", common.seed, "Override the experiment seed")
            ->each([&common](const std::string&) { common.seed_given = true; });
    };

    // toy1d
    std::string toy_x = "-1,1";
    double toy_beta = 0.1;
    std::string toy_reg = "frob";
    CLI::App* toy = app.add_subcommand(
        "toy1d", "Solve the 1-D shrinkage program and recover an explicit generator");
    toy->add_option("--x", toy_x, "Comma-separated data points")->capture_default_str();
    toy->add_option("--beta", toy_beta, "Discriminator budget")->capture_default_str();
    toy->add_option("--reg", toy_reg, "Penalty: frob or l1")
        ->check(CLI::IsMember({"frob", "l1"}))
        ->capture_default_str();
    add_common(toy);
    toy->callback([&] { exit_code = cmd_toy1d(common, toy_x, toy_beta, toy_reg); });

    // svt
    std::string svt_x_file;
    double svt_beta = 1.0;
    std::string svt_orient = "identity";
    CLI::App* svt = app.add_subcommand(
        "svt", "Threshold the data spectrum into a budget-feasible generator");
    svt->add_option("--x-file", svt_x_file, "Data matrix CSV")->required();
    svt->add_option("--beta", svt_beta, "Discriminator budget")->capture_default_str();
    svt->add_option("--orient", svt_orient, "Left factor: identity or u")
        ->check(CLI::IsMember({"identity", "u"}))
        ->capture_default_str();
    add_common(svt);
    svt->callback([&] { exit_code = cmd_svt(common, svt_x_file, svt_beta, svt_orient); });

    // procogan
    std::string pro_config, pro_data;
    std::size_t pro_export = 4;
    CLI::App* pro = app.add_subcommand(
        "procogan", "Progressive multi-resolution closed-form training pipeline");
    pro->add_option("--config", pro_config, "Pipeline config JSON")->required();
    pro->add_option("--data", pro_data, "Matrix CSV or JSON manifest of images")->required();
    pro->add_option("--export-samples", pro_export, "Images to export")
        ->capture_default_str();
    add_common(pro);
    pro->callback([&] { exit_code = cmd_procogan(common, pro_config, pro_data, pro_export); });

    // gda
    std::string gda_x = "-1,1";
    double gda_beta = 0.1;
    std::size_t gda_seeds = 5;
    std::size_t gda_steps = 0;
    CLI::App* gda = app.add_subcommand(
        "gda", "Seed-swept alternating gradient training on a 1-D dataset");
    gda->add_option("--x", gda_x, "Comma-separated data points")->capture_default_str();
    gda->add_option("--beta", gda_beta, "Discriminator budget")->capture_default_str();
    gda->add_option("--seeds", gda_seeds, "Number of seeds")->capture_default_str();
    gda->add_option("--steps", gda_steps, "Override training steps (0 = default)")
        ->capture_default_str();
    add_common(gda);
    gda->callback([&] { exit_code = cmd_gda(common, gda_x, gda_beta, gda_seeds, gda_steps); });

    // verify
    std::string ver_x_file, ver_g_file, ver_act = "quadratic";
    double ver_a = 1.0, ver_b = 0.0, ver_c = 0.0, ver_beta = 1.0;
    std::size_t ver_samples = 20000;
    bool ver_skip = false;
    CLI::App* ver = app.add_subcommand(
        "verify", "Check a generated sample set against the discriminator budget");
    ver->add_option("--x-file", ver_x_file, "Data matrix CSV")->required();
    ver->add_option("--g-file", ver_g_file, "Generated matrix CSV")->required();
    ver->add_option("--activation", ver_act, "linear, relu, quadratic, or polynomial")
        ->check(CLI::IsMember({"linear", "relu", "quadratic", "polynomial"}))
        ->capture_default_str();
    ver->add_option("--poly-a", ver_a, "Quadratic coefficient")->capture_default_str();
    ver->add_option("--poly-b", ver_b, "Linear coefficient")->capture_default_str();
    ver->add_option("--poly-c", ver_c, "Constant coefficient")->capture_default_str();
    ver->add_option("--beta", ver_beta, "Discriminator budget")->capture_default_str();
    ver->add_option("--samples", ver_samples, "Sampled directions")->capture_default_str();
    ver->add_flag("--skip-connection", ver_skip, "Also require matching first moments");
    add_common(ver);
    ver->callback([&] {
        exit_code = cmd_verify(common, ver_x_file, ver_g_file, ver_act, ver_a, ver_b,
                               ver_c, ver_beta, ver_samples, ver_skip);
    });

    // game
    std::string game_x_file, game_z_file, game_grid = "0,0.1,1";
    std::string game_w_freeze;
    double game_beta = 0.1, game_step = 0.5, game_resid_tol = 1e-3;
    std::size_t game_iters = 400000;
    CLI::App* game = app.add_subcommand(
        "game", "Fixed-multiplier saddle-point training game over pattern pairs");
    game->add_option("--x-file", game_x_file, "Data matrix CSV")->required();
    game->add_option("--z-file", game_z_file, "Latent matrix CSV")->required();
    game->add_option("--beta", game_beta, "Discriminator budget")->capture_default_str();
    game->add_option("--lambda-grid", game_grid, "Multiplier levels to sweep")
        ->capture_default_str();
    game->add_option("--iters", game_iters, "Primal-dual iterations")->capture_default_str();
    game->add_option("--step", game_step, "Relative step size")->capture_default_str();
    game->add_option("--w-freeze-file", game_w_freeze,
                     "Weights freezing the generated-side patterns (default: closed form)");
    game->add_option("--resid-tol", game_resid_tol, "Residual accepted as converged")
        ->capture_default_str();
    add_common(game);
    game->callback([&] {
        exit_code = cmd_game(common, game_x_file, game_z_file, game_beta, game_grid,
                             game_iters, game_step, game_w_freeze, game_resid_tol);
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", cwgan::error_kind_name(e.kind()), e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}
