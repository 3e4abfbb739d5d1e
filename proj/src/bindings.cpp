// Python bindings for the core operations: generator programs, duality
// certificates, recovery, the staged image pipeline, and the training
// experiments. Matrices cross the boundary as 2-D float64 numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "cwgan/arrangements.hpp"
#include "cwgan/baseline.hpp"
#include "cwgan/duality.hpp"
#include "cwgan/errors.hpp"
#include "cwgan/games.hpp"
#include "cwgan/generator.hpp"
#include "cwgan/io.hpp"
#include "cwgan/matrix.hpp"
#include "cwgan/procogan.hpp"
#include "cwgan/solvers.hpp"

namespace py = pybind11;
using namespace cwgan;

namespace {

using InputArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

DataMatrix to_matrix(const InputArray& arr, const char* name) {
    if (arr.ndim() != 2) {
        throw py::value_error(std::string(name) + " must be a 2-D array");
    }
    DataMatrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::memcpy(m.data(), arr.data(), sizeof(double) * m.size());
    return m;
}

py::array_t<double> to_numpy(const DataMatrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.data(), sizeof(double) * m.size());
    return out;
}

Activation parse_activation(const std::string& kind, double a, double b, double c) {
    if (kind == "linear") return Activation::linear();
    if (kind == "relu") return Activation::relu();
    if (kind == "quadratic") return Activation::quadratic();
    if (kind == "polynomial") return Activation::polynomial(a, b, c);
    throw py::value_error("unknown activation '" + kind +
                          "' (expected linear, relu, quadratic, or polynomial)");
}

Regularizer parse_regularizer(const std::string& kind) {
    if (kind == "frob") return Regularizer::squared_frobenius();
    if (kind == "l1") return Regularizer::lp_to_the_p(1.0);
    throw py::value_error("unknown regularizer '" + kind + "' (expected frob or l1)");
}

ImageShape parse_shape(const std::vector<std::size_t>& shape) {
    if (shape.size() == 2) return ImageShape{shape[0], shape[1], 1};
    if (shape.size() == 3) return ImageShape{shape[0], shape[1], shape[2]};
    throw py::value_error("shape must be (height, width) or (height, width, channels)");
}

py::dict report_to_dict(const FeasibilityReport& report) {
    py::dict out;
    out["gap"] = report.gap_value;
    out["margin"] = report.margin;
    out["feasible"] = report.feasible;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Convex generator programs, duality certificates, staged image "
              "pipelines, and alternating-gradient experiments.";

    static py::exception<Error> exc(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(error_kind_name(e.kind())) + ": " + e.what();
            PyErr_SetString(exc.ptr(), msg.c_str());
        }
    });

    // ------------------------------------------------------------- spectra
    m.def(
        "svt_generator",
        [](const InputArray& x, double beta, const std::string& orient) {
            const OrthogonalChoice choice = orient == "u" ? OrthogonalChoice::u_aligned()
                                                          : OrthogonalChoice::identity();
            if (orient != "u" && orient != "identity") {
                throw py::value_error("orient must be 'identity' or 'u'");
            }
            return to_numpy(svt_generator(to_matrix(x, "x"), beta, choice));
        },
        py::arg("x"), py::arg("beta"), py::arg("orient") = "identity",
        "Minimum-norm generator samples whose covariance matches the data "
        "spectrum soft-thresholded at beta.");

    m.def(
        "thresholded_rank",
        [](const InputArray& x, double beta) { return thresholded_rank(to_matrix(x, "x"), beta); },
        py::arg("x"), py::arg("beta"),
        "Number of data modes that survive the spectral threshold beta.");

    m.def(
        "closed_form_linear_weights",
        [](const InputArray& z, const InputArray& x, double beta) {
            return to_numpy(closed_form_linear_weights(to_matrix(z, "z"), to_matrix(x, "x"), beta));
        },
        py::arg("z"), py::arg("x"), py::arg("beta"),
        "Linear generator weights W such that Z @ W realizes the thresholded "
        "data spectrum through the given latents.");

    m.def(
        "beta_for_rank",
        [](const InputArray& x, std::size_t keep, double eps) {
            return beta_for_rank(to_matrix(x, "x"), keep, eps);
        },
        py::arg("x"), py::arg("keep"), py::arg("eps") = 1e-9,
        "Smallest budget that keeps exactly `keep` modes of the data spectrum.");

    // ------------------------------------------------------------ 1-D program
    m.def(
        "solve_1d_relu_program",
        [](const std::vector<double>& xs, double beta, const std::string& reg, double tol) {
            return solve_1d_relu_program(xs, beta, parse_regularizer(reg), tol);
        },
        py::arg("xs"), py::arg("beta"), py::arg("reg") = "frob", py::arg("tol") = 1e-6,
        "Optimal generator outputs for 1-D data under a ReLU critic budget; "
        "pairs with sorted(xs).");

    m.def(
        "constraint_violation_1d",
        [](const std::vector<double>& xs, double beta, const std::vector<double>& w) {
            return build_1d_constraints(xs, beta).violation(w);
        },
        py::arg("xs"), py::arg("beta"), py::arg("w"),
        "Worst-case excess of the 1-D dual constraints at outputs w (0 when "
        "feasible).");

    // ------------------------------------------------------------- recovery
    m.def(
        "recover_two_layer",
        [](const InputArray& z, const InputArray& target, double tol, std::size_t budget,
           std::uint64_t seed) {
            const DataMatrix zm = to_matrix(z, "z");
            const ArrangementSet arr = enumerate_arrangements(zm, false, budget, seed);
            const RecoveryResult rec =
                generator_recovery(zm, to_matrix(target, "target"), arr, tol);
            py::dict out;
            out["first_layer"] = to_numpy(rec.w1);
            out["second_layer"] = to_numpy(rec.w2);
            out["objective"] = rec.objective;
            out["complete"] = arr.complete;
            return out;
        },
        py::arg("z"), py::arg("target"), py::arg("tol") = 1e-6, py::arg("budget") = 0,
        py::arg("seed") = 0,
        "Explicit two-layer ReLU generator reproducing `target` on the latents "
        "z, via activation-pattern enumeration and a cone-constrained "
        "group-norm program.");

    m.def(
        "polynomial_lift",
        [](const InputArray& z, double a, double b, double c) {
            return to_numpy(polynomial_lift(to_matrix(z, "z"), a, b, c));
        },
        py::arg("z"), py::arg("a"), py::arg("b"), py::arg("c"),
        "Quadratic feature lift (a*vec(zz^T), b*z, c) that makes one-neuron "
        "polynomial generators linear in the lifted weights.");

    // ------------------------------------------------------------- duality
    m.def(
        "check_feasible",
        [](const InputArray& x, const InputArray& g, const std::string& activation, double beta,
           std::size_t samples, std::uint64_t seed, bool skip_connection, double a, double b,
           double c) {
            DualConstraint constraint;
            constraint.activation = parse_activation(activation, a, b, c);
            constraint.beta_d = beta;
            constraint.skip_connection = skip_connection;
            return report_to_dict(
                check_feasible(to_matrix(x, "x"), to_matrix(g, "g"), constraint, samples, seed));
        },
        py::arg("x"), py::arg("g"), py::arg("activation") = "quadratic", py::arg("beta") = 1.0,
        py::arg("samples") = 20000, py::arg("seed") = 0, py::arg("skip_connection") = false,
        py::arg("a") = 1.0, py::arg("b") = 0.0, py::arg("c") = 0.0,
        "Dual-constraint certificate for generated samples g against data x: "
        "returns the gap, the budget margin, and the exact feasibility flag.");

    m.def(
        "dual_gap_sampled",
        [](const InputArray& x, const InputArray& g, const std::string& activation,
           std::size_t samples, std::uint64_t seed, double a, double b, double c) {
            return dual_gap_sampled(to_matrix(x, "x"), to_matrix(g, "g"),
                                    parse_activation(activation, a, b, c), samples, seed);
        },
        py::arg("x"), py::arg("g"), py::arg("activation") = "relu", py::arg("samples") = 100000,
        py::arg("seed") = 0, py::arg("a") = 1.0, py::arg("b") = 0.0, py::arg("c") = 0.0,
        "Monte-Carlo lower bound on the critic gap over unit directions.");

    // ------------------------------------------------------- image pipeline
    m.def(
        "downsample",
        [](const InputArray& x, const std::vector<std::size_t>& shape, std::size_t factor) {
            return to_numpy(downsample(to_matrix(x, "x"), parse_shape(shape), factor));
        },
        py::arg("x"), py::arg("shape"), py::arg("factor"),
        "Block-average each row (an image of the given shape) by `factor`.");

    m.def(
        "upsample",
        [](const InputArray& x, const std::vector<std::size_t>& shape, std::size_t factor) {
            return to_numpy(upsample(to_matrix(x, "x"), parse_shape(shape), factor));
        },
        py::arg("x"), py::arg("shape"), py::arg("factor"),
        "Nearest-neighbor expansion of each row (an image of the given shape) "
        "by `factor`.");

    m.def(
        "histogram_match",
        [](const InputArray& generated, const InputArray& reference, std::size_t channels) {
            return to_numpy(histogram_match(to_matrix(generated, "generated"),
                                            to_matrix(reference, "reference"), channels));
        },
        py::arg("generated"), py::arg("reference"), py::arg("channels") = 1,
        "Per-channel quantile remap of generated values onto the reference "
        "value distribution.");

    m.def(
        "covariance_spectral_distance",
        [](const InputArray& a, const InputArray& b) {
            return covariance_spectral_distance(to_matrix(a, "a"), to_matrix(b, "b"));
        },
        py::arg("a"), py::arg("b"),
        "Spectral-norm distance between sample covariances plus the mean gap.");

    m.def(
        "run_pipeline",
        [](const InputArray& data, const std::vector<std::vector<double>>& stages,
           std::size_t latent_dim, std::size_t sample_count, std::size_t real_count,
           std::uint64_t seed, const std::vector<std::string>& mixers) {
            PipelineConfig cfg;
            for (const auto& st : stages) {
                if (st.size() != 3 && st.size() != 4) {
                    throw py::value_error(
                        "each stage must be (height, width, beta) or (height, width, "
                        "channels, beta)");
                }
                StageConfig stage;
                stage.resolution.height = static_cast<std::size_t>(st[0]);
                stage.resolution.width = static_cast<std::size_t>(st[1]);
                stage.resolution.channels = st.size() == 4 ? static_cast<std::size_t>(st[2]) : 1;
                stage.beta_d = st.back();
                cfg.stages.push_back(stage);
            }
            cfg.latent_dim = latent_dim;
            cfg.sample_count = sample_count;
            cfg.real_count = real_count;
            cfg.seed = seed;
            for (const std::string& mix : mixers) {
                if (mix == "identity") {
                    cfg.mixers.push_back(StageMixer::Identity);
                } else if (mix == "seeded") {
                    cfg.mixers.push_back(StageMixer::Seeded);
                } else {
                    throw py::value_error("mixer must be 'identity' or 'seeded'");
                }
            }
            const TrainedPipeline pipe = run_pipeline(cfg, to_matrix(data, "data"));
            py::dict out;
            py::list weights, gaps, outputs;
            for (std::size_t i = 0; i < pipe.stage_weights.size(); ++i) {
                weights.append(to_numpy(pipe.stage_weights[i]));
                gaps.append(pipe.stage_reports[i].gap_value);
                outputs.append(to_numpy(pipe.stage_outputs[i]));
            }
            out["stage_weights"] = weights;
            out["stage_gaps"] = gaps;
            out["stage_outputs"] = outputs;
            out["final_images"] = to_numpy(pipe.final_images());
            return out;
        },
        py::arg("data"), py::arg("stages"), py::arg("latent_dim"), py::arg("sample_count"),
        py::arg("real_count") = 0, py::arg("seed") = 0,
        py::arg("mixers") = std::vector<std::string>{},
        "Coarse-to-fine staged training on images (rows of `data`): each stage "
        "solves a certified spectral program at its resolution and feeds the "
        "upsampled output to the next stage as latents.");

    // ------------------------------------------------------------ experiments
    const auto run_to_dict = [](const TwoPointRun& run) {
        py::dict out;
        out["outputs"] = run.outputs;
        out["distance_to_target"] = run.distance_to_target;
        out["loss_spread"] = run.loss_spread;
        out["disc_losses"] = run.result.disc_losses;
        out["gen_losses"] = run.result.gen_losses;
        return out;
    };

    m.def(
        "run_two_point_line",
        [run_to_dict](std::uint64_t seed) { return run_to_dict(run_two_point_line(seed)); },
        py::arg("seed"),
        "One seeded alternating-gradient run on the two-point line; reports "
        "final outputs, distance to the shrunk targets, and the late-training "
        "critic-loss spread used to flag oscillation.");

    m.def(
        "run_line_experiment",
        [run_to_dict](const std::vector<double>& xs, const std::vector<double>& target,
                      std::uint64_t seed, double beta, std::size_t steps) {
            TrainConfig cfg = two_point_line_config();
            cfg.beta_d = beta;
            if (steps > 0) cfg.steps = steps;
            return run_to_dict(run_line_experiment(xs, target, cfg, seed));
        },
        py::arg("xs"), py::arg("target"), py::arg("seed") = 0, py::arg("beta") = 0.1,
        py::arg("steps") = 0,
        "Seeded alternating-gradient run on arbitrary 1-D data with the pinned "
        "line-experiment hyper-parameters (steps=0 keeps the default count).");

    // ----------------------------------------------------------------- game
    m.def(
        "solve_game",
        [](const InputArray& x, const InputArray& z, const InputArray& w_freeze, double beta,
           double level, double level_prime, bool cross, std::size_t iters, double step,
           std::size_t probes, std::size_t budget, std::uint64_t seed) {
            const GameInstance instance = make_game_instance(
                to_matrix(x, "x"), to_matrix(z, "z"), to_matrix(w_freeze, "w_freeze"), beta,
                Regularizer::squared_frobenius(), budget, seed);
            const MultiplierAssignment lambdas =
                cross ? cross_pair_multipliers(instance, level)
                      : uniform_multipliers(instance, level, level_prime);
            GameState state = primal_dual_solve(instance, lambdas, iters, step);
            py::dict out;
            out["w"] = to_numpy(state.w);
            out["objective"] = game_objective(state, instance);
            out["residual"] = saddle_residual(state, instance, probes);
            return out;
        },
        py::arg("x"), py::arg("z"), py::arg("w_freeze"), py::arg("beta"), py::arg("level") = 1.0,
        py::arg("level_prime") = 1.0, py::arg("cross") = false, py::arg("iters") = 400000,
        py::arg("step") = 0.5, py::arg("probes") = 200, py::arg("budget") = 0,
        py::arg("seed") = 0,
        "Primal-dual solve of the frozen-pattern minimax game at fixed "
        "multiplier levels; returns the generator weights, the regularized "
        "objective, and a sampled saddle residual.");
}
