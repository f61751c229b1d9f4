#include "lpface/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "lpface/eigenspace.hpp"
#include "lpface/errors.hpp"
#include "lpface/logpolar.hpp"
#include "lpface/matrix.hpp"
#include "lpface/mlp.hpp"
#include "lpface/synthetic.hpp"

namespace lpface {
namespace {

/// Platform-stable uniform double in [0, 1).
double unit(std::mt19937& rng) {
    return rng() * 0x1p-32;
}

double signed_unit(std::mt19937& rng) {
    return 2.0 * unit(rng) - 1.0;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

double mean_abs_diff(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height) {
        throw InvalidInput("mean_abs_diff needs equal-sized images");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        sum += std::abs(static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]));
    }
    return a.pixels.empty() ? 0.0 : sum / static_cast<double>(a.pixels.size());
}

Matrix random_matrix(int rows, int cols, std::mt19937& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = signed_unit(rng);
        }
    }
    return m;
}

Gradients zero_gradients(const Network& net) {
    Gradients grads;
    grads.reserve(net.layers.size());
    for (const Layer& layer : net.layers) {
        grads.push_back({Matrix(layer.weights.rows(), layer.weights.cols()),
                         std::vector<double>(layer.bias.size(), 0.0)});
    }
    return grads;
}

Batch xor_batch() {
    return {
        {{-1.0, -1.0}, {-1.0}},
        {{-1.0, 1.0}, {1.0}},
        {{1.0, -1.0}, {1.0}},
        {{1.0, 1.0}, {-1.0}},
    };
}

bool near(double x, double expected, double tol) {
    return std::abs(x - expected) <= tol;
}

}  // namespace

std::vector<GrayImage> selfcheck_fixtures() {
    std::vector<GrayImage> fixtures;
    for (std::uint32_t seed : {11u, 23u, 37u, 41u, 59u, 73u}) {
        fixtures.push_back(synthetic_face(seed));
    }
    return fixtures;
}

CheckResult check_pgm_round_trip() {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 40);
        const int h = 1 + static_cast<int>(rng() % 40);
        GrayImage img(w, h);
        for (auto& px : img.pixels) {
            px = static_cast<std::uint8_t>(rng() % 256);
        }
        const GrayImage back = decode_pgm(encode_pgm(img));
        if (!(back == img)) {
            return {"pgm_round_trip", false,
                    fmt("round trip altered a %gx%g image", w, h)};
        }
    }
    return {"pgm_round_trip", true, "25 random images round-tripped losslessly"};
}

CheckResult check_rotation_column_shift(const std::vector<GrayImage>& fixtures) {
    const char* name = "rotation_column_shift";
    if (fixtures.size() < 5) {
        return {name, false, "needs at least 5 fixtures"};
    }
    const LogPolarConfig cfg;
    double worst = 0.0;
    for (const GrayImage& img : fixtures) {
        const GrayImage lp = log_polar_transform(img, cfg);
        const int s = lp.width;
        for (double angle : {15.0, 30.0, 45.0, 90.0}) {
            const GrayImage rotated_lp = log_polar_transform(rotate_nearest(img, angle), cfg);
            const int shift = static_cast<int>(std::lround(angle * s / 360.0));
            const double diff = mean_abs_diff(rotated_lp, circular_shift_columns(lp, shift));
            worst = std::max(worst, diff);
        }
    }
    return {name, worst <= 10.0, fmt("worst mean |diff| %.3f (limit 10)", worst)};
}

CheckResult check_scale_invariance(const std::vector<GrayImage>& fixtures) {
    const char* name = "scale_invariance";
    if (fixtures.size() < 5) {
        return {name, false, "needs at least 5 fixtures"};
    }
    const LogPolarConfig cfg;
    double worst = 0.0;
    for (const GrayImage& img : fixtures) {
        const GrayImage lp = log_polar_transform(img, cfg);
        for (int scale : {2, 3}) {
            const GrayImage up = resize_nearest(img, img.width * scale, img.height * scale);
            // The inner cutoff is a physical radius; it scales with the
            // image so both transforms sample the same scene annulus.
            LogPolarConfig scaled_cfg = cfg;
            scaled_cfg.r_min = cfg.r_min * scale;
            const GrayImage lp_up = log_polar_transform(up, scaled_cfg);
            const GrayImage down = resize_nearest(lp_up, lp.width, lp.height);
            const double diff = mean_abs_diff(down, lp);
            worst = std::max(worst, diff);
        }
    }
    return {name, worst <= 10.0, fmt("worst mean |diff| %.3f (limit 10)", worst)};
}

CheckResult check_gram_vs_direct() {
    const char* name = "gram_vs_direct";
    std::mt19937 rng(42);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int h = 2 + static_cast<int>(rng() % 11);  // H <= 12
        const int p = 2 + static_cast<int>(rng() % 5);   // P <= 6
        const Matrix x = random_matrix(h, p, rng);
        const auto direct = symmetric_eigen(multiply(x, transpose(x)));
        const auto gram = symmetric_eigen(multiply(transpose(x), x));
        const double lambda_max = std::max(direct.eigenvalues.front(), 1e-300);
        const int m = std::min(h, p);
        for (int i = 0; i < h; ++i) {
            const double want = i < m ? gram.eigenvalues[static_cast<std::size_t>(i)] : 0.0;
            const double rel =
                std::abs(direct.eigenvalues[static_cast<std::size_t>(i)] - want) / lambda_max;
            worst = std::max(worst, rel);
        }
    }
    return {name, worst <= 1e-8, fmt("worst relative eigenvalue gap %.3g (limit 1e-8)", worst)};
}

CheckResult check_eigen_orthonormality() {
    const char* name = "eigen_orthonormality";
    std::mt19937 rng(43);
    double worst_ortho = 0.0;
    double worst_resid = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int h = 2 + static_cast<int>(rng() % 11);
        const int p = 2 + static_cast<int>(rng() % 5);
        const Matrix x = random_matrix(h, p, rng);
        const Matrix omega = multiply(x, transpose(x));
        const double omega_norm = frobenius_norm(omega);

        const auto eig = symmetric_eigen(omega);
        const Matrix gram_check = multiply(transpose(eig.eigenvectors), eig.eigenvectors);
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < h; ++j) {
                const double want = i == j ? 1.0 : 0.0;
                worst_ortho = std::max(worst_ortho, std::abs(gram_check(i, j) - want));
            }
        }

        // Residuals for the direct eigenvectors and for the basis lifted
        // from the Gram matrix, both against Omega.
        for (int k = 0; k < h; ++k) {
            std::vector<double> v(static_cast<std::size_t>(h));
            for (int i = 0; i < h; ++i) {
                v[static_cast<std::size_t>(i)] = eig.eigenvectors(i, k);
            }
            const auto ov = multiply(omega, v);
            double resid = 0.0;
            for (int i = 0; i < h; ++i) {
                const double r = ov[static_cast<std::size_t>(i)] -
                                 eig.eigenvalues[static_cast<std::size_t>(k)] *
                                     v[static_cast<std::size_t>(i)];
                resid += r * r;
            }
            worst_resid = std::max(worst_resid, std::sqrt(resid) / std::max(omega_norm, 1e-300));
        }

        const Eigenspace space =
            build_eigenspace(x, ImageVector(static_cast<std::size_t>(h), 0.0), p);
        for (int k = 0; k < space.components(); ++k) {
            std::vector<double> v(static_cast<std::size_t>(h));
            for (int i = 0; i < h; ++i) {
                v[static_cast<std::size_t>(i)] = space.basis(i, k);
            }
            const auto ov = multiply(omega, v);
            double resid = 0.0;
            for (int i = 0; i < h; ++i) {
                const double r = ov[static_cast<std::size_t>(i)] -
                                 space.eigenvalues[static_cast<std::size_t>(k)] *
                                     v[static_cast<std::size_t>(i)];
                resid += r * r;
            }
            worst_resid = std::max(worst_resid, std::sqrt(resid) / std::max(omega_norm, 1e-300));
        }
    }
    const bool pass = worst_ortho <= 1e-8 && worst_resid <= 1e-8;
    return {name, pass,
            fmt("worst |V'V - I| %.3g, worst residual/|Omega|_F %.3g (limits 1e-8)",
                worst_ortho, worst_resid)};
}

CheckResult check_trace_identity() {
    const char* name = "trace_identity";
    std::mt19937 rng(44);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int h = 2 + static_cast<int>(rng() % 11);
        const int p = 2 + static_cast<int>(rng() % 5);
        const Matrix x = random_matrix(h, p, rng);
        const auto gram = symmetric_eigen(multiply(transpose(x), x));
        double sum = 0.0;
        for (double ev : gram.eigenvalues) {
            sum += ev;
        }
        const double fro2 = frobenius_norm(x) * frobenius_norm(x);
        worst = std::max(worst, std::abs(sum - fro2) / std::max(fro2, 1.0));
    }
    return {name, worst <= 1e-8, fmt("worst relative trace gap %.3g (limit 1e-8)", worst)};
}

CheckResult check_mlp_gradients() {
    const char* name = "mlp_gradients";
    const std::vector<std::vector<int>> shapes = {
        {2, 3, 1}, {3, 4, 2}, {2, 5, 3, 2}, {4, 3, 3}, {3, 3, 3, 1},
    };
    std::mt19937 rng(45);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto& shape = shapes[static_cast<std::size_t>(trial) % shapes.size()];
        Network net = init_network(shape, 100 + static_cast<std::uint32_t>(trial));
        Batch batch;
        for (int k = 0; k < 3; ++k) {
            TrainingExample ex;
            ex.input.resize(static_cast<std::size_t>(shape.front()));
            for (auto& v : ex.input) {
                v = signed_unit(rng);
            }
            ex.target.resize(static_cast<std::size_t>(shape.back()));
            for (auto& v : ex.target) {
                v = rng() % 2 == 0 ? 1.0 : -1.0;
            }
            batch.push_back(std::move(ex));
        }

        const Gradients analytic = backward(net, batch);
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            auto check_param = [&](double& param, double grad) {
                const double saved = param;
                param = saved + h;
                const double e_plus = batch_error(net, batch);
                param = saved - h;
                const double e_minus = batch_error(net, batch);
                param = saved;
                const double numeric = (e_plus - e_minus) / (2.0 * h);
                const double rel =
                    std::abs(grad - numeric) / std::max(std::abs(grad) + std::abs(numeric), 1e-3);
                worst = std::max(worst, rel);
            };
            Matrix& w = net.layers[l].weights;
            for (int i = 0; i < w.rows(); ++i) {
                for (int j = 0; j < w.cols(); ++j) {
                    check_param(w(i, j), analytic[l].weights(i, j));
                }
            }
            for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i) {
                check_param(net.layers[l].bias[i], analytic[l].bias[i]);
            }
        }
    }
    return {name, worst < 1e-5,
            fmt("worst relative gradient error %.3g (limit 1e-5)", worst)};
}

CheckResult check_update_arithmetic() {
    const char* name = "update_arithmetic";
    const Hyperparams hp;  // 0.02 / 0.9 / 0.001 / 0.5 / 0.7 defaults
    bool ok = true;
    std::string failure;

    // Momentum update: eta=0.02, lambda=1, prev update 0.1 -> dw = 0.07.
    {
        Network net = init_network({1, 1}, 1);
        net.layers[0].weights(0, 0) = 1.0;
        net.layers[0].bias[0] = 0.0;
        Gradients grads = zero_gradients(net);
        grads[0].weights(0, 0) = 1.0;
        TrainState st = TrainState::for_network(net, 0.02);
        st.previous_updates[0].weights(0, 0) = 0.1;
        update_weights(net, grads, st, hp);
        if (!near(net.layers[0].weights(0, 0), 1.07, 1e-12) ||
            !near(st.previous_updates[0].weights(0, 0), 0.07, 1e-12) ||
            st.learning_rates[0].weights(0, 0) != 0.02 ||
            !near(st.smoothed_gradients[0].weights(0, 0), 0.3, 1e-12)) {
            ok = false;
            failure = "momentum case (expected dw 0.07)";
        }
    }
    // Rate increase + smoothing: lambda_bar 0.5, lambda 0.2 -> eta 0.021,
    // lambda_bar 0.41.
    if (ok) {
        Network net = init_network({1, 1}, 1);
        Gradients grads = zero_gradients(net);
        grads[0].weights(0, 0) = 0.2;
        TrainState st = TrainState::for_network(net, 0.02);
        st.smoothed_gradients[0].weights(0, 0) = 0.5;
        update_weights(net, grads, st, hp);
        if (!near(st.learning_rates[0].weights(0, 0), 0.021, 1e-12) ||
            !near(st.smoothed_gradients[0].weights(0, 0), 0.41, 1e-12)) {
            ok = false;
            failure = "increase case (expected eta 0.021, smoothed 0.41)";
        }
    }
    // Rate decrease: lambda_bar 0.5, lambda -0.2 -> eta 0.01.
    if (ok) {
        Network net = init_network({1, 1}, 1);
        Gradients grads = zero_gradients(net);
        grads[0].weights(0, 0) = -0.2;
        TrainState st = TrainState::for_network(net, 0.02);
        st.smoothed_gradients[0].weights(0, 0) = 0.5;
        update_weights(net, grads, st, hp);
        const double eta = st.learning_rates[0].weights(0, 0);
        if (!near(eta, 0.01, 1e-12) || !(eta > 0.0)) {
            ok = false;
            failure = "decrease case (expected eta 0.01)";
        }
    }
    // Zero-product case: lambda_bar 0 -> eta untouched.
    if (ok) {
        Network net = init_network({1, 1}, 1);
        Gradients grads = zero_gradients(net);
        grads[0].weights(0, 0) = 0.7;
        TrainState st = TrainState::for_network(net, 0.02);
        update_weights(net, grads, st, hp);
        if (st.learning_rates[0].weights(0, 0) != 0.02) {
            ok = false;
            failure = "zero-product case (eta must stay 0.02)";
        }
    }
    return {name, ok, ok ? "all four rule cases exact" : failure};
}

CheckResult check_rate_positivity() {
    const char* name = "rate_positivity";
    Network net = init_network({2, 3, 2}, 9);
    TrainState st = TrainState::for_network(net, 0.02);
    const Hyperparams hp;
    std::mt19937 rng(46);
    Gradients grads = zero_gradients(net);
    for (int iter = 0; iter < 10000; ++iter) {
        for (auto& layer : grads) {
            for (std::size_t i = 0; i < layer.weights.size(); ++i) {
                layer.weights.data()[i] = signed_unit(rng);
            }
            for (auto& b : layer.bias) {
                b = signed_unit(rng);
            }
        }
        update_weights(net, grads, st, hp);
    }
    double min_rate = 1e300;
    for (const auto& layer : st.learning_rates) {
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            min_rate = std::min(min_rate, layer.weights.data()[i]);
        }
        for (double b : layer.bias) {
            min_rate = std::min(min_rate, b);
        }
    }
    return {name, min_rate > 0.0,
            fmt("min learning rate %.3g after 10000 random updates", min_rate)};
}

CheckResult check_gradient_descent_reduction() {
    const char* name = "gradient_descent_reduction";
    const Batch batch = xor_batch();
    Network trained = init_network({2, 3, 1}, 5);
    Network manual = trained;

    Hyperparams hp;
    hp.momentum = 0.0;
    hp.rate_increment = 0.0;
    hp.rate_decay = 0.0;
    hp.max_epochs = 40;
    hp.gradient_goal = 0.0;
    hp.error_goal = 0.0;
    train(trained, batch, hp);

    for (int epoch = 0; epoch < 40; ++epoch) {
        const Gradients grads = backward(manual, batch);
        for (std::size_t l = 0; l < manual.layers.size(); ++l) {
            Matrix& w = manual.layers[l].weights;
            for (std::size_t i = 0; i < w.size(); ++i) {
                w.data()[i] = w.data()[i] - hp.learning_rate * grads[l].weights.data()[i];
            }
            for (std::size_t i = 0; i < manual.layers[l].bias.size(); ++i) {
                manual.layers[l].bias[i] =
                    manual.layers[l].bias[i] - hp.learning_rate * grads[l].bias[i];
            }
        }
    }

    for (std::size_t l = 0; l < trained.layers.size(); ++l) {
        if (!(trained.layers[l].weights == manual.layers[l].weights) ||
            trained.layers[l].bias != manual.layers[l].bias) {
            return {name, false, "weights drifted from plain gradient descent"};
        }
    }
    return {name, true, "40 epochs bit-identical to plain gradient descent"};
}

CheckResult check_xor_convergence() {
    const char* name = "xor_convergence";
    const Batch batch = xor_batch();
    int converged = 0;
    std::string detail;
    for (std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
        Network net = init_network({2, 4, 1}, seed);
        Hyperparams hp;
        hp.seed = seed;
        hp.max_epochs = 5000;
        hp.error_goal = 0.01;
        hp.gradient_goal = 0.0;
        std::string entry;
        try {
            const TrainResult result = train(net, batch, hp);
            const bool hit = result.stop == StopReason::error_goal;
            if (hit) {
                ++converged;
            }
            entry = "seed " + std::to_string(seed) + (hit ? " ok@" : " miss@") +
                    std::to_string(result.epochs_run);
        } catch (const TrainingDiverged&) {
            entry = "seed " + std::to_string(seed) + " diverged";
        }
        detail += (detail.empty() ? "" : ", ") + entry;
    }
    return {name, converged >= 4, detail + fmt(" (%g/5 converged, need 4)", converged)};
}

std::vector<CheckResult> run_property_suite(const std::vector<GrayImage>& fixtures) {
    return {
        check_pgm_round_trip(),
        check_rotation_column_shift(fixtures),
        check_scale_invariance(fixtures),
        check_gram_vs_direct(),
        check_eigen_orthonormality(),
        check_trace_identity(),
        check_mlp_gradients(),
        check_update_arithmetic(),
        check_rate_positivity(),
        check_gradient_descent_reduction(),
    };
}

bool run_selftest(std::ostream& out) {
    std::vector<CheckResult> results = run_property_suite(selfcheck_fixtures());
    results.push_back(check_xor_convergence());
    bool all_pass = true;
    for (const CheckResult& r : results) {
        out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) {
            out << " — " << r.detail;
        }
        out << '\n';
        all_pass = all_pass && r.pass;
    }
    out << (all_pass ? "self-test passed" : "self-test FAILED") << '\n';
    return all_pass;
}

}  // namespace lpface
