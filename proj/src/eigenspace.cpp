#include "lpface/eigenspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lpface {

namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kSweepTolerance = 1e-12;   // vs ||A||_F
constexpr double kSymmetryTolerance = 1e-10;
constexpr double kZeroEigenvalueRatio = 1e-10;  // vs lambda_max

double offdiagonal_norm(const Matrix& a) {
    double acc = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            if (i != j) acc += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(acc);
}

/// Flips a column's sign if its largest-magnitude entry is negative
/// (first such entry wins on ties).
void fix_column_sign(Matrix& m, int col) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < m.rows(); ++i) {
        const double mag = std::abs(m(i, col));
        if (mag > best) {
            best = mag;
            arg = i;
        }
    }
    if (m(arg, col) < 0.0) {
        for (int i = 0; i < m.rows(); ++i) m(i, col) = -m(i, col);
    }
}

}  // namespace

EigenDecomposition symmetric_eigen(const Matrix& a) {
    const int n = a.rows();
    if (n == 0 || a.cols() != n) {
        throw InvalidInput("symmetric_eigen needs a non-empty square matrix");
    }
    double max_abs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        max_abs = std::max(max_abs, std::abs(a.data()[i]));
    }
    const double sym_tol = kSymmetryTolerance * std::max(1.0, max_abs);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(a(i, j) - a(j, i)) > sym_tol) {
                throw InvalidInput("symmetric_eigen: input is not symmetric");
            }
        }
    }

    Matrix d = a;
    Matrix v = Matrix::identity(n);
    const double norm = frobenius_norm(d);
    const double stop = kSweepTolerance * norm;

    for (int sweep = 0; sweep < kMaxJacobiSweeps && norm > 0.0; ++sweep) {
        if (offdiagonal_norm(d) <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = d(p, q);
                if (apq == 0.0) continue;

                // Classic 2x2 rotation zeroing d(p, q).
                const double theta = (d(q, q) - d(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double dpp = d(p, p);
                const double dqq = d(q, q);
                d(p, p) = dpp - t * apq;
                d(q, q) = dqq + t * apq;
                d(p, q) = 0.0;
                d(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double drp = d(r, p);
                        const double drq = d(r, q);
                        d(r, p) = drp - s * (drq + tau * drp);
                        d(p, r) = d(r, p);
                        d(r, q) = drq + s * (drp - tau * drq);
                        d(q, r) = d(r, q);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&d](int lhs, int rhs) { return d(lhs, lhs) > d(rhs, rhs); });

    EigenDecomposition out;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.eigenvectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out.eigenvalues[static_cast<std::size_t>(k)] = d(src, src);
        for (int i = 0; i < n; ++i) {
            out.eigenvectors(i, k) = v(i, src);
        }
        fix_column_sign(out.eigenvectors, k);
    }
    return out;
}

ImageVector mean_image(const std::vector<ImageVector>& train) {
    if (train.size() < 2) {
        throw InvalidInput("mean_image needs at least two training vectors");
    }
    const std::size_t dim = train.front().size();
    ImageVector mean(dim, 0.0);
    for (const auto& vec : train) {
        if (vec.size() != dim) {
            throw InvalidInput("mean_image: training vectors have unequal lengths");
        }
        for (std::size_t i = 0; i < dim; ++i) mean[i] += vec[i];
    }
    const double inv = 1.0 / static_cast<double>(train.size());
    for (double& m : mean) m *= inv;
    return mean;
}

Matrix center(const std::vector<ImageVector>& train, const ImageVector& mean) {
    if (train.empty()) {
        throw InvalidInput("center: empty training set");
    }
    const int dim = static_cast<int>(mean.size());
    Matrix data(dim, static_cast<int>(train.size()));
    for (int col = 0; col < data.cols(); ++col) {
        const auto& vec = train[static_cast<std::size_t>(col)];
        if (static_cast<int>(vec.size()) != dim) {
            throw InvalidInput("center: vector length does not match the mean");
        }
        for (int row = 0; row < dim; ++row) {
            data(row, col) = vec[static_cast<std::size_t>(row)] - mean[static_cast<std::size_t>(row)];
        }
    }
    return data;
}

Eigenspace build_eigenspace(const Matrix& data, const ImageVector& mean, int max_u) {
    const int dim = data.rows();
    const int count = data.cols();
    if (count < 2) {
        throw InvalidInput("build_eigenspace needs at least two training columns");
    }
    if (dim != static_cast<int>(mean.size())) {
        throw InvalidInput("build_eigenspace: mean length does not match the data matrix");
    }
    if (max_u < 1) {
        throw InvalidInput("build_eigenspace: max_u must be positive");
    }

    // Gram matrix X^T X, P x P; built symmetric by construction.
    Matrix gram(count, count);
    for (int i = 0; i < count; ++i) {
        for (int j = i; j < count; ++j) {
            double acc = 0.0;
            for (int r = 0; r < dim; ++r) acc += data(r, i) * data(r, j);
            gram(i, j) = acc;
            gram(j, i) = acc;
        }
    }

    const EigenDecomposition eig = symmetric_eigen(gram);
    const double lambda_max = eig.eigenvalues.front();
    if (!(lambda_max > 0.0)) {
        throw DegenerateTrainingSet("training set carries no variance (all images identical)");
    }
    const double cutoff = kZeroEigenvalueRatio * lambda_max;

    int kept = 0;
    while (kept < count && kept < max_u && eig.eigenvalues[static_cast<std::size_t>(kept)] > cutoff) {
        ++kept;
    }

    Eigenspace space;
    space.mean = mean;
    space.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + kept);
    space.basis = Matrix(dim, kept);
    for (int k = 0; k < kept; ++k) {
        // Lift the Gram eigenvector back to image space and normalize.
        double norm = 0.0;
        for (int r = 0; r < dim; ++r) {
            double acc = 0.0;
            for (int c = 0; c < count; ++c) acc += data(r, c) * eig.eigenvectors(c, k);
            space.basis(r, k) = acc;
            norm += acc * acc;
        }
        norm = std::sqrt(norm);
        for (int r = 0; r < dim; ++r) space.basis(r, k) /= norm;
        fix_column_sign(space.basis, k);
    }
    return space;
}

FeatureVector project(const Eigenspace& space, const ImageVector& x) {
    if (static_cast<int>(x.size()) != space.dim()) {
        throw InvalidInput("project: vector length " + std::to_string(x.size()) +
                           " does not match eigenspace dimension " + std::to_string(space.dim()));
    }
    FeatureVector features(static_cast<std::size_t>(space.components()), 0.0);
    for (int k = 0; k < space.components(); ++k) {
        double acc = 0.0;
        for (int r = 0; r < space.dim(); ++r) {
            acc += space.basis(r, k) * (x[static_cast<std::size_t>(r)] -
                                        space.mean[static_cast<std::size_t>(r)]);
        }
        features[static_cast<std::size_t>(k)] = acc;
    }
    return features;
}

}  // namespace lpface
