#pragma once

#include <vector>

#include "lpface/image.hpp"
#include "lpface/matrix.hpp"

namespace lpface {

/// Projection of an image onto the retained eigenvectors.
using FeatureVector = std::vector<double>;

/// Eigendecomposition of a symmetric matrix: eigenvalues in descending
/// order, eigenvectors as the matching orthonormal columns.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

/// Cyclic Jacobi rotation sweeps. Converges when the off-diagonal
/// Frobenius norm drops below 1e-12 * ||A||_F (or after 100 sweeps).
/// Each eigenvector is sign-normalized so its largest-magnitude entry is
/// positive, making results deterministic. Throws InvalidInput for
/// non-square or non-symmetric input.
EigenDecomposition symmetric_eigen(const Matrix& a);

/// PCA subspace of a training set: the stored mean, an orthonormal basis
/// (columns of an H x U matrix), and the matching covariance eigenvalues
/// in descending order.
struct Eigenspace {
    ImageVector mean;
    Matrix basis;
    std::vector<double> eigenvalues;

    int dim() const { return static_cast<int>(mean.size()); }          ///< H
    int components() const { return basis.cols(); }                    ///< U
};

/// Elementwise mean of the training vectors. Needs at least two vectors
/// of equal length.
ImageVector mean_image(const std::vector<ImageVector>& train);

/// Assembles the H x P matrix whose column i is train[i] - mean.
Matrix center(const std::vector<ImageVector>& train, const ImageVector& mean);

/// Builds the eigenspace of the (unnormalized) covariance X * X^T from the
/// centered data matrix X. Computed via the P x P Gram matrix X^T X, whose
/// nonzero eigenvalues coincide with the covariance's; each Gram
/// eigenvector u maps to the covariance eigenvector X u / ||X u||.
/// Eigenvalues at or below 1e-10 * lambda_max are dropped as numerically
/// zero; at most max_u components are kept. Throws DegenerateTrainingSet
/// when no positive eigenvalue survives (all inputs identical).
Eigenspace build_eigenspace(const Matrix& data, const ImageVector& mean, int max_u);

/// Projects an image into the eigenspace: V^T (x - mean). Centering with
/// the training mean happens here, so training and test images take the
/// same path.
FeatureVector project(const Eigenspace& space, const ImageVector& x);

}  // namespace lpface
