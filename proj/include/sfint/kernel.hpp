#ifndef SFINT_KERNEL_HPP
#define SFINT_KERNEL_HPP

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sfint/rng.hpp"

namespace sfint {

/// Squared-exponential Gram matrix over the columns of `points` (L x n):
/// K(j1, j2) = exp(-||p_j1 - p_j2||^2 / (2 l_s^2)). Unit amplitude.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
se_kernel_matrix(const Eigen::MatrixBase<Derived>& points, typename Derived::Scalar length_scale)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = points.cols();
    const Scalar inv = Scalar(1) / (Scalar(2) * length_scale * length_scale);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k(n, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        k(b, b) = Scalar(1);
        for (Eigen::Index a = b + 1; a < n; ++a) {
            const Scalar v = std::exp(-(points.col(a) - points.col(b)).squaredNorm() * inv);
            k(a, b) = v;
            k(b, a) = v;
        }
    }
    return k;
}

/// GP prior covariance over samples with its Cholesky factor. The factored
/// matrix is K + jitter I; jitter escalates from 1e-10 to 1e-4 times the
/// mean diagonal until the factorization succeeds.
class KernelMatrix {
public:
    KernelMatrix() = default;

    /// Builds the SE kernel of `lambda` (L x n). Throws CholeskyFailure.
    static KernelMatrix squared_exponential(const Eigen::MatrixXd& lambda, double length_scale);
    /// Wraps an arbitrary symmetric covariance (used for tests and F*).
    static KernelMatrix from_covariance(Eigen::MatrixXd k, double length_scale = 0.0);

    const Eigen::MatrixXd& matrix() const noexcept { return k_; }
    Eigen::MatrixXd covariance() const;
    const Eigen::MatrixXd& lower() const noexcept { return lower_; }
    double jitter() const noexcept { return jitter_; }
    double length_scale() const noexcept { return length_scale_; }
    Eigen::Index size() const noexcept { return k_.rows(); }
    double log_determinant() const noexcept { return log_det_; }

    /// log N(f; 0, K + jitter I) for one vector.
    double log_density(const Eigen::VectorXd& f) const;
    /// Sum of log N(row; 0, K + jitter I) over the rows of `rows` (A x n).
    double log_density_rows(const Eigen::MatrixXd& rows) const;
    /// A draw from N(0, K + jitter I).
    Eigen::VectorXd sample(Rng& rng) const;

    bool operator==(const KernelMatrix& other) const;

private:
    KernelMatrix(Eigen::MatrixXd k, double length_scale);

    Eigen::MatrixXd k_;
    Eigen::MatrixXd lower_;
    double jitter_ = 0.0;
    double length_scale_ = 0.0;
    double log_det_ = 0.0;
};

/// Factor of C + s2 I for a kernel covariance C, shared by the marginal
/// likelihood ratio and the conditional draw of one effect row.
class NoisyKernel {
public:
    NoisyKernel(const KernelMatrix& kernel, double sigma2);

    /// log N(r; 0, C + s2 I) - log N(r; 0, s2 I).
    double log_ratio(const Eigen::VectorXd& residual) const;
    /// Exact draw of f | r by prior-sample correction.
    Eigen::VectorXd sample_conditional(const Eigen::VectorXd& residual, Rng& rng) const;

private:
    const KernelMatrix* kernel_;
    double sigma2_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double log_det_ = 0.0;
};

/// log N(r; 0, C + s2 I) - log N(r; 0, s2 I) with C the kernel covariance:
/// the log Bayes factor of "row carries a GP effect" against "effect is zero".
double gp_marginal_loglik_ratio(const Eigen::VectorXd& residual, const KernelMatrix& kernel, double sigma2);

struct GaussianConditional {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Posterior of f given r = f + e, f ~ N(0, C), e ~ N(0, s2 I):
/// mean C (C + s2 I)^-1 r, covariance C - C (C + s2 I)^-1 C.
GaussianConditional gp_conditional(const Eigen::VectorXd& residual, const KernelMatrix& kernel, double sigma2);

/// Exact draw from gp_conditional by prior-sample correction, which needs
/// only the factors of C and C + s2 I.
Eigen::VectorXd sample_gp_conditional(const Eigen::VectorXd& residual, const KernelMatrix& kernel,
                                      double sigma2, Rng& rng);

}  // namespace sfint

#endif  // SFINT_KERNEL_HPP
