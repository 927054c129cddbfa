#include "sfint/kernel.hpp"

#include "sfint/error.hpp"

namespace sfint {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& a, const char* what)
{
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::CholeskyFailure, std::string("Cholesky factorization failed for ") + what);
    return llt;
}

double log_det_from_lower(const Eigen::MatrixXd& lower)
{
    return 2.0 * lower.diagonal().array().log().sum();
}

}  // namespace

KernelMatrix::KernelMatrix(Eigen::MatrixXd k, double length_scale)
    : k_(std::move(k)), length_scale_(length_scale)
{
    const Eigen::Index n = k_.rows();
    const double base = k_.trace() / static_cast<double>(n);
    for (double scale = 1e-10; scale <= 1e-4 * (1.0 + 1e-9); scale *= 10.0) {
        const double jitter = scale * base;
        Eigen::MatrixXd a = k_;
        a.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all() &&
            llt.matrixLLT().diagonal().allFinite()) {
            jitter_ = jitter;
            lower_ = llt.matrixL();
            log_det_ = log_det_from_lower(lower_);
            return;
        }
    }
    throw Error(ErrorCode::CholeskyFailure, "kernel matrix is not positive definite at maximum jitter");
}

KernelMatrix KernelMatrix::squared_exponential(const Eigen::MatrixXd& lambda, double length_scale)
{
    if (!(length_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "length scale must be positive");
    if (lambda.cols() < 1) throw Error(ErrorCode::InvalidArgument, "kernel needs at least one sample");
    return KernelMatrix(se_kernel_matrix(lambda, length_scale), length_scale);
}

KernelMatrix KernelMatrix::from_covariance(Eigen::MatrixXd k, double length_scale)
{
    if (k.rows() != k.cols() || k.rows() < 1) throw Error(ErrorCode::ShapeMismatch, "covariance must be square");
    return KernelMatrix(std::move(k), length_scale);
}

Eigen::MatrixXd KernelMatrix::covariance() const
{
    Eigen::MatrixXd c = k_;
    c.diagonal().array() += jitter_;
    return c;
}

double KernelMatrix::log_density(const Eigen::VectorXd& f) const
{
    const Eigen::VectorXd w = lower_.triangularView<Eigen::Lower>().solve(f);
    return -0.5 * w.squaredNorm() - 0.5 * log_det_ - 0.5 * static_cast<double>(size()) * kLog2Pi;
}

double KernelMatrix::log_density_rows(const Eigen::MatrixXd& rows) const
{
    if (rows.rows() == 0) return 0.0;
    const Eigen::MatrixXd w = lower_.triangularView<Eigen::Lower>().solve(rows.transpose());
    const double a = static_cast<double>(rows.rows());
    return -0.5 * w.squaredNorm() - 0.5 * a * log_det_ - 0.5 * a * static_cast<double>(size()) * kLog2Pi;
}

Eigen::VectorXd KernelMatrix::sample(Rng& rng) const
{
    return lower_.triangularView<Eigen::Lower>() * rng.normal_vector(size());
}

bool KernelMatrix::operator==(const KernelMatrix& other) const
{
    return k_ == other.k_ && lower_ == other.lower_ && jitter_ == other.jitter_ &&
           length_scale_ == other.length_scale_;
}

NoisyKernel::NoisyKernel(const KernelMatrix& kernel, double sigma2)
    : kernel_(&kernel), sigma2_(sigma2)
{
    Eigen::MatrixXd a = kernel.covariance();
    a.diagonal().array() += sigma2;
    llt_ = factor_or_throw(a, "K + sigma2 I");
    log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double NoisyKernel::log_ratio(const Eigen::VectorXd& residual) const
{
    if (residual.size() != kernel_->size())
        throw Error(ErrorCode::ShapeMismatch, "residual length does not match kernel size");
    const auto n = static_cast<double>(residual.size());
    const Eigen::VectorXd w = llt_.matrixL().solve(residual);
    const double log_alt = -0.5 * w.squaredNorm() - 0.5 * log_det_;
    const double log_null = -0.5 * residual.squaredNorm() / sigma2_ - 0.5 * n * std::log(sigma2_);
    return log_alt - log_null;
}

Eigen::VectorXd NoisyKernel::sample_conditional(const Eigen::VectorXd& residual, Rng& rng) const
{
    if (residual.size() != kernel_->size())
        throw Error(ErrorCode::ShapeMismatch, "residual length does not match kernel size");
    const Eigen::VectorXd prior = kernel_->sample(rng);
    const Eigen::VectorXd noise = std::sqrt(sigma2_) * rng.normal_vector(residual.size());
    const Eigen::VectorXd w = llt_.solve(residual - prior - noise);
    return prior + kernel_->matrix() * w + kernel_->jitter() * w;
}

double gp_marginal_loglik_ratio(const Eigen::VectorXd& residual, const KernelMatrix& kernel, double sigma2)
{
    return NoisyKernel(kernel, sigma2).log_ratio(residual);
}

GaussianConditional gp_conditional(const Eigen::VectorXd& residual, const KernelMatrix& kernel, double sigma2)
{
    const Eigen::MatrixXd c = kernel.covariance();
    Eigen::MatrixXd a = c;
    a.diagonal().array() += sigma2;
    const Eigen::LLT<Eigen::MatrixXd> llt = factor_or_throw(a, "K + sigma2 I");
    GaussianConditional out;
    out.mean = c * llt.solve(residual);
    out.covariance = c - c * llt.solve(c);
    return out;
}

Eigen::VectorXd sample_gp_conditional(const Eigen::VectorXd& residual, const KernelMatrix& kernel,
                                      double sigma2, Rng& rng)
{
    return NoisyKernel(kernel, sigma2).sample_conditional(residual, rng);
}

}  // namespace sfint
