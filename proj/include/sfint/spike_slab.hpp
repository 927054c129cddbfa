#ifndef SFINT_SPIKE_SLAB_HPP
#define SFINT_SPIKE_SLAB_HPP

#include <cmath>

#include <Eigen/Core>

#include "sfint/model.hpp"
#include "sfint/rng.hpp"

namespace sfint {

/// Slab-component posterior of one coefficient with a N(0, slab_variance)
/// prior, plus the log marginal-likelihood ratio slab / spike.
struct SlabPosterior {
    double mean;
    double variance;
    double log_bayes_factor;
};

/// Conditional of beta in residual ~ N(beta * regressor, noise_variance I).
template <typename DerivedX, typename DerivedR>
SlabPosterior slab_posterior(const Eigen::MatrixBase<DerivedX>& regressor,
                             const Eigen::MatrixBase<DerivedR>& residual, double noise_variance,
                             double slab_variance)
{
    const double xx = regressor.squaredNorm() / noise_variance;
    const double xr = regressor.dot(residual) / noise_variance;
    const double variance = 1.0 / (1.0 / slab_variance + xx);
    const double mean = variance * xr;
    const double log_bf = 0.5 * std::log(variance / slab_variance) + 0.5 * mean * mean / variance;
    return {mean, variance, log_bf};
}

/// Draws (indicator, coefficient) from the spike-and-slab conditional.
/// The prior inclusion probability may be exactly 0 or 1.
inline double sample_spike_slab(const SlabPosterior& post, double inclusion_prob, int& indicator, Rng& rng)
{
    indicator = rng.bernoulli_logit(logit(inclusion_prob) + post.log_bayes_factor) ? 1 : 0;
    if (indicator == 0) return 0.0;
    return rng.normal(post.mean, std::sqrt(post.variance));
}

/// Prior layout of one indicator matrix (h or z): which entries are fixed,
/// how probabilities are pooled, and the Beta hyperparameters.
struct IndicatorLayout {
    Eigen::MatrixXi fixed;     // -1 free, otherwise 0 or 1
    Eigen::MatrixXi group;     // pooling group id per entry
    Eigen::MatrixXd prior_a;   // per entry (unpooled)
    Eigen::MatrixXd prior_b;
    bool pooled = false;
    std::vector<BetaParams> group_priors;  // per group id (pooled)

    Index rows() const { return fixed.rows(); }
    Index cols() const { return fixed.cols(); }
};

/// Layout of the loading indicators h (m x L) under the spec's strategy.
IndicatorLayout loading_layout(const ModelSpec& spec, Index features);
/// Layout of the interaction indicators z (m x T for MULT, m x 1 for GP).
IndicatorLayout interaction_layout(const ModelSpec& spec, Index features);

/// Starting probabilities: prior means, or the fixed value where degenerate.
Eigen::MatrixXd initial_probabilities(const IndicatorLayout& layout);

/// Conjugate Beta update of the inclusion probabilities given indicators.
/// Fixed entries are left untouched and excluded from pooled counts; empty
/// pools are redrawn from their prior.
void update_probabilities(const Eigen::MatrixXi& indicators, const IndicatorLayout& layout,
                          Eigen::MatrixXd& probs, Rng& rng);

/// Beta parameters of the conditional of entry (row, col) or of its pool.
BetaParams probability_conditional(const Eigen::MatrixXi& indicators, const IndicatorLayout& layout,
                                   Index row, Index col);

/// Spike-and-slab update of coefficients coef(row, :) whose regressors are
/// the rows of design (K x n). target is the part of the observation row
/// not explained by other blocks.
void update_spike_slab_row(Index row, Eigen::MatrixXd& coef, Eigen::MatrixXi& indicators,
                           const Eigen::MatrixXd& probs, const Eigen::MatrixXd& design,
                           const Eigen::VectorXd& target, double noise_variance, double slab_variance,
                           Rng& rng);

/// Slab posterior for coef(row, k) holding the other coefficients fixed.
SlabPosterior spike_slab_conditional(Index row, Index k, const Eigen::MatrixXd& coef,
                                     const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                                     double noise_variance, double slab_variance);

}  // namespace sfint

#endif  // SFINT_SPIKE_SLAB_HPP
