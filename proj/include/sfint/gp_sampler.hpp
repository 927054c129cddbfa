#ifndef SFINT_GP_SAMPLER_HPP
#define SFINT_GP_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "sfint/kernel.hpp"
#include "sfint/model.hpp"
#include "sfint/rng.hpp"
#include "sfint/sampler.hpp"
#include "sfint/spike_slab.hpp"

namespace sfint {

/// Metropolis-within-Gibbs sampler for X = alpha lambda + F + noise, where
/// each active row of F (or the shared effect F*) has a squared-exponential
/// GP prior over the factor-score columns.
///
/// The chain keeps a reference to `data`, which must outlive it.
class GpChain {
public:
    GpChain(const ModelSpec& spec, const DataMatrix& data, std::uint64_t seed, std::uint64_t chain = 0,
            const MhSettings& mh = {});

    const ModelSpec& spec() const noexcept { return spec_; }
    const McmcState& state() const noexcept { return state_; }
    /// Replaces the state and rebuilds the kernel from its lambda.
    void set_state(McmcState state);
    const KernelMatrix& kernel() const noexcept { return kernel_; }
    std::int64_t iteration() const noexcept { return iteration_; }

    /// One sweep: alpha rows, lambda columns by random-walk Metropolis,
    /// interaction effects, sigma2, inclusion probabilities.
    void sweep(const SweepMask& mask = {});

    void update_alpha_row(Index i);
    /// Refreshes the cached active effect rows and their GP log density.
    /// sweep() calls it before the lambda block; call it before driving
    /// update_lambda_column directly.
    void prepare_lambda_updates();
    /// Returns true when the proposal was accepted.
    bool update_lambda_column(Index j);
    /// Row-wise effect prior: z_i from the F-marginalized odds, then F_i.
    void update_effect_row(Index i);
    /// Shared effect prior: F* given the active rows, then every z_i.
    void update_shared_effect();
    void update_sigma2(Index i);
    void update_probabilities();

    /// log-odds of z_i = 1 with F_i integrated out (row-wise effect prior).
    double effect_log_odds(Index i) const;
    /// log of the lambda target restricted to column j, up to a constant.
    double column_log_target(Index j, const Eigen::VectorXd& column, const KernelMatrix& kernel) const;
    /// Residual of row i after the linear factor part.
    Eigen::VectorXd linear_residual(Index i) const;
    InverseGammaParams sigma2_conditional(Index i) const;
    SlabPosterior alpha_conditional(Index i, Index l) const;

    double rw_step() const noexcept { return rw_step_; }
    /// Robbins-Monro step on log(rw_step) toward the target acceptance.
    void adapt_step(double acceptance);
    double last_sweep_acceptance() const noexcept { return last_sweep_acceptance_; }
    const std::vector<std::int64_t>& accepted() const noexcept { return accepted_; }
    const std::vector<std::int64_t>& proposed() const noexcept { return proposed_; }
    void reset_tallies();

private:
    double gp_log_prior(const KernelMatrix& kernel) const;
    void collect_active_rows();

    ModelSpec spec_;
    const DataMatrix& data_;
    MhSettings mh_;
    double length_scale_;
    EffectPrior effect_prior_;
    IndicatorLayout loading_layout_;
    IndicatorLayout interaction_layout_;
    McmcState state_;
    KernelMatrix kernel_;
    Eigen::MatrixXd active_rows_;
    double gp_log_prior_ = 0.0;
    bool kernel_stale_ = false;

    double rw_step_;
    std::int64_t adapt_count_ = 0;
    double last_sweep_acceptance_ = 0.0;
    std::vector<std::int64_t> accepted_;
    std::vector<std::int64_t> proposed_;
    std::int64_t iteration_ = 0;

    Rng rng_alpha_;
    Rng rng_lambda_;
    Rng rng_effect_;
    Rng rng_sigma2_;
    Rng rng_prob_;
};

PosteriorDraws run_gp_chain(const ModelSpec& spec, const DataMatrix& data, const McmcSettings& settings,
                            const MhSettings& mh = {}, const SweepMask& mask = {});

}  // namespace sfint

#endif  // SFINT_GP_SAMPLER_HPP
