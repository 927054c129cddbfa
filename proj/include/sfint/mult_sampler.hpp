#ifndef SFINT_MULT_SAMPLER_HPP
#define SFINT_MULT_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "sfint/model.hpp"
#include "sfint/rng.hpp"
#include "sfint/sampler.hpp"
#include "sfint/spike_slab.hpp"

namespace sfint {

/// Gibbs sampler for X = alpha lambda + theta eta + noise, where eta holds
/// pairwise products of factor scores (exactly under approach 2, through a
/// N(product, nu) prior under approach 1).
///
/// The chain keeps a reference to `data`, which must outlive it.
class MultChain {
public:
    MultChain(const ModelSpec& spec, const DataMatrix& data, std::uint64_t seed, std::uint64_t chain = 0);

    const ModelSpec& spec() const noexcept { return spec_; }
    const McmcState& state() const noexcept { return state_; }
    /// Replaces the state; eta is recomputed from lambda under approach 2.
    void set_state(McmcState state);
    std::int64_t iteration() const noexcept { return iteration_; }
    const IndicatorLayout& loading_layout() const noexcept { return loading_layout_; }
    const IndicatorLayout& interaction_layout() const noexcept { return interaction_layout_; }

    /// One full sweep: alpha rows, lambda columns, eta columns (approach 1),
    /// theta rows, sigma2, then inclusion probabilities.
    void sweep(const SweepMask& mask = {});

    void update_alpha_row(Index i);
    void update_lambda_column(Index j);
    void update_eta_column(Index j);
    void update_theta_row(Index i);
    void update_sigma2(Index i);
    void update_probabilities();

    SlabPosterior alpha_conditional(Index i, Index l) const;
    SlabPosterior theta_conditional(Index i, Index t) const;
    GaussianParams lambda_conditional(Index l, Index j) const;
    GaussianParams eta_conditional(Index t, Index j) const;
    InverseGammaParams sigma2_conditional(Index i) const;

private:
    Eigen::VectorXd fitted_column(Index j) const;
    void refresh_products(Index j);

    ModelSpec spec_;
    const DataMatrix& data_;
    std::vector<FactorPair> pairs_;
    /// For each factor: (term index, partner factor) of every pair it joins.
    std::vector<std::vector<std::pair<Index, Index>>> partners_;
    IndicatorLayout loading_layout_;
    IndicatorLayout interaction_layout_;
    McmcState state_;
    std::int64_t iteration_ = 0;

    Rng rng_alpha_;
    Rng rng_lambda_;
    Rng rng_eta_;
    Rng rng_theta_;
    Rng rng_sigma2_;
    Rng rng_prob_;
};

PosteriorDraws run_mult_chain(const ModelSpec& spec, const DataMatrix& data, const McmcSettings& settings,
                              const SweepMask& mask = {});

}  // namespace sfint

#endif  // SFINT_MULT_SAMPLER_HPP
