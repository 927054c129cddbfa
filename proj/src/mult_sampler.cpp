#include "sfint/mult_sampler.hpp"

#include <cmath>

#include "sfint/error.hpp"

namespace sfint {

MultChain::MultChain(const ModelSpec& spec, const DataMatrix& data, std::uint64_t seed, std::uint64_t chain)
    : spec_(validate_spec(spec, data.features())),
      data_(data),
      rng_alpha_(seed, chain, Stream::Alpha),
      rng_lambda_(seed, chain, Stream::Lambda),
      rng_eta_(seed, chain, Stream::Eta),
      rng_theta_(seed, chain, Stream::Theta),
      rng_sigma2_(seed, chain, Stream::Sigma2),
      rng_prob_(seed, chain, Stream::Probability)
{
    if (!spec_.is_mult()) throw Error(ErrorCode::SpecConflict, "family / sampler: MultChain needs a MULT family");
    const Index m = data.features();
    const Index n = data.samples();
    const Index factors = spec_.factors;
    pairs_ = interaction_pairs(spec_.factors);
    const auto terms = static_cast<Index>(pairs_.size());
    partners_.resize(static_cast<std::size_t>(factors));
    for (Index t = 0; t < terms; ++t) {
        const FactorPair& p = pairs_[static_cast<std::size_t>(t)];
        partners_[static_cast<std::size_t>(p.first)].push_back({t, p.second});
        partners_[static_cast<std::size_t>(p.second)].push_back({t, p.first});
    }
    loading_layout_ = sfint::loading_layout(spec_, m);
    interaction_layout_ = sfint::interaction_layout(spec_, m);

    Rng init(seed, chain, Stream::Init);
    state_.alpha = Eigen::MatrixXd::Zero(m, factors);
    state_.lambda.resize(factors, n);
    init.fill_normal(state_.lambda);
    state_.theta = Eigen::MatrixXd::Zero(m, terms);
    state_.eta.resize(terms, n);
    for (Index j = 0; j < n; ++j) refresh_products(j);
    state_.sigma2 = Eigen::VectorXd::Ones(m);
    state_.q = initial_probabilities(loading_layout_);
    state_.rho = initial_probabilities(interaction_layout_);
    state_.h.resize(m, factors);
    for (Index l = 0; l < factors; ++l)
        for (Index i = 0; i < m; ++i) state_.h(i, l) = init.bernoulli(state_.q(i, l)) ? 1 : 0;
    state_.z.resize(m, terms);
    for (Index t = 0; t < terms; ++t)
        for (Index i = 0; i < m; ++i) state_.z(i, t) = init.bernoulli(state_.rho(i, t)) ? 1 : 0;
}

void MultChain::set_state(McmcState state)
{
    state_ = std::move(state);
    if (spec_.family == Family::MultApproach2)
        for (Index j = 0; j < state_.lambda.cols(); ++j) refresh_products(j);
}

void MultChain::refresh_products(Index j)
{
    for (std::size_t t = 0; t < pairs_.size(); ++t) {
        const FactorPair& p = pairs_[t];
        state_.eta(static_cast<Index>(t), j) = state_.lambda(p.first, j) * state_.lambda(p.second, j);
    }
}

Eigen::VectorXd MultChain::fitted_column(Index j) const
{
    return state_.alpha * state_.lambda.col(j) + state_.theta * state_.eta.col(j);
}

SlabPosterior MultChain::alpha_conditional(Index i, Index l) const
{
    const Eigen::VectorXd target = data_.values.row(i).transpose() - state_.eta.transpose() * state_.theta.row(i).transpose();
    return spike_slab_conditional(i, l, state_.alpha, state_.lambda, target, state_.sigma2(i), *spec_.omega_alpha);
}

SlabPosterior MultChain::theta_conditional(Index i, Index t) const
{
    const Eigen::VectorXd target = data_.values.row(i).transpose() - state_.lambda.transpose() * state_.alpha.row(i).transpose();
    return spike_slab_conditional(i, t, state_.theta, state_.eta, target, state_.sigma2(i), *spec_.omega_theta);
}

void MultChain::update_alpha_row(Index i)
{
    const Eigen::VectorXd target = data_.values.row(i).transpose() - state_.eta.transpose() * state_.theta.row(i).transpose();
    update_spike_slab_row(i, state_.alpha, state_.h, state_.q, state_.lambda, target, state_.sigma2(i),
                          *spec_.omega_alpha, rng_alpha_);
}

void MultChain::update_theta_row(Index i)
{
    if (state_.theta.cols() == 0) return;
    const Eigen::VectorXd target = data_.values.row(i).transpose() - state_.lambda.transpose() * state_.alpha.row(i).transpose();
    update_spike_slab_row(i, state_.theta, state_.z, state_.rho, state_.eta, target, state_.sigma2(i),
                          *spec_.omega_theta, rng_theta_);
}

GaussianParams MultChain::lambda_conditional(Index l, Index j) const
{
    const auto& partners = partners_[static_cast<std::size_t>(l)];
    const bool exact_product = spec_.family == Family::MultApproach2;

    // Effective regressor of lambda(l, j) in every feature's mean.
    Eigen::VectorXd coef = state_.alpha.col(l);
    if (exact_product)
        for (const auto& [t, partner] : partners) coef += state_.theta.col(t) * state_.lambda(partner, j);

    const Eigen::VectorXd residual =
        data_.values.col(j) - fitted_column(j) + coef * state_.lambda(l, j);
    const Eigen::ArrayXd inv_var = state_.sigma2.array().inverse();
    double precision = 1.0 + (coef.array().square() * inv_var).sum();
    double numerator = (coef.array() * residual.array() * inv_var).sum();
    if (!exact_product) {
        const double nu = *spec_.nu;
        for (const auto& [t, partner] : partners) {
            const double x = state_.lambda(partner, j);
            precision += x * x / nu;
            numerator += x * state_.eta(t, j) / nu;
        }
    }
    return {numerator / precision, 1.0 / precision};
}

void MultChain::update_lambda_column(Index j)
{
    for (Index l = 0; l < spec_.factors; ++l) {
        const GaussianParams c = lambda_conditional(l, j);
        state_.lambda(l, j) = rng_lambda_.normal(c.mean, std::sqrt(c.variance));
        if (spec_.family == Family::MultApproach2) refresh_products(j);
    }
}

GaussianParams MultChain::eta_conditional(Index t, Index j) const
{
    const double nu = spec_.nu.value_or(0.0);
    const FactorPair& p = pairs_[static_cast<std::size_t>(t)];
    const double prior_mean = state_.lambda(p.first, j) * state_.lambda(p.second, j);
    const Eigen::VectorXd residual = data_.values.col(j) - fitted_column(j) + state_.theta.col(t) * state_.eta(t, j);
    const Eigen::ArrayXd inv_var = state_.sigma2.array().inverse();
    const double precision = 1.0 / nu + (state_.theta.col(t).array().square() * inv_var).sum();
    const double numerator = prior_mean / nu + (state_.theta.col(t).array() * residual.array() * inv_var).sum();
    return {numerator / precision, 1.0 / precision};
}

void MultChain::update_eta_column(Index j)
{
    if (spec_.family != Family::MultApproach1) return;
    for (Index t = 0; t < state_.eta.rows(); ++t) {
        const GaussianParams c = eta_conditional(t, j);
        state_.eta(t, j) = rng_eta_.normal(c.mean, std::sqrt(c.variance));
    }
}

InverseGammaParams MultChain::sigma2_conditional(Index i) const
{
    const Eigen::RowVectorXd residual =
        data_.values.row(i) - state_.alpha.row(i) * state_.lambda - state_.theta.row(i) * state_.eta;
    const double n = static_cast<double>(data_.samples());
    return {spec_.sigma2_prior.shape + 0.5 * n, spec_.sigma2_prior.scale + 0.5 * residual.squaredNorm()};
}

void MultChain::update_sigma2(Index i)
{
    const InverseGammaParams c = sigma2_conditional(i);
    state_.sigma2(i) = rng_sigma2_.inverse_gamma(c.shape, c.scale);
}

void MultChain::update_probabilities()
{
    sfint::update_probabilities(state_.h, loading_layout_, state_.q, rng_prob_);
    if (state_.z.cols() > 0) sfint::update_probabilities(state_.z, interaction_layout_, state_.rho, rng_prob_);
}

void MultChain::sweep(const SweepMask& mask)
{
    const Index m = data_.features();
    const Index n = data_.samples();
    if (mask.alpha)
        for (Index i = 0; i < m; ++i) update_alpha_row(i);
    if (mask.lambda)
        for (Index j = 0; j < n; ++j) update_lambda_column(j);
    if (mask.eta && spec_.family == Family::MultApproach1)
        for (Index j = 0; j < n; ++j) update_eta_column(j);
    if (mask.theta)
        for (Index i = 0; i < m; ++i) update_theta_row(i);
    if (mask.sigma2)
        for (Index i = 0; i < m; ++i) update_sigma2(i);
    if (mask.probabilities) update_probabilities();
    ++iteration_;
}

PosteriorDraws run_mult_chain(const ModelSpec& spec, const DataMatrix& data, const McmcSettings& settings,
                              const SweepMask& mask)
{
    if (settings.thin < 1 || settings.burn_in < 0 || settings.burn_in >= settings.iters)
        throw Error(ErrorCode::InvalidArgument, "require 0 <= burn_in < iters and thin >= 1");
    MultChain chain(spec, data, settings.seed, settings.chain);
    PosteriorDraws draws;
    draws.family = chain.spec().family;
    draws.total_iters = settings.iters;
    draws.burn_in = settings.burn_in;
    draws.thin = settings.thin;
    draws.states.reserve(static_cast<std::size_t>(retained_count(settings.iters, settings.burn_in, settings.thin)));
    for (int it = 1; it <= settings.iters; ++it) {
        chain.sweep(mask);
        if (it > settings.burn_in && (it - settings.burn_in) % settings.thin == 0)
            draws.states.push_back(chain.state());
    }
    return draws;
}

}  // namespace sfint
