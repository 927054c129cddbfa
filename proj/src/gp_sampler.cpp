#include "sfint/gp_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "sfint/error.hpp"

namespace sfint {

GpChain::GpChain(const ModelSpec& spec, const DataMatrix& data, std::uint64_t seed, std::uint64_t chain,
                 const MhSettings& mh)
    : spec_(validate_spec(spec, data.features())),
      data_(data),
      mh_(mh),
      rw_step_(mh.rw_step),
      rng_alpha_(seed, chain, Stream::Alpha),
      rng_lambda_(seed, chain, Stream::Lambda),
      rng_effect_(seed, chain, Stream::Interaction),
      rng_sigma2_(seed, chain, Stream::Sigma2),
      rng_prob_(seed, chain, Stream::Probability)
{
    if (spec_.is_mult()) throw Error(ErrorCode::SpecConflict, "family / sampler: GpChain needs the GP family");
    if (mh.rw_step < 0.0) throw Error(ErrorCode::InvalidArgument, "rw_step must be nonnegative");
    const Index m = data.features();
    const Index n = data.samples();
    length_scale_ = *spec_.length_scale;
    effect_prior_ = spec_.effect_prior();
    loading_layout_ = sfint::loading_layout(spec_, m);
    interaction_layout_ = sfint::interaction_layout(spec_, m);

    Rng init(seed, chain, Stream::Init);
    state_.alpha = Eigen::MatrixXd::Zero(m, spec_.factors);
    state_.lambda.resize(spec_.factors, n);
    init.fill_normal(state_.lambda);
    state_.effect = Eigen::MatrixXd::Zero(m, n);
    if (effect_prior_ == EffectPrior::Shared) state_.shared_effect = Eigen::VectorXd::Zero(n);
    state_.sigma2 = Eigen::VectorXd::Ones(m);
    state_.q = initial_probabilities(loading_layout_);
    state_.rho = initial_probabilities(interaction_layout_);
    state_.h.resize(m, spec_.factors);
    for (Index l = 0; l < spec_.factors; ++l)
        for (Index i = 0; i < m; ++i) state_.h(i, l) = init.bernoulli(state_.q(i, l)) ? 1 : 0;
    state_.z.resize(m, 1);
    for (Index i = 0; i < m; ++i) state_.z(i, 0) = init.bernoulli(state_.rho(i, 0)) ? 1 : 0;

    kernel_ = KernelMatrix::squared_exponential(state_.lambda, length_scale_);
    accepted_.assign(static_cast<std::size_t>(n), 0);
    proposed_.assign(static_cast<std::size_t>(n), 0);
}

void GpChain::set_state(McmcState state)
{
    state_ = std::move(state);
    kernel_ = KernelMatrix::squared_exponential(state_.lambda, length_scale_);
}

Eigen::VectorXd GpChain::linear_residual(Index i) const
{
    return data_.values.row(i).transpose() - state_.lambda.transpose() * state_.alpha.row(i).transpose();
}

SlabPosterior GpChain::alpha_conditional(Index i, Index l) const
{
    const Eigen::VectorXd target = (data_.values.row(i) - state_.effect.row(i)).transpose();
    return spike_slab_conditional(i, l, state_.alpha, state_.lambda, target, state_.sigma2(i), *spec_.omega);
}

void GpChain::update_alpha_row(Index i)
{
    const Eigen::VectorXd target = (data_.values.row(i) - state_.effect.row(i)).transpose();
    update_spike_slab_row(i, state_.alpha, state_.h, state_.q, state_.lambda, target, state_.sigma2(i),
                          *spec_.omega, rng_alpha_);
}

void GpChain::collect_active_rows()
{
    if (effect_prior_ == EffectPrior::Shared) {
        active_rows_.resize(0, data_.samples());
        return;
    }
    const Index active = state_.z.col(0).sum();
    active_rows_.resize(active, data_.samples());
    Index k = 0;
    for (Index i = 0; i < state_.z.rows(); ++i)
        if (state_.z(i, 0) == 1) active_rows_.row(k++) = state_.effect.row(i);
}

double GpChain::gp_log_prior(const KernelMatrix& kernel) const
{
    if (mh_.prior_only) return 0.0;
    if (effect_prior_ == EffectPrior::Shared) return kernel.log_density(state_.shared_effect);
    return kernel.log_density_rows(active_rows_);
}

double GpChain::column_log_target(Index j, const Eigen::VectorXd& column, const KernelMatrix& kernel) const
{
    double value = -0.5 * column.squaredNorm();
    if (mh_.prior_only) return value;
    const Eigen::ArrayXd resid =
        (data_.values.col(j) - state_.alpha * column - state_.effect.col(j)).array();
    value -= 0.5 * (resid.square() / state_.sigma2.array()).sum();
    value += gp_log_prior(kernel);
    return value;
}

void GpChain::prepare_lambda_updates()
{
    collect_active_rows();
    gp_log_prior_ = gp_log_prior(kernel_);
}

bool GpChain::update_lambda_column(Index j)
{
    const Index factors = spec_.factors;
    const Eigen::VectorXd current = state_.lambda.col(j);
    const Eigen::VectorXd proposal = current + rw_step_ * rng_lambda_.normal_vector(factors);
    const double log_u = std::log(rng_lambda_.uniform());

    const bool gp_term = !mh_.prior_only && (effect_prior_ == EffectPrior::Shared || active_rows_.rows() > 0);
    auto local_terms = [&](const Eigen::VectorXd& column) {
        double value = -0.5 * column.squaredNorm();
        if (mh_.prior_only) return value;
        const Eigen::ArrayXd resid =
            (data_.values.col(j) - state_.alpha * column - state_.effect.col(j)).array();
        return value - 0.5 * (resid.square() / state_.sigma2.array()).sum();
    };

    double log_ratio = local_terms(proposal) - local_terms(current);
    KernelMatrix proposed_kernel;
    double proposed_gp = 0.0;
    if (gp_term) {
        Eigen::MatrixXd lambda = state_.lambda;
        lambda.col(j) = proposal;
        try {
            proposed_kernel = KernelMatrix::squared_exponential(lambda, length_scale_);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CholeskyFailure) throw;
            ++proposed_[static_cast<std::size_t>(j)];
            return false;
        }
        proposed_gp = gp_log_prior(proposed_kernel);
        log_ratio += proposed_gp - gp_log_prior_;
    }

    ++proposed_[static_cast<std::size_t>(j)];
    if (!(log_u < log_ratio)) return false;
    ++accepted_[static_cast<std::size_t>(j)];
    state_.lambda.col(j) = proposal;
    if (gp_term) {
        kernel_ = std::move(proposed_kernel);
        gp_log_prior_ = proposed_gp;
    } else {
        kernel_stale_ = true;
    }
    return true;
}

double GpChain::effect_log_odds(Index i) const
{
    const double rho = state_.rho(i, 0);
    if (rho <= 0.0) return logit(rho);
    return logit(rho) + gp_marginal_loglik_ratio(linear_residual(i), kernel_, state_.sigma2(i));
}

void GpChain::update_effect_row(Index i)
{
    const double rho = state_.rho(i, 0);
    if (rho <= 0.0) {
        state_.z(i, 0) = 0;
        state_.effect.row(i).setZero();
        return;
    }
    const Eigen::VectorXd residual = linear_residual(i);
    const NoisyKernel noisy(kernel_, state_.sigma2(i));
    const double log_odds = logit(rho) + noisy.log_ratio(residual);
    if (rng_effect_.bernoulli_logit(log_odds)) {
        state_.z(i, 0) = 1;
        state_.effect.row(i) = noisy.sample_conditional(residual, rng_effect_).transpose();
    } else {
        state_.z(i, 0) = 0;
        state_.effect.row(i).setZero();
    }
}

void GpChain::update_shared_effect()
{
    const Index m = data_.features();
    const Index n = data_.samples();
    double precision = 0.0;
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(n);
    for (Index i = 0; i < m; ++i) {
        if (state_.z(i, 0) != 1) continue;
        precision += 1.0 / state_.sigma2(i);
        weighted += linear_residual(i) / state_.sigma2(i);
    }
    if (precision > 0.0) {
        state_.shared_effect = NoisyKernel(kernel_, 1.0 / precision).sample_conditional(weighted / precision, rng_effect_);
    } else {
        state_.shared_effect = kernel_.sample(rng_effect_);
    }

    for (Index i = 0; i < m; ++i) {
        const double rho = state_.rho(i, 0);
        int z = 0;
        if (rho > 0.0) {
            const Eigen::VectorXd residual = linear_residual(i);
            const double gain = residual.squaredNorm() - (residual - state_.shared_effect).squaredNorm();
            z = rng_effect_.bernoulli_logit(logit(rho) + 0.5 * gain / state_.sigma2(i)) ? 1 : 0;
        }
        state_.z(i, 0) = z;
        if (z == 1)
            state_.effect.row(i) = state_.shared_effect.transpose();
        else
            state_.effect.row(i).setZero();
    }
}

InverseGammaParams GpChain::sigma2_conditional(Index i) const
{
    const Eigen::RowVectorXd residual = data_.values.row(i) - state_.alpha.row(i) * state_.lambda - state_.effect.row(i);
    const double n = static_cast<double>(data_.samples());
    return {spec_.sigma2_prior.shape + 0.5 * n, spec_.sigma2_prior.scale + 0.5 * residual.squaredNorm()};
}

void GpChain::update_sigma2(Index i)
{
    const InverseGammaParams c = sigma2_conditional(i);
    state_.sigma2(i) = rng_sigma2_.inverse_gamma(c.shape, c.scale);
}

void GpChain::update_probabilities()
{
    sfint::update_probabilities(state_.h, loading_layout_, state_.q, rng_prob_);
    sfint::update_probabilities(state_.z, interaction_layout_, state_.rho, rng_prob_);
}

void GpChain::adapt_step(double acceptance)
{
    ++adapt_count_;
    const double gain = std::min(1.0, 5.0 * std::pow(static_cast<double>(adapt_count_), -0.6));
    rw_step_ *= std::exp(gain * (acceptance - mh_.target_accept));
}

void GpChain::reset_tallies()
{
    std::fill(accepted_.begin(), accepted_.end(), 0);
    std::fill(proposed_.begin(), proposed_.end(), 0);
}

void GpChain::sweep(const SweepMask& mask)
{
    const Index m = data_.features();
    const Index n = data_.samples();
    if (mask.alpha)
        for (Index i = 0; i < m; ++i) update_alpha_row(i);
    if (mask.lambda) {
        prepare_lambda_updates();
        std::int64_t accepted = 0;
        for (Index j = 0; j < n; ++j) accepted += update_lambda_column(j) ? 1 : 0;
        last_sweep_acceptance_ = static_cast<double>(accepted) / static_cast<double>(n);
        if (kernel_stale_) {
            kernel_ = KernelMatrix::squared_exponential(state_.lambda, length_scale_);
            kernel_stale_ = false;
        }
    }
    if (mask.effect) {
        if (effect_prior_ == EffectPrior::Shared)
            update_shared_effect();
        else
            for (Index i = 0; i < m; ++i) update_effect_row(i);
    }
    if (mask.sigma2)
        for (Index i = 0; i < m; ++i) update_sigma2(i);
    if (mask.probabilities) update_probabilities();
    ++iteration_;
}

PosteriorDraws run_gp_chain(const ModelSpec& spec, const DataMatrix& data, const McmcSettings& settings,
                            const MhSettings& mh, const SweepMask& mask)
{
    if (settings.thin < 1 || settings.burn_in < 0 || settings.burn_in >= settings.iters)
        throw Error(ErrorCode::InvalidArgument, "require 0 <= burn_in < iters and thin >= 1");
    GpChain chain(spec, data, settings.seed, settings.chain, mh);
    PosteriorDraws draws;
    draws.family = Family::Gp;
    draws.total_iters = settings.iters;
    draws.burn_in = settings.burn_in;
    draws.thin = settings.thin;
    draws.states.reserve(static_cast<std::size_t>(retained_count(settings.iters, settings.burn_in, settings.thin)));
    if (settings.burn_in == 0) chain.reset_tallies();
    for (int it = 1; it <= settings.iters; ++it) {
        chain.sweep(mask);
        if (it <= settings.burn_in) {
            if (mh.adapt && mask.lambda) chain.adapt_step(chain.last_sweep_acceptance());
            if (it == settings.burn_in) chain.reset_tallies();
            continue;
        }
        if ((it - settings.burn_in) % settings.thin == 0) draws.states.push_back(chain.state());
    }
    draws.mh_accepted = chain.accepted();
    draws.mh_proposed = chain.proposed();
    draws.rw_step = chain.rw_step();
    return draws;
}

}  // namespace sfint
