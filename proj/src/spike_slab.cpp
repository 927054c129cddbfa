#include "sfint/spike_slab.hpp"

namespace sfint {

namespace {

constexpr int kGroupCount = 3;

IndicatorLayout make_layout(Index rows, Index cols)
{
    IndicatorLayout layout;
    layout.fixed = Eigen::MatrixXi::Constant(rows, cols, -1);
    layout.group = Eigen::MatrixXi::Zero(rows, cols);
    layout.prior_a.resize(rows, cols);
    layout.prior_b.resize(rows, cols);
    return layout;
}

}  // namespace

IndicatorLayout loading_layout(const ModelSpec& spec, Index features)
{
    IndicatorLayout layout = make_layout(features, spec.factors);
    for (Index i = 0; i < features; ++i) {
        for (Index l = 0; l < spec.factors; ++l) {
            const PriorGroup g = loading_group(spec, i, l);
            const BetaParams p = spec.gamma_params.resolve(i, l, g);
            layout.group(i, l) = static_cast<int>(g);
            layout.prior_a(i, l) = p.a;
            layout.prior_b(i, l) = p.b;
        }
    }
    for (const auto& [key, value] : spec.degenerate_q) {
        if (key.first < features) layout.fixed(key.first, key.second) = value;
    }
    layout.pooled = spec.loading_prior.value_or(LoadingPrior::PerEntry) == LoadingPrior::Grouped;
    for (int g = 0; g < kGroupCount; ++g) {
        auto it = spec.gamma_params.per_group.find(static_cast<PriorGroup>(g));
        layout.group_priors.push_back(it != spec.gamma_params.per_group.end() ? it->second : spec.gamma_params.base);
    }
    return layout;
}

IndicatorLayout interaction_layout(const ModelSpec& spec, Index features)
{
    const Index cols = spec.indicator_columns();
    const InteractionPrior strategy = spec.interaction_prior.value_or(InteractionPrior::PerFeature);
    IndicatorLayout layout = make_layout(features, cols);
    for (Index i = 0; i < features; ++i) {
        const PriorGroup g = interaction_group(spec, i);
        for (Index t = 0; t < cols; ++t) {
            const BetaParams p = spec.beta_params.resolve(i, t, g);
            layout.group(i, t) = strategy == InteractionPrior::Global ? 0 : static_cast<int>(g);
            layout.prior_a(i, t) = p.a;
            layout.prior_b(i, t) = p.b;
        }
    }
    for (const auto& [key, value] : spec.degenerate_rho) {
        if (key.first < features) layout.fixed(key.first, key.second) = value;
    }
    layout.pooled = strategy != InteractionPrior::PerFeature;
    if (strategy == InteractionPrior::Global) {
        layout.group_priors = {spec.beta_params.base};
    } else {
        for (int g = 0; g < kGroupCount; ++g) {
            auto it = spec.beta_params.per_group.find(static_cast<PriorGroup>(g));
            layout.group_priors.push_back(it != spec.beta_params.per_group.end() ? it->second : spec.beta_params.base);
        }
    }
    return layout;
}

Eigen::MatrixXd initial_probabilities(const IndicatorLayout& layout)
{
    Eigen::MatrixXd probs(layout.rows(), layout.cols());
    for (Index c = 0; c < layout.cols(); ++c) {
        for (Index r = 0; r < layout.rows(); ++r) {
            if (layout.fixed(r, c) >= 0) {
                probs(r, c) = layout.fixed(r, c);
            } else if (layout.pooled) {
                const BetaParams& p = layout.group_priors[static_cast<std::size_t>(layout.group(r, c))];
                probs(r, c) = p.a / (p.a + p.b);
            } else {
                probs(r, c) = layout.prior_a(r, c) / (layout.prior_a(r, c) + layout.prior_b(r, c));
            }
        }
    }
    return probs;
}

BetaParams probability_conditional(const Eigen::MatrixXi& indicators, const IndicatorLayout& layout,
                                   Index row, Index col)
{
    if (!layout.pooled) {
        const double ind = indicators(row, col);
        return {layout.prior_a(row, col) + ind, layout.prior_b(row, col) + 1.0 - ind};
    }
    const int g = layout.group(row, col);
    double ones = 0.0;
    double total = 0.0;
    for (Index c = 0; c < layout.cols(); ++c) {
        for (Index r = 0; r < layout.rows(); ++r) {
            if (layout.fixed(r, c) >= 0 || layout.group(r, c) != g) continue;
            ones += indicators(r, c);
            total += 1.0;
        }
    }
    const BetaParams& p = layout.group_priors[static_cast<std::size_t>(g)];
    return {p.a + ones, p.b + total - ones};
}

void update_probabilities(const Eigen::MatrixXi& indicators, const IndicatorLayout& layout,
                          Eigen::MatrixXd& probs, Rng& rng)
{
    if (!layout.pooled) {
        for (Index c = 0; c < layout.cols(); ++c) {
            for (Index r = 0; r < layout.rows(); ++r) {
                if (layout.fixed(r, c) >= 0) continue;
                const double ind = indicators(r, c);
                probs(r, c) = rng.beta(layout.prior_a(r, c) + ind, layout.prior_b(r, c) + 1.0 - ind);
            }
        }
        return;
    }

    const std::size_t groups = layout.group_priors.size();
    std::vector<double> ones(groups, 0.0);
    std::vector<double> total(groups, 0.0);
    for (Index c = 0; c < layout.cols(); ++c) {
        for (Index r = 0; r < layout.rows(); ++r) {
            if (layout.fixed(r, c) >= 0) continue;
            const auto g = static_cast<std::size_t>(layout.group(r, c));
            ones[g] += indicators(r, c);
            total[g] += 1.0;
        }
    }
    std::vector<double> drawn(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const BetaParams& p = layout.group_priors[g];
        drawn[g] = rng.beta(p.a + ones[g], p.b + total[g] - ones[g]);
    }
    for (Index c = 0; c < layout.cols(); ++c) {
        for (Index r = 0; r < layout.rows(); ++r) {
            if (layout.fixed(r, c) >= 0) continue;
            probs(r, c) = drawn[static_cast<std::size_t>(layout.group(r, c))];
        }
    }
}

SlabPosterior spike_slab_conditional(Index row, Index k, const Eigen::MatrixXd& coef,
                                     const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                                     double noise_variance, double slab_variance)
{
    Eigen::VectorXd residual = target - design.transpose() * coef.row(row).transpose();
    residual += coef(row, k) * design.row(k).transpose();
    return slab_posterior(design.row(k).transpose(), residual, noise_variance, slab_variance);
}

void update_spike_slab_row(Index row, Eigen::MatrixXd& coef, Eigen::MatrixXi& indicators,
                           const Eigen::MatrixXd& probs, const Eigen::MatrixXd& design,
                           const Eigen::VectorXd& target, double noise_variance, double slab_variance,
                           Rng& rng)
{
    Eigen::VectorXd residual = target - design.transpose() * coef.row(row).transpose();
    for (Index k = 0; k < coef.cols(); ++k) {
        residual += coef(row, k) * design.row(k).transpose();
        const SlabPosterior post = slab_posterior(design.row(k).transpose(), residual, noise_variance, slab_variance);
        int ind = 0;
        coef(row, k) = sample_spike_slab(post, probs(row, k), ind, rng);
        indicators(row, k) = ind;
        residual -= coef(row, k) * design.row(k).transpose();
    }
}

}  // namespace sfint
