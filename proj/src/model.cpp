#include "sfint/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sfint/error.hpp"

namespace sfint {

namespace {

[[noreturn]] void conflict(const std::string& first, const std::string& second,
                           const std::string& detail)
{
    throw Error(ErrorCode::SpecConflict, first + " / " + second + ": " + detail);
}

void require_positive(const std::optional<double>& value, const std::string& name)
{
    if (value && !(*value > 0.0)) conflict(name, name, "must be positive");
}

void require_positive(const BetaTable& table, const std::string& name)
{
    auto check = [&](const BetaParams& p) {
        if (!(p.a > 0.0 && p.b > 0.0)) conflict(name, name, "Beta parameters must be positive");
    };
    check(table.base);
    for (const auto& [group, p] : table.per_group) check(p);
    for (const auto& [entry, p] : table.per_entry) check(p);
}

}  // namespace

DataMatrix standardize_rows(const Eigen::MatrixXd& raw, std::vector<std::string> feature_ids,
                            std::vector<std::string> sample_ids)
{
    const Index m = raw.rows();
    const Index n = raw.cols();
    if (m < 1 || n < 2)
        throw Error(ErrorCode::ShapeMismatch, "data matrix needs at least one row and two columns");
    if (!feature_ids.empty() && static_cast<Index>(feature_ids.size()) != m)
        throw Error(ErrorCode::ShapeMismatch, "feature id count does not match rows");
    if (!sample_ids.empty() && static_cast<Index>(sample_ids.size()) != n)
        throw Error(ErrorCode::ShapeMismatch, "sample id count does not match columns");
    if (!raw.allFinite()) throw Error(ErrorCode::InvalidArgument, "data contains non-finite entries");

    DataMatrix out;
    out.values.resize(m, n);
    for (Index i = 0; i < m; ++i) {
        const double mean = raw.row(i).mean();
        const Eigen::RowVectorXd centered = raw.row(i).array() - mean;
        const double var = centered.squaredNorm() / static_cast<double>(n - 1);
        if (!(var > 0.0)) throw Error(ErrorCode::ConstantRow, "row " + std::to_string(i) + " has zero variance");
        out.values.row(i) = centered / std::sqrt(var);
    }
    if (feature_ids.empty())
        for (Index i = 0; i < m; ++i) feature_ids.push_back("f" + std::to_string(i));
    if (sample_ids.empty())
        for (Index j = 0; j < n; ++j) sample_ids.push_back("s" + std::to_string(j));
    out.feature_ids = std::move(feature_ids);
    out.sample_ids = std::move(sample_ids);
    return out;
}

DataMatrix standardize_rows(const DataMatrix& raw)
{
    return standardize_rows(raw.values, raw.feature_ids, raw.sample_ids);
}

int interaction_pair_count(int factors)
{
    if (factors < 2)
        throw Error(ErrorCode::InvalidFactorCount, "at least two factors are required, got " + std::to_string(factors));
    return factors * (factors - 1) / 2;
}

std::vector<FactorPair> interaction_pairs(int factors)
{
    std::vector<FactorPair> pairs;
    pairs.reserve(static_cast<std::size_t>(interaction_pair_count(factors)));
    for (int a = 0; a < factors; ++a)
        for (int b = a + 1; b < factors; ++b) pairs.push_back({a, b});
    return pairs;
}

GpVariantPriors gp_variant_priors(int variant)
{
    switch (variant) {
    case 1: return {LoadingPrior::PerEntry, EffectPrior::RowWise, InteractionPrior::PerFeature};
    case 2: return {LoadingPrior::PerEntry, EffectPrior::Shared, InteractionPrior::PerFeature};
    case 3: return {LoadingPrior::PerEntry, EffectPrior::RowWise, InteractionPrior::Global};
    case 4: return {LoadingPrior::PerEntry, EffectPrior::Shared, InteractionPrior::Global};
    case 5: return {LoadingPrior::Grouped, EffectPrior::RowWise, InteractionPrior::Grouped};
    default:
        throw Error(ErrorCode::SpecConflict, "gp_variant / gp_variant: must be in 1..5, got " + std::to_string(variant));
    }
}

std::optional<int> gp_variant_of(const GpVariantPriors& priors)
{
    for (int v = 1; v <= 5; ++v)
        if (gp_variant_priors(v) == priors) return v;
    return std::nullopt;
}

BetaParams BetaTable::resolve(Index row, Index col, PriorGroup group) const
{
    if (auto it = per_entry.find({row, col}); it != per_entry.end()) return it->second;
    if (auto it = per_group.find(group); it != per_group.end()) return it->second;
    return base;
}

double ModelSpec::loading_slab_variance() const
{
    const auto& v = is_mult() ? omega_alpha : omega;
    return v.value_or(10.0);
}

EffectPrior ModelSpec::effect_prior() const
{
    if (!gp_variant) return EffectPrior::RowWise;
    return gp_variant_priors(*gp_variant).effect;
}

ModelSpec validate_spec(ModelSpec spec, std::optional<Index> feature_count)
{
    if (spec.factors < 2)
        throw Error(ErrorCode::InvalidFactorCount, "at least two factors are required, got " + std::to_string(spec.factors));

    if (spec.is_mult()) {
        if (spec.gp_variant) conflict("family", "gp_variant", "gp_variant applies to the GP family only");
        if (spec.omega) conflict("family", "omega", "omega applies to the GP family only; use omega_alpha");
        if (spec.length_scale) conflict("family", "length_scale", "length_scale applies to the GP family only");
        if (spec.family == Family::MultApproach2 && spec.nu)
            conflict("family", "nu", "nu applies to approach 1 only");
        if (spec.family == Family::MultApproach1 && !spec.nu) spec.nu = 1e-5;
        if (!spec.omega_alpha) spec.omega_alpha = 10.0;
        if (!spec.omega_theta) spec.omega_theta = 10.0;
        if (!spec.loading_prior) spec.loading_prior = LoadingPrior::PerEntry;
        if (!spec.interaction_prior) spec.interaction_prior = InteractionPrior::PerFeature;
    } else {
        if (spec.nu) conflict("family", "nu", "nu applies to multiplicative approach 1 only");
        if (spec.omega_alpha) conflict("family", "omega_alpha", "GP family uses omega");
        if (spec.omega_theta) conflict("family", "omega_theta", "GP family has no theta loadings");
        if (!spec.gp_variant) conflict("family", "gp_variant", "GP family requires gp_variant");
        const GpVariantPriors table = gp_variant_priors(*spec.gp_variant);
        if (spec.loading_prior && *spec.loading_prior != table.loading)
            conflict("gp_variant", "h_prior_strategy", "does not match the variant's loading prior");
        if (spec.interaction_prior && *spec.interaction_prior != table.interaction)
            conflict("gp_variant", "z_prior_strategy", "does not match the variant's interaction prior");
        spec.loading_prior = table.loading;
        spec.interaction_prior = table.interaction;
        if (!spec.omega) spec.omega = 10.0;
        if (!spec.length_scale) spec.length_scale = 0.2;
    }

    require_positive(spec.nu, "nu");
    require_positive(spec.omega_alpha, "omega_alpha");
    require_positive(spec.omega_theta, "omega_theta");
    require_positive(spec.omega, "omega");
    require_positive(spec.length_scale, "length_scale");
    if (!(spec.sigma2_prior.shape > 0.0 && spec.sigma2_prior.scale > 0.0))
        conflict("sigma2_prior", "sigma2_prior", "inverse-gamma parameters must be positive");
    require_positive(spec.gamma_params, "gamma_params");
    require_positive(spec.beta_params, "beta_params");

    if (static_cast<int>(spec.seed_groups.size()) > spec.factors)
        conflict("seed_groups", "factors", "more seed groups than factors");
    std::set<Index> seen;
    for (std::size_t l = 0; l < spec.seed_groups.size(); ++l) {
        for (Index i : spec.seed_groups[l]) {
            if (i < 0 || (feature_count && i >= *feature_count))
                conflict("seed_groups", "data", "seed feature " + std::to_string(i) + " out of range");
            if (!seen.insert(i).second)
                conflict("seed_groups", "seed_groups", "feature " + std::to_string(i) + " appears in more than one group");
        }
    }

    auto check_degenerate = [&](const auto& map, Index cols, const std::string& name) {
        for (const auto& [key, value] : map) {
            if (value != 0 && value != 1) conflict(name, name, "fixed probabilities must be 0 or 1");
            if (key.first < 0 || (feature_count && key.first >= *feature_count) || key.second < 0 || key.second >= cols)
                conflict(name, "data", "entry out of range");
        }
    };
    check_degenerate(spec.degenerate_q, spec.factors, "degenerate_q");
    check_degenerate(spec.degenerate_rho, spec.indicator_columns(), "degenerate_rho");
    return spec;
}

ModelSpec make_gp_spec(int variant, double length_scale)
{
    ModelSpec spec;
    spec.family = Family::Gp;
    spec.gp_variant = variant;
    spec.omega = 10.0;
    spec.length_scale = length_scale;
    return spec;
}

ModelSpec make_mult_spec(Family approach, double nu)
{
    ModelSpec spec;
    spec.family = approach;
    spec.omega_alpha = 10.0;
    spec.omega_theta = 10.0;
    if (approach == Family::MultApproach1) spec.nu = nu;
    return spec;
}

void constrain_seed_groups(ModelSpec& spec)
{
    const int columns = spec.indicator_columns();
    for (std::size_t g = 0; g < spec.seed_groups.size(); ++g) {
        for (Index i : spec.seed_groups[g]) {
            for (int l = 0; l < spec.factors; ++l)
                spec.degenerate_q[{i, l}] = (static_cast<std::size_t>(l) == g) ? 1 : 0;
            for (int t = 0; t < columns; ++t) spec.degenerate_rho[{i, t}] = 0;
        }
    }
}

PriorGroup loading_group(const ModelSpec& spec, Index feature, Index factor)
{
    for (std::size_t g = 0; g < spec.seed_groups.size(); ++g) {
        const auto& group = spec.seed_groups[g];
        if (std::find(group.begin(), group.end(), feature) != group.end())
            return static_cast<Index>(g) == factor ? PriorGroup::Associated : PriorGroup::NotAssociated;
    }
    return PriorGroup::Unknown;
}

PriorGroup interaction_group(const ModelSpec& spec, Index feature)
{
    for (const auto& group : spec.seed_groups)
        if (std::find(group.begin(), group.end(), feature) != group.end()) return PriorGroup::Associated;
    return PriorGroup::Unknown;
}

bool McmcState::operator==(const McmcState& o) const
{
    auto same = [](const auto& a, const auto& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
    };
    return same(alpha, o.alpha) && same(lambda, o.lambda) && same(theta, o.theta) && same(eta, o.eta) &&
           same(effect, o.effect) && same(shared_effect, o.shared_effect) && same(sigma2, o.sigma2) &&
           same(h, o.h) && same(z, o.z) && same(q, o.q) && same(rho, o.rho);
}

double PosteriorDraws::acceptance_rate() const
{
    std::int64_t acc = 0;
    std::int64_t prop = 0;
    for (auto a : mh_accepted) acc += a;
    for (auto p : mh_proposed) prop += p;
    return prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop) : 0.0;
}

int retained_count(int total_iters, int burn_in, int thin)
{
    if (thin < 1 || burn_in < 0 || burn_in >= total_iters) return 0;
    return (total_iters - burn_in) / thin;
}

Eigen::MatrixXd interaction_effect(const McmcState& state)
{
    if (state.effect.size() > 0) return state.effect;
    if (state.theta.size() > 0) return state.theta * state.eta;
    return Eigen::MatrixXd::Zero(state.alpha.rows(), state.lambda.cols());
}

namespace {

template <typename Fn>
Eigen::MatrixXd average(const PosteriorDraws& draws, Fn&& fn)
{
    if (draws.states.empty()) throw Error(ErrorCode::InsufficientDraws, "no retained states");
    Eigen::MatrixXd acc = fn(draws.states.front());
    for (std::size_t s = 1; s < draws.states.size(); ++s) acc += fn(draws.states[s]);
    return acc / static_cast<double>(draws.states.size());
}

}  // namespace

Eigen::MatrixXd posterior_mean_effect(const PosteriorDraws& draws)
{
    return average(draws, [](const McmcState& s) { return interaction_effect(s); });
}

Eigen::MatrixXd posterior_mean_alpha(const PosteriorDraws& draws)
{
    return average(draws, [](const McmcState& s) -> Eigen::MatrixXd { return s.alpha; });
}

Eigen::MatrixXd posterior_mean_lambda(const PosteriorDraws& draws)
{
    return average(draws, [](const McmcState& s) -> Eigen::MatrixXd { return s.lambda; });
}

Eigen::VectorXd interaction_probability(const PosteriorDraws& draws)
{
    return average(draws, [](const McmcState& s) -> Eigen::MatrixXd {
        return s.z.rowwise().maxCoeff().cast<double>();
    });
}

Eigen::MatrixXd loading_probability(const PosteriorDraws& draws)
{
    return average(draws, [](const McmcState& s) -> Eigen::MatrixXd { return s.h.cast<double>(); });
}

std::string to_string(Family family)
{
    switch (family) {
    case Family::MultApproach1: return "mult_approach1";
    case Family::MultApproach2: return "mult_approach2";
    case Family::Gp: return "gp";
    }
    return "unknown";
}

Family family_from_string(const std::string& name)
{
    if (name == "mult_approach1" || name == "mult1") return Family::MultApproach1;
    if (name == "mult_approach2" || name == "mult2") return Family::MultApproach2;
    if (name == "gp") return Family::Gp;
    throw Error(ErrorCode::ParseError, "unknown model family '" + name + "'");
}

}  // namespace sfint
