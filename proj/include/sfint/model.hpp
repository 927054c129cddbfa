#ifndef SFINT_MODEL_HPP
#define SFINT_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace sfint {

using Eigen::Index;

/// Feature-by-sample observation matrix. Rows are features (genes), columns
/// are samples.
struct DataMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> feature_ids;
    std::vector<std::string> sample_ids;

    Index features() const noexcept { return values.rows(); }
    Index samples() const noexcept { return values.cols(); }
};

/// Centers every row and scales it to unit sample variance (n - 1
/// denominator). Missing ids are generated as f<i> / s<j>.
DataMatrix standardize_rows(const Eigen::MatrixXd& raw, std::vector<std::string> feature_ids = {},
                            std::vector<std::string> sample_ids = {});
DataMatrix standardize_rows(const DataMatrix& raw);

/// Ordered factor pair (first < second) multiplied by one interaction term.
struct FactorPair {
    int first;
    int second;
    bool operator==(const FactorPair&) const = default;
};

int interaction_pair_count(int factors);
/// Pairs in lexicographic order: (0,1), (0,2), ..., (L-2, L-1).
std::vector<FactorPair> interaction_pairs(int factors);

enum class Family { MultApproach1, MultApproach2, Gp };
enum class LoadingPrior { PerEntry, Grouped };
enum class InteractionPrior { PerFeature, Global, Grouped };
enum class EffectPrior { RowWise, Shared };

struct GpVariantPriors {
    LoadingPrior loading;
    EffectPrior effect;
    InteractionPrior interaction;
    bool operator==(const GpVariantPriors&) const = default;
};

/// Prior selections of the five GP configurations, variant in 1..5.
GpVariantPriors gp_variant_priors(int variant);
/// Inverse of gp_variant_priors; nullopt for combinations outside the table.
std::optional<int> gp_variant_of(const GpVariantPriors& priors);

struct BetaParams {
    double a = 1.0;
    double b = 1.0;
    bool operator==(const BetaParams&) const = default;
};

struct InverseGammaParams {
    double shape = 2.1;
    double scale = 1.1;
    bool operator==(const InverseGammaParams&) const = default;
};

/// Group labels for pooled inclusion probabilities. Loadings use all three;
/// interaction indicators use Associated (seed features) and Unknown.
enum class PriorGroup : int { Associated = 0, NotAssociated = 1, Unknown = 2 };

/// Beta hyperparameters with optional per-group and per-entry overrides.
/// Resolution order: entry, group, base.
struct BetaTable {
    BetaParams base;
    std::map<PriorGroup, BetaParams> per_group;
    std::map<std::pair<Index, Index>, BetaParams> per_entry;

    BetaParams resolve(Index row, Index col, PriorGroup group) const;
    bool operator==(const BetaTable&) const = default;
};

struct ModelSpec {
    Family family = Family::Gp;
    int factors = 2;

    std::optional<int> gp_variant;          // GP only
    std::optional<double> nu;               // approach 1 only
    std::optional<double> omega_alpha;      // MULT only
    std::optional<double> omega_theta;      // MULT only
    std::optional<double> omega;            // GP only
    std::optional<double> length_scale;     // GP only
    InverseGammaParams sigma2_prior;

    std::optional<LoadingPrior> loading_prior;
    std::optional<InteractionPrior> interaction_prior;
    BetaTable gamma_params;  // inclusion probabilities of loadings (q)
    BetaTable beta_params;   // inclusion probabilities of interactions (rho)

    /// seed_groups[l] holds the features assumed to load on factor l only.
    std::vector<std::vector<Index>> seed_groups;
    /// Fixed inclusion probabilities (0 or 1) keyed by (feature, factor).
    std::map<std::pair<Index, Index>, int> degenerate_q;
    /// Fixed interaction probabilities keyed by (feature, term); GP uses term 0.
    std::map<std::pair<Index, Index>, int> degenerate_rho;

    bool operator==(const ModelSpec&) const = default;

    bool is_mult() const noexcept { return family != Family::Gp; }
    int interaction_terms() const { return is_mult() ? interaction_pair_count(factors) : 0; }
    /// Columns of the interaction indicator matrix z: T for MULT, 1 for GP.
    int indicator_columns() const { return is_mult() ? interaction_terms() : 1; }
    double loading_slab_variance() const;
    EffectPrior effect_prior() const;
};

/// Checks cross-field consistency and fills family defaults. Throws
/// SpecConflict naming the offending field pair.
ModelSpec validate_spec(ModelSpec spec, std::optional<Index> feature_count = std::nullopt);

/// Defaults: omega = 10, sigma2 ~ IG(2.1, 1.1), l_s = 0.2.
ModelSpec make_gp_spec(int variant, double length_scale = 0.2);
ModelSpec make_mult_spec(Family approach, double nu = 1e-5);

/// Expresses the seed-group assumptions as degenerate inclusion
/// probabilities: seed features load on their own factor with probability 1,
/// on every other factor with probability 0, and carry no interaction.
void constrain_seed_groups(ModelSpec& spec);

/// Group label of loading (feature, factor) given the seed groups.
PriorGroup loading_group(const ModelSpec& spec, Index feature, Index factor);
/// Group label of a feature's interaction indicator.
PriorGroup interaction_group(const ModelSpec& spec, Index feature);

/// One full set of latent quantities. Absent blocks are zero-sized.
struct McmcState {
    Eigen::MatrixXd alpha;     // m x L
    Eigen::MatrixXd lambda;    // L x n
    Eigen::MatrixXd theta;     // m x T (MULT)
    Eigen::MatrixXd eta;       // T x n (MULT)
    Eigen::MatrixXd effect;    // m x n interaction effects F (GP)
    Eigen::VectorXd shared_effect;  // n, shared F* (GP with shared effect prior)
    Eigen::VectorXd sigma2;    // m
    Eigen::MatrixXi h;         // m x L
    Eigen::MatrixXi z;         // m x T (MULT) or m x 1 (GP)
    Eigen::MatrixXd q;         // m x L
    Eigen::MatrixXd rho;       // same shape as z

    bool operator==(const McmcState& other) const;
};

struct PosteriorDraws {
    Family family = Family::Gp;
    std::vector<McmcState> states;
    int total_iters = 0;
    int burn_in = 0;
    int thin = 1;
    /// Post-burn-in Metropolis tallies per sample column (GP only).
    std::vector<std::int64_t> mh_accepted;
    std::vector<std::int64_t> mh_proposed;
    double rw_step = 0.0;

    bool operator==(const PosteriorDraws&) const = default;

    double acceptance_rate() const;
};

/// Number of states kept by a run: iterations after burn-in, every thin-th.
int retained_count(int total_iters, int burn_in, int thin);

/// Mean over retained states of the interaction effect matrix: theta * eta
/// for MULT, F for GP.
Eigen::MatrixXd interaction_effect(const McmcState& state);
Eigen::MatrixXd posterior_mean_effect(const PosteriorDraws& draws);
Eigen::MatrixXd posterior_mean_alpha(const PosteriorDraws& draws);
Eigen::MatrixXd posterior_mean_lambda(const PosteriorDraws& draws);
/// Per-feature inclusion probability of any interaction indicator.
Eigen::VectorXd interaction_probability(const PosteriorDraws& draws);
Eigen::MatrixXd loading_probability(const PosteriorDraws& draws);

std::string to_string(Family family);
Family family_from_string(const std::string& name);

}  // namespace sfint

#endif  // SFINT_MODEL_HPP
