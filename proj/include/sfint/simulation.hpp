#ifndef SFINT_SIMULATION_HPP
#define SFINT_SIMULATION_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfint/error.hpp"
#include "sfint/model.hpp"
#include "sfint/sampler.hpp"

namespace sfint {

/// How the planted interaction row is formed for affected features.
enum class InteractionKind {
    Product,            // c_i * lambda_1 o lambda_2
    IndependentFactor,  // c_i * an extra N(0, 1) score unrelated to lambda
};

struct SaddleOptions {
    Index features = 100;
    Index samples = 100;
    double frac_affected = 0.1;
    double noise_scale = 1.0;
    std::uint64_t seed = 1;
    InteractionKind kind = InteractionKind::Product;
    /// Size of each seed group as a fraction of the features (at least 2).
    double seed_fraction = 0.1;
    /// Seed features of G1 given the opposite loading sign.
    Index flipped_seeds = 0;
    /// When >= 0, this many non-seed features load on both factors and every
    /// other non-seed feature loads on exactly one. When < 0, each non-seed
    /// loading is present independently with probability 1/2.
    Index two_factor_features = -1;
};

struct SyntheticTruth {
    Eigen::MatrixXd alpha;    // m x 2
    Eigen::MatrixXd lambda;   // 2 x n
    Eigen::MatrixXd effect;   // m x n
    Eigen::VectorXd sigma2;   // m
    Eigen::VectorXd extra_factor;  // n, only for InteractionKind::IndependentFactor
    std::vector<Index> affected_set;
    std::vector<std::vector<Index>> seed_groups;
    std::vector<Index> flipped_seeds;
    std::vector<Index> two_factor_set;
};

struct SyntheticDataset {
    DataMatrix data;
    SyntheticTruth truth;
};

/// Two-factor data with a planted saddle interaction on a subset of the
/// non-seed features. Rows are standardized and the truth is rescaled by the
/// same per-row scale. Throws InvalidFraction or InvalidArgument.
SyntheticDataset generate_saddle_dataset(const SaddleOptions& options);
SyntheticDataset generate_saddle_dataset(Index m, Index n, double frac_affected, double noise_scale,
                                         std::uint64_t seed);

/// Mean absolute difference over all entries.
template <typename A, typename B>
double aad(const Eigen::MatrixBase<A>& estimate, const Eigen::MatrixBase<B>& truth)
{
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw Error(ErrorCode::ShapeMismatch, "aad: estimate and truth shapes differ");
    if (estimate.size() == 0) return 0.0;
    return (estimate.derived() - truth.derived()).cwiseAbs().sum() / static_cast<double>(estimate.size());
}

/// Factor matching: estimated factor k corresponds to truth factor
/// permutation[k] with orientation sign[k].
struct FactorAlignment {
    std::vector<int> permutation;
    std::vector<double> sign;

    Eigen::MatrixXd apply_to_scores(const Eigen::MatrixXd& lambda) const;    // L x n
    Eigen::MatrixXd apply_to_loadings(const Eigen::MatrixXd& alpha) const;   // m x L
};

/// Chooses the permutation maximizing the summed absolute correlation between
/// estimated and true score rows, then orients each factor positively.
FactorAlignment align_factors(const Eigen::MatrixXd& lambda_estimate, const Eigen::MatrixXd& lambda_truth);

struct SurfacePoint {
    double lambda1;
    double lambda2;
    double effect;
};

struct SurfaceGrid {
    std::vector<SurfacePoint> samples;
    std::vector<SurfacePoint> grid;
    int resolution = 0;
};

/// Per-sample (lambda_1j, lambda_2j, effect_j) triples plus an inverse
/// distance weighted interpolation on a resolution x resolution grid spanning
/// the sample range.
SurfaceGrid export_surface(const Eigen::VectorXd& effect, const Eigen::MatrixXd& lambda, int resolution = 25,
                           int neighbors = 8);
/// Surface of theta_i * eta for one feature of a MULT fit.
SurfaceGrid export_surface(double theta, const Eigen::VectorXd& eta, const Eigen::MatrixXd& lambda,
                           int resolution = 25, int neighbors = 8);

/// Sign of the mean grid effect in the quadrants (+,+), (-,+), (+,-), (-,-)
/// of the (lambda_1, lambda_2) plane. A product surface gives (+1,-1,-1,+1).
std::array<int, 4> quadrant_signs(const SurfaceGrid& surface);
std::array<int, 4> quadrant_signs(const std::vector<SurfacePoint>& points);

void write_surface_csv(const SurfaceGrid& surface, const std::string& path);

struct ConfusionCounts {
    int true_positive = 0;
    int false_positive = 0;
    int true_negative = 0;
    int false_negative = 0;

    double accuracy() const;
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts classify_features(const Eigen::VectorXd& probability, const std::vector<Index>& truth_set,
                                  double threshold = 0.5);

struct ComparisonRow {
    std::string label;
    double aad_lambda = 0.0;
    double aad_alpha = 0.0;
    double aad_effect = 0.0;
    ConfusionCounts confusion;
    /// Fraction of truly affected features whose estimated surface has the
    /// true quadrant sign pattern.
    double saddle_recovery = 0.0;
    double acceptance_rate = 0.0;
    std::vector<SurfaceGrid> surfaces;  // one per truly affected feature

    bool operator==(const ComparisonRow&) const;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
};

struct CompareOptions {
    McmcSettings mcmc;
    MhSettings mh;
    /// Adds the planted seed groups as degenerate inclusion probabilities.
    bool seed_constraints = true;
    int threads = 1;
    int surface_resolution = 25;
};

/// Short label such as "gp1_ls0.2" or "mult_approach2".
std::string spec_label(const ModelSpec& spec);

ComparisonRow evaluate_fit(const SyntheticDataset& dataset, const PosteriorDraws& draws, std::string label,
                           int surface_resolution = 25);
ComparisonReport compare_models(const SyntheticDataset& dataset, const std::vector<ModelSpec>& specs,
                                const CompareOptions& options);

void write_report_csv(const ComparisonReport& report, const std::string& path);

}  // namespace sfint

#endif  // SFINT_SIMULATION_HPP
