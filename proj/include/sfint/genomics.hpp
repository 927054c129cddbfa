#ifndef SFINT_GENOMICS_HPP
#define SFINT_GENOMICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfint/model.hpp"
#include "sfint/sampler.hpp"

namespace sfint {

struct Annotation {
    std::string probe_id;
    std::string chromosome;
    std::int64_t position = 0;
};

/// Reads a CSV with header probe_id,chromosome,position. Throws ParseError
/// on negative positions or duplicate probe ids.
std::vector<Annotation> read_annotation_csv(const std::string& path);

struct WindowResult {
    std::vector<Index> features;  // indices into the annotation table
    bool empty_window = false;    // non-fatal: nothing fell inside the window
};

/// Probes on `chromosome` with |position - center| <= half_width.
WindowResult seed_gene_window(const std::vector<Annotation>& annotation, const std::string& chromosome,
                              std::int64_t center, std::int64_t half_width);

/// Maps annotation rows to data rows by probe id; probes absent from the data
/// are dropped.
std::vector<Index> annotation_to_features(const std::vector<Annotation>& annotation,
                                          const std::vector<Index>& rows, const DataMatrix& data);

struct RemovalRecord {
    Index feature = 0;
    int group = 0;  // 0 for G1, 1 for G2
    std::string reason;
    double p_own = 0.0;
    double p_other = 0.0;
    double alpha_own = 0.0;
};

struct CleaningResult {
    std::vector<std::vector<Index>> groups;  // cleaned G1, G2
    std::vector<RemovalRecord> removed;
};

/// Beta priors of the seed-cleaning fit: own factor favors inclusion, the
/// other factor favors exclusion.
inline constexpr BetaParams kSeedOwnPrior{9.0, 1.0};
inline constexpr BetaParams kSeedOtherPrior{1.0, 9.0};

/// Fits a two-factor model without interactions to the seed rows and drops
/// every seed whose loading pattern breaks the expected configuration: weak
/// inclusion on its own factor, a loading sign against the group majority
/// (ties count as positive), or inclusion on the other factor. Throws
/// AllRemoved when a group empties.
CleaningResult clean_seed_genes(const DataMatrix& data, const std::vector<Index>& g1, const std::vector<Index>& g2,
                                const McmcSettings& settings);

struct CandidateResult {
    std::vector<Index> features;
    Eigen::MatrixXd loading_probability;  // m x 2
};

/// Fits the seed-constrained two-factor model without interactions to all
/// rows and keeps non-seed features with inclusion probability above 1/2 on
/// both factors.
CandidateResult select_candidate_genes(const DataMatrix& data, const std::vector<Index>& g1,
                                       const std::vector<Index>& g2, const McmcSettings& settings);

struct DetectedFeature {
    Index feature;
    double probability;
};

/// Features whose posterior interaction probability exceeds `threshold`.
std::vector<DetectedFeature> detect_interactions(const PosteriorDraws& draws, double threshold = 0.5);

struct OverlapTestInput {
    std::int64_t population_size = 0;
    std::vector<std::int64_t> per_dataset_counts;
    std::int64_t observed_overlap = 0;
    std::int64_t n_replicates = 100000;
};

/// Counts on the diagonal; n_o is the sum of the upper off-diagonal entries.
OverlapTestInput overlap_input_from_table(std::int64_t population_size, const Eigen::MatrixXi& table,
                                          std::int64_t n_replicates = 100000);

struct OverlapTestResult {
    double p_value = 0.0;
    std::int64_t exceed_count = 0;
    std::int64_t n_replicates = 0;
    double mean_overlap = 0.0;
    double sd_overlap = 0.0;
    std::int64_t min_overlap = 0;
    std::int64_t max_overlap = 0;
};

/// Draws each dataset's set uniformly without replacement from the
/// population, sums the pairwise intersection sizes n_k, and reports
/// p = #{n_k >= n_o} / replicates. Replicate r uses its own derived stream,
/// so the result does not depend on `threads`.
OverlapTestResult overlap_permutation_test(const OverlapTestInput& input, std::uint64_t seed, int threads = 1);

}  // namespace sfint

#endif  // SFINT_GENOMICS_HPP
