#include "sfint/genomics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "sfint/error.hpp"
#include "sfint/rng.hpp"

namespace sfint {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<Index> union_sorted(const std::vector<Index>& a, const std::vector<Index>& b)
{
    std::vector<Index> out = a;
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    return out;
}

void check_seed_groups(const DataMatrix& data, const std::vector<Index>& g1, const std::vector<Index>& g2)
{
    if (g1.empty() || g2.empty()) throw Error(ErrorCode::InvalidArgument, "seed groups must be nonempty");
    const std::vector<Index> all = union_sorted(g1, g2);
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw Error(ErrorCode::InvalidArgument, "seed groups must be disjoint and free of duplicates");
    if (all.front() < 0 || all.back() >= data.features())
        throw Error(ErrorCode::InvalidArgument, "seed index out of range");
}

// Two-factor model with every interaction indicator pinned to zero.
ModelSpec no_interaction_spec(Index features)
{
    ModelSpec spec = make_mult_spec(Family::MultApproach2);
    spec.factors = 2;
    for (Index i = 0; i < features; ++i) spec.degenerate_rho[{i, 0}] = 0;
    return spec;
}

}  // namespace

std::vector<Annotation> read_annotation_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ": empty annotation file");
    if (trim(line) != "probe_id,chromosome,position")
        throw Error(ErrorCode::ParseError, path + ": header must be probe_id,chromosome,position");
    std::vector<Annotation> out;
    std::unordered_set<std::string> seen;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string id, chrom, pos;
        if (!std::getline(ss, id, ',') || !std::getline(ss, chrom, ',') || !std::getline(ss, pos))
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": expected three fields");
        Annotation a{trim(id), trim(chrom), 0};
        try {
            std::size_t used = 0;
            a.position = std::stoll(trim(pos), &used);
            if (used != trim(pos).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": bad position");
        }
        if (a.position < 0)
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": negative position");
        if (!seen.insert(a.probe_id).second)
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": duplicate probe " + a.probe_id);
        out.push_back(std::move(a));
    }
    return out;
}

WindowResult seed_gene_window(const std::vector<Annotation>& annotation, const std::string& chromosome,
                              std::int64_t center, std::int64_t half_width)
{
    if (half_width < 0) throw Error(ErrorCode::InvalidArgument, "half_width must be nonnegative");
    WindowResult out;
    for (std::size_t k = 0; k < annotation.size(); ++k) {
        const Annotation& a = annotation[k];
        const std::int64_t d = a.position >= center ? a.position - center : center - a.position;
        if (a.chromosome == chromosome && d <= half_width) out.features.push_back(static_cast<Index>(k));
    }
    out.empty_window = out.features.empty();
    return out;
}

std::vector<Index> annotation_to_features(const std::vector<Annotation>& annotation,
                                          const std::vector<Index>& rows, const DataMatrix& data)
{
    std::unordered_map<std::string, Index> by_id;
    for (std::size_t i = 0; i < data.feature_ids.size(); ++i) by_id.emplace(data.feature_ids[i], static_cast<Index>(i));
    std::vector<Index> out;
    for (Index r : rows) {
        const auto it = by_id.find(annotation.at(static_cast<std::size_t>(r)).probe_id);
        if (it != by_id.end()) out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    return out;
}

CleaningResult clean_seed_genes(const DataMatrix& data, const std::vector<Index>& g1, const std::vector<Index>& g2,
                                const McmcSettings& settings)
{
    check_seed_groups(data, g1, g2);
    const std::vector<const std::vector<Index>*> groups{&g1, &g2};

    DataMatrix sub;
    sub.values.resize(static_cast<Index>(g1.size() + g2.size()), data.samples());
    std::vector<int> group_of;
    std::vector<Index> source;
    for (int g = 0; g < 2; ++g)
        for (Index i : *groups[static_cast<std::size_t>(g)]) {
            sub.values.row(static_cast<Index>(source.size())) = data.values.row(i);
            source.push_back(i);
            group_of.push_back(g);
        }
    sub.sample_ids = data.sample_ids;

    ModelSpec spec = no_interaction_spec(sub.features());
    for (Index r = 0; r < sub.features(); ++r)
        for (Index l = 0; l < 2; ++l)
            spec.gamma_params.per_entry[{r, l}] = l == group_of[static_cast<std::size_t>(r)] ? kSeedOwnPrior : kSeedOtherPrior;
    const PosteriorDraws draws = fit_model(spec, sub, settings);
    const Eigen::MatrixXd prob = loading_probability(draws);
    const Eigen::MatrixXd alpha = posterior_mean_alpha(draws);

    CleaningResult out;
    out.groups.assign(2, {});
    for (int g = 0; g < 2; ++g) {
        int positive = 0, negative = 0;
        for (Index r = 0; r < sub.features(); ++r)
            if (group_of[static_cast<std::size_t>(r)] == g && prob(r, g) > 0.5) (alpha(r, g) < 0.0 ? negative : positive)++;
        const double majority = negative > positive ? -1.0 : 1.0;
        for (Index r = 0; r < sub.features(); ++r) {
            if (group_of[static_cast<std::size_t>(r)] != g) continue;
            RemovalRecord rec{source[static_cast<std::size_t>(r)], g, "", prob(r, g), prob(r, 1 - g), alpha(r, g)};
            if (rec.p_own <= 0.5)
                rec.reason = "own_factor_excluded";
            else if (rec.alpha_own * majority < 0.0)
                rec.reason = "sign_disagrees";
            else if (rec.p_other > 0.5)
                rec.reason = "other_factor_included";
            if (rec.reason.empty())
                out.groups[static_cast<std::size_t>(g)].push_back(rec.feature);
            else
                out.removed.push_back(std::move(rec));
        }
        if (out.groups[static_cast<std::size_t>(g)].empty())
            throw Error(ErrorCode::AllRemoved, "seed group G" + std::to_string(g + 1) + " is empty after cleaning");
        std::sort(out.groups[static_cast<std::size_t>(g)].begin(), out.groups[static_cast<std::size_t>(g)].end());
    }
    return out;
}

CandidateResult select_candidate_genes(const DataMatrix& data, const std::vector<Index>& g1,
                                       const std::vector<Index>& g2, const McmcSettings& settings)
{
    check_seed_groups(data, g1, g2);
    ModelSpec spec = no_interaction_spec(data.features());
    spec.seed_groups = {g1, g2};
    constrain_seed_groups(spec);
    const PosteriorDraws draws = fit_model(spec, data, settings);

    CandidateResult out;
    out.loading_probability = loading_probability(draws);
    std::vector<bool> seed(static_cast<std::size_t>(data.features()), false);
    for (Index i : union_sorted(g1, g2)) seed[static_cast<std::size_t>(i)] = true;
    for (Index i = 0; i < data.features(); ++i)
        if (!seed[static_cast<std::size_t>(i)] && out.loading_probability(i, 0) > 0.5 &&
            out.loading_probability(i, 1) > 0.5)
            out.features.push_back(i);
    return out;
}

std::vector<DetectedFeature> detect_interactions(const PosteriorDraws& draws, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
    if (draws.states.empty()) throw Error(ErrorCode::InsufficientDraws, "no retained states");
    const Eigen::VectorXd p = interaction_probability(draws);
    std::vector<DetectedFeature> out;
    for (Index i = 0; i < p.size(); ++i)
        if (p(i) > threshold) out.push_back({i, p(i)});
    return out;
}

OverlapTestInput overlap_input_from_table(std::int64_t population_size, const Eigen::MatrixXi& table,
                                          std::int64_t n_replicates)
{
    if (table.rows() != table.cols()) throw Error(ErrorCode::ShapeMismatch, "overlap table must be square");
    OverlapTestInput in;
    in.population_size = population_size;
    in.n_replicates = n_replicates;
    for (Index a = 0; a < table.rows(); ++a) {
        in.per_dataset_counts.push_back(table(a, a));
        for (Index b = a + 1; b < table.cols(); ++b) in.observed_overlap += table(a, b);
    }
    return in;
}

OverlapTestResult overlap_permutation_test(const OverlapTestInput& input, std::uint64_t seed, int threads)
{
    const std::int64_t n_pop = input.population_size;
    if (n_pop < 1) throw Error(ErrorCode::InvalidArgument, "population size must be positive");
    if (input.n_replicates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replicate");
    for (std::int64_t c : input.per_dataset_counts)
        if (c < 0 || c > n_pop) throw Error(ErrorCode::InvalidArgument, "dataset count outside [0, population]");

    const std::int64_t reps = input.n_replicates;
    std::vector<std::int64_t> overlap(static_cast<std::size_t>(reps));

    // Floyd's sampling marks each dataset's draw; `hits` counts how many
    // earlier datasets already hold an element, which is its contribution to
    // the pairwise intersection sum.
    auto run_range = [&](std::int64_t begin, std::int64_t end) {
        std::vector<std::int64_t> member_stamp(static_cast<std::size_t>(n_pop), -1);
        std::vector<std::int64_t> hit_stamp(static_cast<std::size_t>(n_pop), -1);
        std::vector<int> hits(static_cast<std::size_t>(n_pop), 0);
        const auto datasets = static_cast<std::int64_t>(input.per_dataset_counts.size());
        for (std::int64_t r = begin; r < end; ++r) {
            Rng rng(seed, 0, Stream::Permutation, static_cast<std::uint64_t>(r));
            std::int64_t nk = 0;
            for (std::int64_t d = 0; d < datasets; ++d) {
                const std::int64_t stamp = r * datasets + d;
                const std::int64_t c = input.per_dataset_counts[static_cast<std::size_t>(d)];
                for (std::int64_t j = n_pop - c; j < n_pop; ++j) {
                    auto t = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(j)));
                    if (member_stamp[static_cast<std::size_t>(t)] == stamp) t = j;
                    member_stamp[static_cast<std::size_t>(t)] = stamp;
                    auto& h = hits[static_cast<std::size_t>(t)];
                    if (hit_stamp[static_cast<std::size_t>(t)] != r) {
                        hit_stamp[static_cast<std::size_t>(t)] = r;
                        h = 0;
                    }
                    nk += h++;
                }
            }
            overlap[static_cast<std::size_t>(r)] = nk;
        }
    };

    const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, reps));
    if (workers == 1) {
        run_range(0, reps);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(run_range, reps * w / workers, reps * (w + 1) / workers);
        for (auto& t : pool) t.join();
    }

    OverlapTestResult out;
    out.n_replicates = reps;
    out.min_overlap = *std::min_element(overlap.begin(), overlap.end());
    out.max_overlap = *std::max_element(overlap.begin(), overlap.end());
    double sum = 0.0;
    for (std::int64_t v : overlap) {
        sum += static_cast<double>(v);
        if (v >= input.observed_overlap) ++out.exceed_count;
    }
    out.mean_overlap = sum / static_cast<double>(reps);
    double ss = 0.0;
    for (std::int64_t v : overlap) ss += (static_cast<double>(v) - out.mean_overlap) * (static_cast<double>(v) - out.mean_overlap);
    out.sd_overlap = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
    out.p_value = static_cast<double>(out.exceed_count) / static_cast<double>(reps);
    return out;
}

}  // namespace sfint
