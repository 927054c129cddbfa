#include "sfint/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "sfint/rng.hpp"

namespace sfint {

namespace {

double uniform_between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double random_sign(Rng& rng) { return rng.bernoulli(0.5) ? 1.0 : -1.0; }

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SyntheticDataset generate_saddle_dataset(const SaddleOptions& o)
{
    if (!(o.frac_affected >= 0.0 && o.frac_affected < 1.0))
        throw Error(ErrorCode::InvalidFraction, "frac_affected must lie in [0, 1)");
    if (o.features < 10 || o.samples < 10)
        throw Error(ErrorCode::InvalidArgument, "need at least 10 features and 10 samples");
    if (!(o.noise_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_scale must be positive");

    const Index m = o.features;
    const Index n = o.samples;
    const Index group = std::max<Index>(2, static_cast<Index>(std::lround(o.seed_fraction * static_cast<double>(m))));
    if (2 * group >= m) throw Error(ErrorCode::InvalidArgument, "seed groups leave no other features");
    if (o.flipped_seeds < 0 || 2 * o.flipped_seeds >= group)
        throw Error(ErrorCode::InvalidArgument, "flipped seeds must stay a minority of G1");
    const Index others = m - 2 * group;
    if (o.two_factor_features > others)
        throw Error(ErrorCode::InvalidArgument, "more two-factor features than non-seed features");

    Rng rng(o.seed, 0, Stream::Simulation);
    SyntheticTruth t;
    t.seed_groups.assign(2, {});
    for (Index i = 0; i < group; ++i) {
        t.seed_groups[0].push_back(i);
        t.seed_groups[1].push_back(group + i);
    }

    t.lambda.resize(2, n);
    rng.fill_normal(t.lambda);
    if (o.kind == InteractionKind::IndependentFactor) t.extra_factor = rng.normal_vector(n);

    t.alpha = Eigen::MatrixXd::Zero(m, 2);
    for (int l = 0; l < 2; ++l) {
        const double sign = random_sign(rng);
        for (Index i : t.seed_groups[static_cast<std::size_t>(l)]) t.alpha(i, l) = sign * uniform_between(rng, 1.0, 2.0);
    }
    for (Index k = 0; k < o.flipped_seeds; ++k) {
        const Index i = t.seed_groups[0][static_cast<std::size_t>(group - 1 - k)];
        t.alpha(i, 0) = -t.alpha(i, 0);
        t.flipped_seeds.push_back(i);
    }
    std::sort(t.flipped_seeds.begin(), t.flipped_seeds.end());

    for (Index k = 0; k < others; ++k) {
        const Index i = 2 * group + k;
        std::array<bool, 2> present{};
        if (o.two_factor_features < 0) {
            present = {rng.bernoulli(0.5), rng.bernoulli(0.5)};
        } else if (k < o.two_factor_features) {
            present = {true, true};
        } else {
            present[static_cast<std::size_t>(k % 2)] = true;
        }
        for (int l = 0; l < 2; ++l) {
            const double magnitude = uniform_between(rng, 0.5, 1.5);
            const double sign = random_sign(rng);
            if (present[static_cast<std::size_t>(l)]) t.alpha(i, l) = sign * magnitude;
        }
        if (present[0] && present[1]) t.two_factor_set.push_back(i);
    }

    const Index affected = static_cast<Index>(std::lround(o.frac_affected * static_cast<double>(others)));
    std::vector<Index> pool(static_cast<std::size_t>(others));
    std::iota(pool.begin(), pool.end(), 2 * group);
    std::shuffle(pool.begin(), pool.end(), rng.engine());
    t.affected_set.assign(pool.begin(), pool.begin() + affected);
    std::sort(t.affected_set.begin(), t.affected_set.end());

    const Eigen::RowVectorXd shape = o.kind == InteractionKind::Product
                                         ? Eigen::RowVectorXd(t.lambda.row(0).cwiseProduct(t.lambda.row(1)))
                                         : Eigen::RowVectorXd(t.extra_factor.transpose());
    t.effect = Eigen::MatrixXd::Zero(m, n);
    for (Index i : t.affected_set) t.effect.row(i) = random_sign(rng) * uniform_between(rng, 1.5, 2.5) * shape;

    Eigen::MatrixXd noise(m, n);
    rng.fill_normal(noise);
    const Eigen::MatrixXd raw = t.alpha * t.lambda + t.effect + o.noise_scale * noise;

    SyntheticDataset out;
    out.data = standardize_rows(raw);
    const Eigen::VectorXd mean = raw.rowwise().mean();
    const Eigen::VectorXd scale =
        ((raw.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt();
    const Eigen::VectorXd inv = scale.cwiseInverse();
    t.alpha = inv.asDiagonal() * t.alpha;
    t.effect = inv.asDiagonal() * t.effect;
    t.sigma2 = (o.noise_scale * o.noise_scale) * inv.array().square().matrix();
    out.truth = std::move(t);
    return out;
}

SyntheticDataset generate_saddle_dataset(Index m, Index n, double frac_affected, double noise_scale,
                                         std::uint64_t seed)
{
    SaddleOptions o;
    o.features = m;
    o.samples = n;
    o.frac_affected = frac_affected;
    o.noise_scale = noise_scale;
    o.seed = seed;
    return generate_saddle_dataset(o);
}

Eigen::MatrixXd FactorAlignment::apply_to_scores(const Eigen::MatrixXd& lambda) const
{
    Eigen::MatrixXd out(lambda.rows(), lambda.cols());
    for (std::size_t k = 0; k < permutation.size(); ++k)
        out.row(permutation[k]) = sign[k] * lambda.row(static_cast<Index>(k));
    return out;
}

Eigen::MatrixXd FactorAlignment::apply_to_loadings(const Eigen::MatrixXd& alpha) const
{
    Eigen::MatrixXd out(alpha.rows(), alpha.cols());
    for (std::size_t k = 0; k < permutation.size(); ++k)
        out.col(permutation[k]) = sign[k] * alpha.col(static_cast<Index>(k));
    return out;
}

FactorAlignment align_factors(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth)
{
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw Error(ErrorCode::ShapeMismatch, "align_factors: score matrices differ in shape");
    const Index factors = estimate.rows();
    auto centered = [](const Eigen::MatrixXd& a) -> Eigen::MatrixXd {
        Eigen::MatrixXd c = a.colwise() - a.rowwise().mean();
        for (Index r = 0; r < c.rows(); ++r) {
            const double norm = c.row(r).norm();
            if (norm > 0.0) c.row(r) /= norm;
        }
        return c;
    };
    const Eigen::MatrixXd corr = centered(estimate) * centered(truth).transpose();

    std::vector<int> perm(static_cast<std::size_t>(factors));
    std::iota(perm.begin(), perm.end(), 0);
    FactorAlignment best;
    double best_score = -1.0;
    do {
        double score = 0.0;
        for (Index k = 0; k < factors; ++k) score += std::abs(corr(k, perm[static_cast<std::size_t>(k)]));
        if (score > best_score) {
            best_score = score;
            best.permutation = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    best.sign.resize(static_cast<std::size_t>(factors));
    for (Index k = 0; k < factors; ++k)
        best.sign[static_cast<std::size_t>(k)] = corr(k, best.permutation[static_cast<std::size_t>(k)]) < 0.0 ? -1.0 : 1.0;
    return best;
}

SurfaceGrid export_surface(const Eigen::VectorXd& effect, const Eigen::MatrixXd& lambda, int resolution,
                           int neighbors)
{
    if (lambda.rows() < 2 || lambda.cols() != effect.size())
        throw Error(ErrorCode::ShapeMismatch, "export_surface: need a 2 x n score matrix matching the effect row");
    if (resolution < 2 || neighbors < 1) throw Error(ErrorCode::InvalidArgument, "export_surface: bad grid settings");
    const Index n = effect.size();
    SurfaceGrid out;
    out.resolution = resolution;
    out.samples.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) out.samples.push_back({lambda(0, j), lambda(1, j), effect(j)});

    const double lo1 = lambda.row(0).minCoeff(), hi1 = lambda.row(0).maxCoeff();
    const double lo2 = lambda.row(1).minCoeff(), hi2 = lambda.row(1).maxCoeff();
    const auto k = static_cast<std::size_t>(std::min<Index>(neighbors, n));
    std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
    out.grid.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    for (int b = 0; b < resolution; ++b) {
        const double y = lo2 + (hi2 - lo2) * b / (resolution - 1);
        for (int a = 0; a < resolution; ++a) {
            const double x = lo1 + (hi1 - lo1) * a / (resolution - 1);
            for (Index j = 0; j < n; ++j) {
                const double dx = lambda(0, j) - x, dy = lambda(1, j) - y;
                dist[static_cast<std::size_t>(j)] = {dx * dx + dy * dy, j};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            double value = 0.0;
            if (dist[0].first == 0.0) {
                value = effect(dist[0].second);
            } else {
                double wsum = 0.0;
                for (std::size_t r = 0; r < k; ++r) {
                    const double w = 1.0 / dist[r].first;
                    wsum += w;
                    value += w * effect(dist[r].second);
                }
                value /= wsum;
            }
            out.grid.push_back({x, y, value});
        }
    }
    return out;
}

SurfaceGrid export_surface(double theta, const Eigen::VectorXd& eta, const Eigen::MatrixXd& lambda,
                           int resolution, int neighbors)
{
    return export_surface(Eigen::VectorXd(theta * eta), lambda, resolution, neighbors);
}

std::array<int, 4> quadrant_signs(const std::vector<SurfacePoint>& points)
{
    std::array<double, 4> sum{};
    for (const SurfacePoint& p : points) {
        if (p.lambda1 == 0.0 || p.lambda2 == 0.0) continue;
        const int q = (p.lambda1 > 0.0 ? 0 : 1) + (p.lambda2 > 0.0 ? 0 : 2);
        sum[static_cast<std::size_t>(q)] += p.effect;
    }
    std::array<int, 4> out{};
    for (std::size_t q = 0; q < 4; ++q) out[q] = (sum[q] > 0.0) - (sum[q] < 0.0);
    return out;
}

std::array<int, 4> quadrant_signs(const SurfaceGrid& surface) { return quadrant_signs(surface.grid); }

void write_surface_csv(const SurfaceGrid& surface, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "lambda1,lambda2,effect,source\n";
    for (const auto* rows : {&surface.samples, &surface.grid}) {
        const char* source = rows == &surface.samples ? "sample" : "grid";
        for (const SurfacePoint& p : *rows)
            out << format_double(p.lambda1) << ',' << format_double(p.lambda2) << ',' << format_double(p.effect)
                << ',' << source << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

double ConfusionCounts::accuracy() const
{
    const int total = true_positive + false_positive + true_negative + false_negative;
    return total == 0 ? 0.0 : static_cast<double>(true_positive + true_negative) / total;
}

ConfusionCounts classify_features(const Eigen::VectorXd& probability, const std::vector<Index>& truth_set,
                                  double threshold)
{
    std::vector<bool> truth(static_cast<std::size_t>(probability.size()), false);
    for (Index i : truth_set) {
        if (i < 0 || i >= probability.size()) throw Error(ErrorCode::ShapeMismatch, "truth index out of range");
        truth[static_cast<std::size_t>(i)] = true;
    }
    ConfusionCounts c;
    for (Index i = 0; i < probability.size(); ++i) {
        const bool called = probability(i) > threshold;
        const bool actual = truth[static_cast<std::size_t>(i)];
        if (called && actual) ++c.true_positive;
        else if (called) ++c.false_positive;
        else if (actual) ++c.false_negative;
        else ++c.true_negative;
    }
    return c;
}

bool ComparisonRow::operator==(const ComparisonRow& o) const
{
    if (label != o.label || aad_lambda != o.aad_lambda || aad_alpha != o.aad_alpha || aad_effect != o.aad_effect ||
        !(confusion == o.confusion) || saddle_recovery != o.saddle_recovery ||
        acceptance_rate != o.acceptance_rate || surfaces.size() != o.surfaces.size())
        return false;
    for (std::size_t s = 0; s < surfaces.size(); ++s) {
        const auto& a = surfaces[s].grid;
        const auto& b = o.surfaces[s].grid;
        if (a.size() != b.size()) return false;
        for (std::size_t g = 0; g < a.size(); ++g)
            if (a[g].lambda1 != b[g].lambda1 || a[g].lambda2 != b[g].lambda2 || a[g].effect != b[g].effect)
                return false;
    }
    return true;
}

std::string spec_label(const ModelSpec& spec)
{
    if (spec.is_mult()) {
        std::string label = to_string(spec.family);
        if (spec.family == Family::MultApproach1 && spec.nu) label += "_nu" + format_double(*spec.nu);
        return label;
    }
    std::ostringstream s;
    s << "gp" << spec.gp_variant.value_or(0);
    if (spec.length_scale) s << "_ls" << *spec.length_scale;
    return s.str();
}

ComparisonRow evaluate_fit(const SyntheticDataset& dataset, const PosteriorDraws& draws, std::string label,
                           int surface_resolution)
{
    const SyntheticTruth& t = dataset.truth;
    ComparisonRow row;
    row.label = std::move(label);
    const Eigen::MatrixXd lambda_hat = posterior_mean_lambda(draws);
    const Eigen::MatrixXd alpha_hat = posterior_mean_alpha(draws);
    const Eigen::MatrixXd effect_hat = posterior_mean_effect(draws);
    const FactorAlignment align = align_factors(lambda_hat, t.lambda);
    const Eigen::MatrixXd lambda_aligned = align.apply_to_scores(lambda_hat);
    row.aad_lambda = aad(lambda_aligned, t.lambda);
    row.aad_alpha = aad(align.apply_to_loadings(alpha_hat), t.alpha);
    row.aad_effect = aad(effect_hat, t.effect);
    row.confusion = classify_features(interaction_probability(draws), t.affected_set);
    row.acceptance_rate = draws.acceptance_rate();

    int recovered = 0;
    for (Index i : t.affected_set) {
        SurfaceGrid estimate = export_surface(Eigen::VectorXd(effect_hat.row(i).transpose()), lambda_aligned,
                                              surface_resolution);
        const SurfaceGrid truth = export_surface(Eigen::VectorXd(t.effect.row(i).transpose()), t.lambda,
                                                 surface_resolution);
        if (quadrant_signs(estimate) == quadrant_signs(truth)) ++recovered;
        row.surfaces.push_back(std::move(estimate));
    }
    row.saddle_recovery =
        t.affected_set.empty() ? 1.0 : static_cast<double>(recovered) / static_cast<double>(t.affected_set.size());
    return row;
}

ComparisonReport compare_models(const SyntheticDataset& dataset, const std::vector<ModelSpec>& specs,
                                const CompareOptions& options)
{
    std::vector<ModelSpec> resolved;
    resolved.reserve(specs.size());
    for (ModelSpec spec : specs) {
        if (options.seed_constraints) {
            spec.seed_groups = dataset.truth.seed_groups;
            constrain_seed_groups(spec);
        }
        resolved.push_back(validate_spec(std::move(spec), dataset.data.features()));
    }

    ComparisonReport report;
    report.rows.resize(resolved.size());
    std::vector<std::exception_ptr> errors(resolved.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t s = next++; s < resolved.size(); s = next++) {
            try {
                const PosteriorDraws draws = fit_model(resolved[s], dataset.data, options.mcmc, options.mh);
                report.rows[s] = evaluate_fit(dataset, draws, spec_label(resolved[s]), options.surface_resolution);
            } catch (...) {
                errors[s] = std::current_exception();
            }
        }
    };
    const int workers = std::clamp<int>(options.threads, 1, std::max<int>(1, static_cast<int>(resolved.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return report;
}

void write_report_csv(const ComparisonReport& report, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "label,aad_lambda,aad_alpha,aad_effect,true_positive,false_positive,true_negative,false_negative,"
           "accuracy,saddle_recovery,acceptance_rate\n";
    for (const ComparisonRow& r : report.rows)
        out << r.label << ',' << format_double(r.aad_lambda) << ',' << format_double(r.aad_alpha) << ','
            << format_double(r.aad_effect) << ',' << r.confusion.true_positive << ',' << r.confusion.false_positive
            << ',' << r.confusion.true_negative << ',' << r.confusion.false_negative << ','
            << format_double(r.confusion.accuracy()) << ',' << format_double(r.saddle_recovery) << ','
            << format_double(r.acceptance_rate) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace sfint
