// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and sizes
// are fixed here; the process exits nonzero when any criterion fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sfint/cli.hpp"
#include "sfint/genomics.hpp"
#include "sfint/gp_sampler.hpp"
#include "sfint/kernel.hpp"
#include "sfint/mult_sampler.hpp"
#include "sfint/simulation.hpp"
#include "sfint/spike_slab.hpp"

using namespace sfint;
using oracle::MatrixXd;
using oracle::VectorXd;

namespace {

// Pinned tolerances and sizes.
constexpr double kGaussianRelTol = 1e-6;
constexpr double kTvTol = 0.05;
constexpr int kIndicatorSweeps = 50000;
constexpr double kClassifyMin = 0.9;
constexpr double kSaddleMin = 0.9;
constexpr double kEtaCorrHigh = 0.9;
constexpr double kEtaCorrLow = 0.5;
constexpr double kPermutationAlpha = 0.001;
constexpr double kMcSigmas = 3.0;
constexpr double kPsdFloor = -1e-8;
constexpr double kCholeskyTol = 1e-10;
constexpr double kMarginalTol = 1e-8;
constexpr double kAcceptLow = 0.2, kAcceptHigh = 0.5;
constexpr double kCandidateRecall = 0.9;
constexpr std::uint64_t kSaddleSeed = 2026;
constexpr std::uint64_t kChainSeed = 1;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_error(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

DataMatrix tiny_data(Index m, Index n, std::uint64_t seed)
{
    Rng rng(seed);
    DataMatrix d;
    d.values.resize(m, n);
    rng.fill_normal(d.values);
    for (Index i = 0; i < m; ++i) d.feature_ids.push_back("f" + std::to_string(i));
    for (Index j = 0; j < n; ++j) d.sample_ids.push_back("s" + std::to_string(j));
    return d;
}

McmcState random_mult_state(Index m, Index n, Rng& rng)
{
    McmcState s;
    s.alpha.resize(m, 2);
    s.h.resize(m, 2);
    s.lambda.resize(2, n);
    rng.fill_normal(s.lambda);
    s.theta.resize(m, 1);
    s.z.resize(m, 1);
    s.eta.resize(1, n);
    rng.fill_normal(s.eta);
    s.sigma2.resize(m);
    s.q.resize(m, 2);
    s.rho.resize(m, 1);
    for (Index i = 0; i < m; ++i) {
        for (Index l = 0; l < 2; ++l) {
            s.h(i, l) = rng.bernoulli(0.6) ? 1 : 0;
            s.alpha(i, l) = s.h(i, l) ? rng.normal() : 0.0;
            s.q(i, l) = 0.1 + 0.8 * rng.uniform();
        }
        s.z(i, 0) = rng.bernoulli(0.6) ? 1 : 0;
        s.theta(i, 0) = s.z(i, 0) ? rng.normal() : 0.0;
        s.sigma2(i) = 0.4 + rng.uniform();
        s.rho(i, 0) = 0.1 + 0.8 * rng.uniform();
    }
    return s;
}

McmcState random_gp_state(Index m, Index n, Rng& rng)
{
    McmcState s;
    s.alpha.resize(m, 2);
    s.h.resize(m, 2);
    s.lambda.resize(2, n);
    rng.fill_normal(s.lambda);
    s.effect = MatrixXd::Zero(m, n);
    s.z.resize(m, 1);
    s.sigma2.resize(m);
    s.q.resize(m, 2);
    s.rho.resize(m, 1);
    for (Index i = 0; i < m; ++i) {
        for (Index l = 0; l < 2; ++l) {
            s.h(i, l) = rng.bernoulli(0.6) ? 1 : 0;
            s.alpha(i, l) = s.h(i, l) ? rng.normal() : 0.0;
            s.q(i, l) = 0.1 + 0.8 * rng.uniform();
        }
        s.z(i, 0) = i % 2 == 0 ? 1 : 0;
        if (s.z(i, 0)) s.effect.row(i) = rng.normal_vector(n).transpose();
        s.sigma2(i) = 0.4 + rng.uniform();
        s.rho(i, 0) = 0.2 + 0.6 * rng.uniform();
    }
    return s;
}

// ---------------------------------------------------------------- criterion 1

void mult_conditionals(Family family, Outcome& out, double& worst)
{
    const Index m = 3, n = 4;
    const DataMatrix data = tiny_data(m, n, family == Family::MultApproach1 ? 11 : 12);
    ModelSpec spec = make_mult_spec(family, 0.5);
    spec.omega_alpha = 2.0;
    spec.omega_theta = 3.0;
    spec.sigma2_prior = {2.5, 1.5};
    spec.gamma_params.base = {2.0, 3.0};
    spec.beta_params.base = {1.5, 2.5};
    MultChain chain(spec, data, 5);
    Rng rng(77);
    chain.set_state(random_mult_state(m, n, rng));
    const McmcState s = chain.state();

    oracle::MultParams p;
    p.exact_product = family == Family::MultApproach2;
    p.nu = 0.5;
    p.omega_alpha = 2.0;
    p.omega_theta = 3.0;
    p.sigma_shape = 2.5;
    p.sigma_scale = 1.5;
    p.gamma_a = 2.0, p.gamma_b = 3.0;
    p.beta_a = 1.5, p.beta_b = 2.5;
    auto joint = [&](const McmcState& t) {
        return oracle::mult_log_joint(data.values, t.alpha, t.lambda, t.theta, t.eta, t.sigma2, t.h, t.z, t.q, t.rho, p);
    };
    auto track = [&](double e, const std::string& what) {
        worst = std::max(worst, e);
        out.check(e <= kGaussianRelTol, what);
    };

    for (Index i = 0; i < m; ++i) {
        for (Index l = 0; l < 2; ++l) {
            auto f = [&](double a) {
                McmcState t = s;
                t.alpha(i, l) = a;
                t.h(i, l) = 1;
                return joint(t);
            };
            const SlabPosterior c = chain.alpha_conditional(i, l);
            const auto g = oracle::gaussian_from_log_density(f, 0.3);
            track(rel_error(c.mean, g.mean), "alpha mean");
            track(rel_error(c.variance, g.variance), "alpha variance");
            McmcState off = s;
            off.alpha(i, l) = 0.0;
            off.h(i, l) = 0;
            const double log_odds = oracle::log_integral(f, g.mean, std::sqrt(g.variance), f(g.mean)) - joint(off);
            track(rel_error(logit(s.q(i, l)) + c.log_bayes_factor, log_odds), "alpha inclusion odds");
        }
        auto f = [&](double v) {
            McmcState t = s;
            t.theta(i, 0) = v;
            t.z(i, 0) = 1;
            return joint(t);
        };
        const SlabPosterior c = chain.theta_conditional(i, 0);
        const auto g = oracle::gaussian_from_log_density(f, -0.2);
        track(rel_error(c.mean, g.mean), "theta mean");
        track(rel_error(c.variance, g.variance), "theta variance");
        McmcState off = s;
        off.theta(i, 0) = 0.0;
        off.z(i, 0) = 0;
        const double log_odds = oracle::log_integral(f, g.mean, std::sqrt(g.variance), f(g.mean)) - joint(off);
        track(rel_error(logit(s.rho(i, 0)) + c.log_bayes_factor, log_odds), "theta inclusion odds");

        const auto ig = oracle::inverse_gamma_from_log_density([&](double v) {
            McmcState t = s;
            t.sigma2(i) = v;
            return joint(t);
        });
        const InverseGammaParams sc = chain.sigma2_conditional(i);
        track(rel_error(sc.shape, ig[0]), "sigma2 shape");
        track(rel_error(sc.scale, ig[1]), "sigma2 scale");

        for (Index l = 0; l < 2; ++l) {
            const auto be = oracle::beta_from_log_density([&](double v) {
                McmcState t = s;
                t.q(i, l) = v;
                return joint(t);
            });
            const BetaParams bc = probability_conditional(s.h, chain.loading_layout(), i, l);
            track(rel_error(bc.a, be[0]), "q a");
            track(rel_error(bc.b, be[1]), "q b");
        }
        const auto be = oracle::beta_from_log_density([&](double v) {
            McmcState t = s;
            t.rho(i, 0) = v;
            return joint(t);
        });
        const BetaParams bc = probability_conditional(s.z, chain.interaction_layout(), i, 0);
        track(rel_error(bc.a, be[0]), "rho a");
        track(rel_error(bc.b, be[1]), "rho b");
    }
    for (Index j = 0; j < n; ++j) {
        for (Index l = 0; l < 2; ++l) {
            auto f = [&](double v) {
                McmcState t = s;
                t.lambda(l, j) = v;
                return joint(t);
            };
            const GaussianParams c = chain.lambda_conditional(l, j);
            const auto g = oracle::gaussian_from_log_density(f, 0.1);
            track(rel_error(c.mean, g.mean), "lambda mean");
            track(rel_error(c.variance, g.variance), "lambda variance");
        }
        if (family == Family::MultApproach1) {
            auto f = [&](double v) {
                McmcState t = s;
                t.eta(0, j) = v;
                return joint(t);
            };
            const GaussianParams c = chain.eta_conditional(0, j);
            const auto g = oracle::gaussian_from_log_density(f, 0.1);
            track(rel_error(c.mean, g.mean), "eta mean");
            track(rel_error(c.variance, g.variance), "eta variance");
        }
    }
}

void gp_conditionals(Outcome& out, double& worst)
{
    const Index m = 3, n = 4;
    const DataMatrix data = tiny_data(m, n, 21);
    ModelSpec spec = make_gp_spec(1, 0.7);
    spec.omega = 2.0;
    spec.sigma2_prior = {2.5, 1.5};
    spec.beta_params.base = {1.5, 2.5};
    GpChain chain(spec, data, 5);
    Rng rng(78);
    chain.set_state(random_gp_state(m, n, rng));
    const McmcState s = chain.state();
    const double jitter = chain.kernel().jitter();
    const MatrixXd cov = oracle::se_kernel(s.lambda, 0.7) + jitter * MatrixXd::Identity(n, n);
    auto lik = [&](const McmcState& t) { return oracle::gp_log_likelihood(data.values, t.alpha, t.lambda, t.effect, t.sigma2); };
    auto track = [&](double e, const std::string& what) {
        worst = std::max(worst, e);
        out.check(e <= kGaussianRelTol, what);
    };

    for (Index i = 0; i < m; ++i) {
        for (Index l = 0; l < 2; ++l) {
            auto f = [&](double a) {
                McmcState t = s;
                t.alpha(i, l) = a;
                return lik(t) + oracle::normal_logpdf(a, 0.0, 2.0) + std::log(s.q(i, l));
            };
            McmcState off = s;
            off.alpha(i, l) = 0.0;
            const SlabPosterior c = chain.alpha_conditional(i, l);
            const auto g = oracle::gaussian_from_log_density(f, 0.2);
            track(rel_error(c.mean, g.mean), "gp alpha mean");
            track(rel_error(c.variance, g.variance), "gp alpha variance");
            const double log_odds = oracle::log_integral(f, g.mean, std::sqrt(g.variance), f(g.mean)) -
                                    (lik(off) + std::log1p(-s.q(i, l)));
            track(rel_error(logit(s.q(i, l)) + c.log_bayes_factor, log_odds), "gp alpha inclusion odds");
        }
        const auto ig = oracle::inverse_gamma_from_log_density([&](double v) {
            McmcState t = s;
            t.sigma2(i) = v;
            return lik(t) + oracle::inverse_gamma_logpdf(v, 2.5, 1.5);
        });
        const InverseGammaParams sc = chain.sigma2_conditional(i);
        track(rel_error(sc.shape, ig[0]), "gp sigma2 shape");
        track(rel_error(sc.scale, ig[1]), "gp sigma2 scale");

        // z_i with F_i integrated out, and F_i given z_i = 1.
        const VectorXd r = data.values.row(i).transpose() - s.lambda.transpose() * s.alpha.row(i).transpose();
        const double sig = s.sigma2(i);
        const double want = logit(s.rho(i, 0)) + oracle::mvn_logpdf(r, VectorXd::Zero(n), cov + sig * MatrixXd::Identity(n, n)) -
                            oracle::mvn_logpdf(r, VectorXd::Zero(n), sig * MatrixXd::Identity(n, n));
        track(rel_error(chain.effect_log_odds(i), want), "z log odds");
        const MatrixXd precision = cov.fullPivLu().inverse() + MatrixXd::Identity(n, n) / sig;
        const MatrixXd post_cov = precision.fullPivLu().inverse();
        const VectorXd post_mean = post_cov * r / sig;
        const GaussianConditional gc = gp_conditional(r, chain.kernel(), sig);
        track((gc.mean - post_mean).norm() / post_mean.norm(), "F mean");
        track((gc.covariance - post_cov).norm() / post_cov.norm(), "F covariance");

        const auto be = oracle::beta_from_log_density([&](double v) {
            return oracle::bernoulli_logpmf(s.z(i, 0), v) + oracle::beta_logpdf(v, 1.5, 2.5);
        });
        const BetaParams bc = probability_conditional(s.z, interaction_layout(chain.spec(), m), i, 0);
        track(rel_error(bc.a, be[0]), "gp rho a");
        track(rel_error(bc.b, be[1]), "gp rho b");
    }

    // Pooled probabilities: grouped loadings and grouped interactions.
    ModelSpec pooled = make_gp_spec(5, 0.7);
    pooled.seed_groups = {{0}, {1}};
    pooled.gamma_params.per_group[PriorGroup::NotAssociated] = {1.0, 6.0};
    const ModelSpec resolved = validate_spec(pooled, m);
    const IndicatorLayout lay = loading_layout(resolved, m);
    Eigen::MatrixXi h(m, 2);
    h << 1, 0, 1, 1, 0, 1;
    for (int g = 0; g < 3; ++g) {
        // Independent group membership: own factor associated, other factor
        // not associated, non-seed features unknown.
        auto group_of = [](Index i, Index l) { return i >= 2 ? 2 : (i == l ? 0 : 1); };
        const double pb = g == 1 ? 6.0 : 1.0;
        const auto be = oracle::beta_from_log_density([&](double v) {
            double lp = oracle::beta_logpdf(v, 1.0, pb);
            for (Index i = 0; i < m; ++i)
                for (Index l = 0; l < 2; ++l)
                    if (group_of(i, l) == g) lp += oracle::bernoulli_logpmf(h(i, l), v);
            return lp;
        });
        for (Index i = 0; i < m; ++i)
            for (Index l = 0; l < 2; ++l)
                if (group_of(i, l) == g) {
                    const BetaParams bc = probability_conditional(h, lay, i, l);
                    track(rel_error(bc.a, be[0]), "pooled q a");
                    track(rel_error(bc.b, be[1]), "pooled q b");
                }
    }
}

long code_of(const Eigen::MatrixXi& ind)
{
    long code = 0;
    for (Index k = 0; k < ind.size(); ++k) code = 2 * code + ind(k);
    return code;
}

// Joint of the loading indicators h under alpha-block updates only.
double tv_loading_indicators()
{
    const Index m = 3, n = 4;
    const DataMatrix data = tiny_data(m, n, 31);
    ModelSpec spec = make_mult_spec(Family::MultApproach2);
    spec.omega_alpha = 1.0;
    spec.omega_theta = 1.0;
    MultChain chain(spec, data, 6);
    Rng rng(79);
    McmcState s = random_mult_state(m, n, rng);
    s.lambda *= 0.8;
    s.sigma2.setConstant(0.8);
    chain.set_state(s);
    s = chain.state();

    std::map<long, double> logw;
    for (long code = 0; code < (1L << (m * 2)); ++code) {
        Eigen::MatrixXi h(m, 2);
        long c = code;
        for (Index k = h.size() - 1; k >= 0; --k, c /= 2) h(k) = static_cast<int>(c % 2);
        double lw = 0.0;
        for (Index i = 0; i < m; ++i) {
            const VectorXd y = data.values.row(i).transpose() - s.eta.transpose() * s.theta.row(i).transpose();
            MatrixXd cov = s.sigma2(i) * MatrixXd::Identity(n, n);
            for (Index l = 0; l < 2; ++l) {
                lw += oracle::bernoulli_logpmf(h(i, l), s.q(i, l));
                if (h(i, l)) cov += 1.0 * s.lambda.row(l).transpose() * s.lambda.row(l);
            }
            lw += oracle::mvn_logpdf(y, VectorXd::Zero(n), cov);
        }
        logw[code] = lw;
    }
    SweepMask mask{};
    mask = {true, false, false, false, false, false, false};
    oracle::Histogram hist;
    for (int k = 0; k < 200; ++k) chain.sweep(mask);
    for (int k = 0; k < kIndicatorSweeps; ++k) {
        chain.sweep(mask);
        hist.add(code_of(chain.state().h));
    }
    return hist.total_variation(oracle::normalize(logw));
}

// Joint of the interaction indicators z under theta-block updates only.
double tv_mult_interaction_indicators()
{
    const Index m = 3, n = 4;
    const DataMatrix data = tiny_data(m, n, 32);
    ModelSpec spec = make_mult_spec(Family::MultApproach1, 0.3);
    spec.omega_alpha = 1.0;
    spec.omega_theta = 1.0;
    MultChain chain(spec, data, 7);
    Rng rng(80);
    McmcState s = random_mult_state(m, n, rng);
    s.eta *= 0.7;
    s.sigma2.setConstant(0.8);
    chain.set_state(s);

    std::map<long, double> logw;
    for (long code = 0; code < (1L << m); ++code) {
        double lw = 0.0;
        for (Index i = 0; i < m; ++i) {
            const int z = static_cast<int>((code >> (m - 1 - i)) & 1);
            const VectorXd y = data.values.row(i).transpose() - s.lambda.transpose() * s.alpha.row(i).transpose();
            MatrixXd cov = s.sigma2(i) * MatrixXd::Identity(n, n);
            if (z) cov += s.eta.row(0).transpose() * s.eta.row(0);
            lw += oracle::bernoulli_logpmf(z, s.rho(i, 0)) + oracle::mvn_logpdf(y, VectorXd::Zero(n), cov);
        }
        logw[code] = lw;
    }
    SweepMask mask = {false, false, false, true, false, false, false};
    oracle::Histogram hist;
    for (int k = 0; k < 200; ++k) chain.sweep(mask);
    for (int k = 0; k < kIndicatorSweeps; ++k) {
        chain.sweep(mask);
        hist.add(code_of(chain.state().z));
    }
    return hist.total_variation(oracle::normalize(logw));
}

// Joint of z under effect-block updates for the row-wise or shared GP prior.
double tv_gp_indicators(int variant)
{
    const Index m = 3, n = 4;
    const DataMatrix data = tiny_data(m, n, 33 + static_cast<std::uint64_t>(variant));
    ModelSpec spec = make_gp_spec(variant, 0.8);
    GpChain chain(spec, data, 8);
    Rng rng(81);
    McmcState s = random_gp_state(m, n, rng);
    s.alpha *= 0.5;
    s.sigma2.setConstant(0.7);
    s.effect.setZero();
    s.z.setZero();
    if (variant == 2) s.shared_effect = VectorXd::Zero(n);
    chain.set_state(s);
    const MatrixXd cov = oracle::se_kernel(s.lambda, 0.8) + chain.kernel().jitter() * MatrixXd::Identity(n, n);
    MatrixXd r(m, n);
    for (Index i = 0; i < m; ++i) r.row(i) = data.values.row(i) - s.alpha.row(i) * s.lambda;

    std::map<long, double> logw;
    for (long code = 0; code < (1L << m); ++code) {
        std::vector<Index> active;
        double lw = 0.0;
        for (Index i = 0; i < m; ++i) {
            const int z = static_cast<int>((code >> (m - 1 - i)) & 1);
            lw += oracle::bernoulli_logpmf(z, s.rho(i, 0));
            if (z) active.push_back(i);
            else lw += oracle::mvn_logpdf(r.row(i).transpose(), VectorXd::Zero(n), s.sigma2(i) * MatrixXd::Identity(n, n));
        }
        if (variant == 2 && !active.empty()) {
            const auto a = static_cast<Index>(active.size());
            MatrixXd big(a * n, a * n);
            VectorXd y(a * n);
            for (Index p = 0; p < a; ++p) {
                y.segment(p * n, n) = r.row(active[p]).transpose();
                for (Index q = 0; q < a; ++q) {
                    big.block(p * n, q * n, n, n) = cov;
                    if (p == q) big.block(p * n, q * n, n, n) += s.sigma2(active[p]) * MatrixXd::Identity(n, n);
                }
            }
            lw += oracle::mvn_logpdf(y, VectorXd::Zero(a * n), big);
        } else {
            for (Index i : active)
                lw += oracle::mvn_logpdf(r.row(i).transpose(), VectorXd::Zero(n), cov + s.sigma2(i) * MatrixXd::Identity(n, n));
        }
        logw[code] = lw;
    }
    SweepMask mask = {false, false, false, false, true, false, false};
    oracle::Histogram hist;
    for (int k = 0; k < 200; ++k) chain.sweep(mask);
    for (int k = 0; k < kIndicatorSweeps; ++k) {
        chain.sweep(mask);
        hist.add(code_of(chain.state().z));
    }
    return hist.total_variation(oracle::normalize(logw));
}

// Random-walk Metropolis on one score column under the GP model, binned
// against grid quadrature of the exact column conditional.
double tv_gp_score_column()
{
    const Index m = 3, n = 4;
    const double ls = 0.9;
    const DataMatrix data = tiny_data(m, n, 41);
    MhSettings mh;
    mh.rw_step = 1.2;
    mh.adapt = false;
    GpChain chain(make_gp_spec(1, ls), data, 9, 0, mh);
    Rng rng(82);
    McmcState s = random_gp_state(m, n, rng);
    s.sigma2.setConstant(0.9);
    chain.set_state(s);
    const double jitter = chain.kernel().jitter();

    auto target = [&](double a, double b) {
        MatrixXd lam = s.lambda;
        lam(0, 0) = a;
        lam(1, 0) = b;
        double lp = -0.5 * (a * a + b * b);
        for (Index i = 0; i < m; ++i) {
            const double mean = s.alpha(i, 0) * a + s.alpha(i, 1) * b + s.effect(i, 0);
            lp += oracle::normal_logpdf(data.values(i, 0), mean, s.sigma2(i));
        }
        const MatrixXd cov = oracle::se_kernel(lam, ls) + jitter * MatrixXd::Identity(n, n);
        for (Index i = 0; i < m; ++i)
            if (s.z(i, 0)) lp += oracle::mvn_logpdf(s.effect.row(i).transpose(), VectorXd::Zero(n), cov);
        return lp;
    };
    const double edges[] = {-1.0, 0.0, 1.0};
    auto bin = [&](double v) {
        int k = 0;
        while (k < 3 && v >= edges[k]) ++k;
        return k;
    };
    std::map<long, double> mass;
    const double lo = -6.0, step = 0.03;
    const int steps = 400;
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> grid(static_cast<std::size_t>(steps * steps));
    for (int a = 0; a < steps; ++a)
        for (int b = 0; b < steps; ++b) {
            grid[static_cast<std::size_t>(a * steps + b)] = target(lo + (a + 0.5) * step, lo + (b + 0.5) * step);
            top = std::max(top, grid[static_cast<std::size_t>(a * steps + b)]);
        }
    double total = 0.0;
    for (int a = 0; a < steps; ++a)
        for (int b = 0; b < steps; ++b) {
            const double w = std::exp(grid[static_cast<std::size_t>(a * steps + b)] - top);
            mass[4L * bin(lo + (a + 0.5) * step) + bin(lo + (b + 0.5) * step)] += w;
            total += w;
        }
    for (auto& [k, v] : mass) v /= total;

    oracle::Histogram hist;
    chain.prepare_lambda_updates();
    for (int k = 0; k < 1000; ++k) chain.update_lambda_column(0);
    for (int k = 0; k < kIndicatorSweeps; ++k) {
        for (int rep = 0; rep < 4; ++rep) chain.update_lambda_column(0);
        hist.add(4L * bin(chain.state().lambda(0, 0)) + bin(chain.state().lambda(1, 0)));
    }
    return hist.total_variation(mass);
}

void criterion_1(Outcome& out)
{
    double worst = 0.0;
    mult_conditionals(Family::MultApproach1, out, worst);
    mult_conditionals(Family::MultApproach2, out, worst);
    gp_conditionals(out, worst);
    out.detail << "max rel err " << worst << "; TV";
    const std::vector<std::pair<std::string, std::function<double()>>> tv_checks{
        {"h", tv_loading_indicators},
        {"z_mult", tv_mult_interaction_indicators},
        {"z_gp_rowwise", [] { return tv_gp_indicators(1); }},
        {"z_gp_shared", [] { return tv_gp_indicators(2); }},
        {"lambda_gp_mh", tv_gp_score_column},
    };
    for (const auto& [name, fn] : tv_checks) {
        const double tv = fn();
        out.detail << ' ' << name << '=' << tv;
        out.check(tv < kTvTol, "TV " + name);
    }
}

// ---------------------------------------------------------------- shared fits

struct SaddleFits {
    SyntheticDataset dataset;
    PosteriorDraws mult;
    PosteriorDraws gp_short;  // l_s = 0.2
    PosteriorDraws gp_long;   // l_s = 0.5
    double mult_seconds = 0.0, gp_short_seconds = 0.0, gp_long_seconds = 0.0;
};

McmcSettings reference_settings()
{
    McmcSettings s;
    s.iters = 600;
    s.burn_in = 300;
    s.seed = kChainSeed;
    return s;
}

ModelSpec seeded(ModelSpec spec, const SyntheticDataset& ds)
{
    spec.seed_groups = ds.truth.seed_groups;
    constrain_seed_groups(spec);
    return spec;
}

SaddleFits& saddle_fits()
{
    static SaddleFits fits = [] {
        SaddleFits f;
        f.dataset = generate_saddle_dataset(100, 100, 0.1, 1.0, kSaddleSeed);
        auto t0 = std::chrono::steady_clock::now();
        f.mult = fit_model(seeded(make_mult_spec(Family::MultApproach2), f.dataset), f.dataset.data, reference_settings());
        f.mult_seconds = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        f.gp_short = fit_model(seeded(make_gp_spec(1, 0.2), f.dataset), f.dataset.data, reference_settings());
        f.gp_short_seconds = seconds_since(t0);
        return f;
    }();
    return fits;
}

// ---------------------------------------------------------------- criteria 2-10

void criterion_2(Outcome& out)
{
    const SaddleFits& f = saddle_fits();
    std::size_t checked = 0, violations = 0;
    auto scan = [&](const PosteriorDraws& d) {
        for (const McmcState& s : d.states)
            for (Index j = 0; j < s.lambda.cols(); ++j) {
                ++checked;
                if (s.eta(0, j) != s.lambda(0, j) * s.lambda(1, j)) ++violations;
            }
    };
    scan(f.mult);
    ModelSpec three = make_mult_spec(Family::MultApproach2);
    three.factors = 3;
    McmcSettings small = reference_settings();
    small.iters = 60;
    small.burn_in = 20;
    const PosteriorDraws d3 = fit_model(three, tiny_data(6, 8, 3), small);
    const auto pairs = interaction_pairs(3);
    for (const McmcState& s : d3.states)
        for (std::size_t t = 0; t < pairs.size(); ++t)
            for (Index j = 0; j < s.lambda.cols(); ++j) {
                ++checked;
                if (s.eta(static_cast<Index>(t), j) != s.lambda(pairs[t].first, j) * s.lambda(pairs[t].second, j)) ++violations;
            }
    out.detail << checked << " products checked, " << violations << " mismatches";
    out.check(violations == 0 && checked > 0, "exact product identity");
}

void criterion_3(Outcome& out)
{
    SaddleFits& f = saddle_fits();
    const ComparisonRow mult = evaluate_fit(f.dataset, f.mult, "mult_approach2");
    const ComparisonRow gp = evaluate_fit(f.dataset, f.gp_short, "gp1_ls0.2");
    for (const ComparisonRow* r : {&mult, &gp}) {
        out.detail << r->label << ": saddle " << r->saddle_recovery << ", accuracy " << r->confusion.accuracy() << " (tp "
                   << r->confusion.true_positive << ", fp " << r->confusion.false_positive << "); ";
        out.check(r->saddle_recovery >= kSaddleMin, r->label + " saddle recovery");
        out.check(r->confusion.accuracy() >= kClassifyMin, r->label + " classification");
    }
    const double secs = f.mult_seconds + f.gp_short_seconds;
    out.detail << "fit time " << secs << " s";
    out.check(secs < 600.0, "runtime");
}

void criterion_4(Outcome& out)
{
    SaddleFits& f = saddle_fits();
    const auto t0 = std::chrono::steady_clock::now();
    f.gp_long = fit_model(seeded(make_gp_spec(1, 0.5), f.dataset), f.dataset.data, reference_settings());
    f.gp_long_seconds = seconds_since(t0);
    const ComparisonRow a = evaluate_fit(f.dataset, f.gp_short, "ls0.2");
    const ComparisonRow b = evaluate_fit(f.dataset, f.gp_long, "ls0.5");
    out.detail << "AAD lambda " << a.aad_lambda << " -> " << b.aad_lambda << ", alpha " << a.aad_alpha << " -> "
               << b.aad_alpha << ", F " << a.aad_effect << " -> " << b.aad_effect << " (l_s 0.2 -> 0.5)";
    out.check(b.aad_lambda > a.aad_lambda, "lambda AAD ordering");
    out.check(b.aad_alpha > a.aad_alpha, "alpha AAD ordering");
    const double secs = f.gp_short_seconds + f.gp_long_seconds;
    out.detail << "; sweep time " << secs << " s";
    out.check(secs < 900.0, "runtime");
}

double correlation(const VectorXd& a, const VectorXd& b)
{
    const VectorXd x = a.array() - a.mean();
    const VectorXd y = b.array() - b.mean();
    return x.dot(y) / (x.norm() * y.norm());
}

void criterion_5(Outcome& out)
{
    int passes = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SaddleOptions o;
        o.features = 200;
        o.samples = 100;
        o.frac_affected = 0.1;
        o.seed = seed;
        o.kind = InteractionKind::IndependentFactor;
        const SyntheticDataset ds = generate_saddle_dataset(o);
        double corr[2];
        const double nus[2] = {1e-5, 1.0};
        for (int k = 0; k < 2; ++k) {
            McmcSettings s = reference_settings();
            s.seed = seed;
            const PosteriorDraws d = fit_model(seeded(make_mult_spec(Family::MultApproach1, nus[k]), ds), ds.data, s);
            VectorXd eta = VectorXd::Zero(ds.data.samples());
            for (const McmcState& st : d.states) eta += st.eta.row(0).transpose();
            eta /= static_cast<double>(d.states.size());
            const MatrixXd lam = posterior_mean_lambda(d);
            corr[k] = correlation(eta, lam.row(0).cwiseProduct(lam.row(1)).transpose());
        }
        const bool ok = corr[0] > kEtaCorrHigh && corr[1] < kEtaCorrLow;
        passes += ok ? 1 : 0;
        out.detail << "seed " << seed << ": corr " << corr[0] << " (nu=1e-5), " << corr[1] << " (nu=1); ";
    }
    out.detail << passes << "/3 seeds";
    out.check(passes >= 2, "majority of seeds");
}

void criterion_6(Outcome& out)
{
    const auto t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXi table(4, 4);
    table << 314, 30, 24, 20, 30, 170, 14, 24, 24, 14, 244, 24, 20, 24, 24, 255;
    const OverlapTestInput in = overlap_input_from_table(3704, table, 100000);
    const OverlapTestResult r = overlap_permutation_test(in, 2024);
    out.detail << "n_o " << in.observed_overlap << ", p " << r.p_value << "; ";
    out.check(in.observed_overlap == 136, "observed overlap");
    out.check(r.p_value < kPermutationAlpha, "p-value");

    OverlapTestInput two;
    two.population_size = 3704;
    two.per_dataset_counts = {314, 170};
    two.n_replicates = 100000;
    const OverlapTestResult r2 = overlap_permutation_test(two, 99);
    const double expected = 314.0 * 170.0 / 3704.0;
    const double se = r2.sd_overlap / std::sqrt(static_cast<double>(r2.n_replicates));
    out.detail << "two-set mean " << r2.mean_overlap << " vs " << expected << " (" << std::abs(r2.mean_overlap - expected) / se
               << " SE); ";
    out.check(std::abs(r2.mean_overlap - expected) < kMcSigmas * se, "hypergeometric mean");
    const double secs = seconds_since(t0);
    out.detail << secs << " s";
    out.check(secs < 120.0, "runtime");
}

void criterion_7(Outcome& out)
{
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(5);
    double min_eig = 1e300, diag_err = 0.0, chol_err = 0.0, ratio_err = 0.0;
    bool monotone = true;
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = 2 + trial % 9;
        MatrixXd lam(2, n);
        rng.fill_normal(lam);
        const double ls = 0.1 + 0.05 * trial;
        const KernelMatrix k = KernelMatrix::squared_exponential(lam, ls);
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<MatrixXd>(k.matrix()).eigenvalues().minCoeff());
        diag_err = std::max(diag_err, (k.matrix().diagonal().array() - 1.0).abs().maxCoeff());
        chol_err = std::max(chol_err, (k.lower() * k.lower().transpose() - k.covariance()).cwiseAbs().maxCoeff());
        const MatrixXd wider = KernelMatrix::squared_exponential(lam, ls * 1.5).matrix();
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b)
                if (a != b && !(wider(a, b) >= k.matrix()(a, b))) monotone = false;
        const VectorXd r = rng.normal_vector(n);
        const double s2 = 0.3 + rng.uniform();
        const double want = oracle::mvn_logpdf(r, VectorXd::Zero(n), k.covariance() + s2 * MatrixXd::Identity(n, n)) -
                            oracle::mvn_logpdf(r, VectorXd::Zero(n), s2 * MatrixXd::Identity(n, n));
        ratio_err = std::max(ratio_err, std::abs(gp_marginal_loglik_ratio(r, k, s2) - want));
    }
    out.detail << "min eig " << min_eig << ", diag err " << diag_err << ", chol err " << chol_err << ", ratio err "
               << ratio_err << ", monotone " << monotone;
    out.check(min_eig >= kPsdFloor, "PSD");
    out.check(diag_err == 0.0, "unit diagonal");
    out.check(chol_err <= kCholeskyTol, "Cholesky reconstruction");
    out.check(ratio_err <= kMarginalTol, "marginal likelihood ratio");
    out.check(monotone, "length-scale monotonicity");
    const double secs = seconds_since(t0);
    out.check(secs < 60.0, "runtime");
}

void criterion_8(Outcome& out)
{
    const Index n = 5;
    MhSettings mh;
    mh.prior_only = true;
    mh.adapt = false;
    mh.rw_step = 1.5;
    GpChain chain(make_gp_spec(1, 0.2), tiny_data(3, n, 51), 12, 0, mh);
    const SweepMask mask = {false, true, false, false, false, false, false};
    std::vector<double> m0, m1, s0, s1, c01;
    for (int k = 0; k < 500; ++k) chain.sweep(mask);
    for (int k = 0; k < 40000; ++k) {
        chain.sweep(mask);
        const MatrixXd& lam = chain.state().lambda;
        m0.push_back(lam.row(0).mean());
        m1.push_back(lam.row(1).mean());
        s0.push_back(lam.row(0).squaredNorm() / n - 1.0);
        s1.push_back(lam.row(1).squaredNorm() / n - 1.0);
        c01.push_back(lam.row(0).dot(lam.row(1)) / n);
    }
    double worst = 0.0;
    for (const auto* trace : {&m0, &m1, &s0, &s1, &c01}) {
        double mean = 0.0;
        for (double v : *trace) mean += v;
        mean /= static_cast<double>(trace->size());
        worst = std::max(worst, std::abs(mean) / oracle::batch_standard_error(*trace));
    }
    out.detail << "prior moments max |z| " << worst << "; ";
    out.check(worst < kMcSigmas, "prior moments");

    const double rate = saddle_fits().gp_short.acceptance_rate();
    out.detail << "post-burn-in acceptance " << rate;
    out.check(rate >= kAcceptLow && rate <= kAcceptHigh, "acceptance band");
}

void criterion_9(Outcome& out)
{
    int exact = 0;
    double worst_recall = 1.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SaddleOptions o;
        o.seed = seed;
        o.frac_affected = 0.0;
        o.seed_fraction = 0.15;
        o.flipped_seeds = 3;
        o.two_factor_features = 20;
        const SyntheticDataset ds = generate_saddle_dataset(o);
        McmcSettings s = reference_settings();
        s.seed = seed;
        const CleaningResult cleaned = clean_seed_genes(ds.data, ds.truth.seed_groups[0], ds.truth.seed_groups[1], s);
        std::vector<Index> removed;
        for (const RemovalRecord& r : cleaned.removed) removed.push_back(r.feature);
        std::sort(removed.begin(), removed.end());
        exact += removed == ds.truth.flipped_seeds ? 1 : 0;
        const CandidateResult cand = select_candidate_genes(ds.data, cleaned.groups[0], cleaned.groups[1], s);
        int hit = 0;
        for (Index i : ds.truth.two_factor_set)
            hit += std::count(cand.features.begin(), cand.features.end(), i) > 0 ? 1 : 0;
        worst_recall = std::min(worst_recall, static_cast<double>(hit) / static_cast<double>(ds.truth.two_factor_set.size()));
    }
    out.detail << "exact cleaning " << exact << "/5, worst candidate recall " << worst_recall << "; ";
    out.check(exact == 5, "cleaning removes exactly the planted violators");
    out.check(worst_recall >= kCandidateRecall, "candidate recall");

    const SaddleFits& f = saddle_fits();
    for (const auto* d : {&f.gp_short, &f.mult}) {
        Eigen::VectorXd called = Eigen::VectorXd::Zero(f.dataset.data.features());
        for (const DetectedFeature& x : detect_interactions(*d, 0.5)) called(x.feature) = 1.0;
        const double acc = classify_features(called, f.dataset.truth.affected_set).accuracy();
        out.detail << to_string(d->family) << " detection accuracy " << acc << "; ";
        out.check(acc >= kClassifyMin, "detection accuracy");
    }
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_10(Outcome& out)
{
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "sfint_acceptance_repro";
    fs::remove_all(root);
    std::ostringstream sink;
    for (const char* run_name : {"a", "b"}) {
        const fs::path dir = root / run_name;
        RunConfig sim;
        sim.command = "simulate";
        sim.output_dir = (dir / "sim").string();
        sim.seed = 17;
        sim.config = {{"simulate.features", "40"}, {"simulate.samples", "30"}};
        run(sim, sink);
        for (const char* family : {"gp", "mult_approach2"}) {
            RunConfig fit;
            fit.command = "fit";
            fit.output_dir = (dir / family).string();
            fit.seed = 5;
            fit.config = {{"paths.data", (dir / "sim" / "data.csv").string()},
                          {"model.family", family},
                          {"mcmc.iters", "80"},
                          {"mcmc.burn_in", "40"},
                          {"mcmc.chains", "2"},
                          {"seeds.group1", "0-3"},
                          {"seeds.group2", "4-7"}};
            run(fit, sink);
            RunConfig sum;
            sum.command = "summarize";
            sum.output_dir = (dir / family / "again").string();
            sum.config = {{"paths.draws", (dir / family / "draws.bin").string()}};
            run(sum, sink);
        }
    }
    int compared = 0, identical = 0;
    for (const char* rel : {"sim/data.csv", "gp/draws.bin", "gp/summary.csv", "gp/again/summary.csv",
                            "mult_approach2/draws.bin", "mult_approach2/summary.csv"}) {
        const std::string a = slurp(root / "a" / rel), b = slurp(root / "b" / rel);
        ++compared;
        identical += (!a.empty() && a == b) ? 1 : 0;
    }
    const bool manifests_ok = verify_manifest((root / "a" / "gp").string()).empty() &&
                              verify_manifest((root / "b" / "mult_approach2").string()).empty();
    out.detail << identical << "/" << compared << " files byte-identical, manifests " << (manifests_ok ? "verify" : "broken");
    out.check(identical == compared, "byte-identical outputs");
    out.check(manifests_ok, "manifest checksums");
    fs::remove_all(root);
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"conditional oracles", criterion_1},     {"approach-2 product identity", criterion_2},
        {"saddle recovery", criterion_3},         {"length-scale AAD ordering", criterion_4},
        {"nu sensitivity", criterion_5},          {"overlap permutation test", criterion_6},
        {"kernel suite", criterion_7},            {"MH sanity", criterion_8},
        {"pipeline planted truth", criterion_9},  {"reproducibility", criterion_10},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[k].second(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << "exception: " << e.what();
        }
        failures += out.pass ? 0 : 1;
        std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", k + 1, out.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    out.detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
