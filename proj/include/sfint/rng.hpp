#ifndef SFINT_RNG_HPP
#define SFINT_RNG_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace sfint {

/// Purpose tags for independent random streams. Each sampler block draws
/// from its own stream, so reordering updates never shifts another block's
/// sequence.
enum class Stream : std::uint64_t {
    Init = 1,
    Alpha,
    Lambda,
    Eta,
    Theta,
    Interaction,
    Sigma2,
    Probability,
    Simulation,
    Permutation,
    User,
};

/// SplitMix64-mixes a (run seed, chain, purpose, extra) tuple into one seed.
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t chain, Stream purpose,
                          std::uint64_t extra = 0) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t run_seed, std::uint64_t chain, Stream purpose, std::uint64_t extra = 0)
        : engine_(derive_seed(run_seed, chain, purpose, extra)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
    double gamma(double shape, double scale);
    double beta(double a, double b);
    /// Inverse-gamma with density proportional to x^{-shape-1} exp(-scale / x).
    double inverse_gamma(double shape, double scale);
    bool bernoulli(double p) { return uniform() < p; }
    /// Bernoulli draw parameterized by log-odds; +/-inf give certain outcomes.
    bool bernoulli_logit(double log_odds);
    std::uint64_t uniform_index(std::uint64_t upper_inclusive)
    {
        return std::uniform_int_distribution<std::uint64_t>(0, upper_inclusive)(engine_);
    }

    template <typename Derived>
    void fill_normal(Eigen::DenseBase<Derived>& out)
    {
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal();
    }

    Eigen::VectorXd normal_vector(Eigen::Index n)
    {
        Eigen::VectorXd v(n);
        fill_normal(v);
        return v;
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

double log_sigmoid(double x) noexcept;
double logit(double p) noexcept;

}  // namespace sfint

#endif  // SFINT_RNG_HPP
