#include "sfint/rng.hpp"

#include <cmath>
#include <limits>

namespace sfint {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t chain, Stream purpose,
                          std::uint64_t extra) noexcept
{
    std::uint64_t h = splitmix64(run_seed);
    h = splitmix64(h ^ chain);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    return splitmix64(h ^ extra);
}

double Rng::gamma(double shape, double scale)
{
    return std::gamma_distribution<double>(shape, scale)(engine_);
}

double Rng::beta(double a, double b)
{
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    if (x + y == 0.0) return a / (a + b);
    return x / (x + y);
}

double Rng::inverse_gamma(double shape, double scale)
{
    return 1.0 / gamma(shape, 1.0 / scale);
}

bool Rng::bernoulli_logit(double log_odds)
{
    if (std::isnan(log_odds)) return false;
    if (log_odds == std::numeric_limits<double>::infinity()) return true;
    if (log_odds == -std::numeric_limits<double>::infinity()) return false;
    return std::log(uniform()) < log_sigmoid(log_odds);
}

double log_sigmoid(double x) noexcept
{
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double logit(double p) noexcept
{
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return std::log(p) - std::log1p(-p);
}

}  // namespace sfint
