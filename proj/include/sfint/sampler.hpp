#ifndef SFINT_SAMPLER_HPP
#define SFINT_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "sfint/model.hpp"

namespace sfint {

struct McmcSettings {
    int iters = 600;
    int burn_in = 400;
    int thin = 1;
    std::uint64_t seed = 1;
    std::uint64_t chain = 0;
};

/// Selects which blocks a sweep updates. Disabled blocks keep their values.
struct SweepMask {
    bool alpha = true;
    bool lambda = true;
    bool eta = true;
    bool theta = true;
    bool effect = true;
    bool sigma2 = true;
    bool probabilities = true;
};

/// Random-walk Metropolis settings for the factor scores under the GP family.
struct MhSettings {
    double rw_step = 0.1;
    bool adapt = true;
    double target_accept = 0.3;
    /// Drops the data and GP terms from the target, leaving the N(0, I) prior.
    bool prior_only = false;
};

struct GaussianParams {
    double mean;
    double variance;
};

/// Fits one chain of the spec's family.
PosteriorDraws fit_model(const ModelSpec& spec, const DataMatrix& data, const McmcSettings& settings,
                         const MhSettings& mh = {});

/// Runs `chains` chains with seeds derived from settings.seed and the chain
/// index, spread over up to `threads` worker threads.
std::vector<PosteriorDraws> fit_chains(const ModelSpec& spec, const DataMatrix& data,
                                       const McmcSettings& settings, const MhSettings& mh, int chains,
                                       int threads);

/// Concatenates the retained states of several chains.
PosteriorDraws pool_chains(const std::vector<PosteriorDraws>& chains);

}  // namespace sfint

#endif  // SFINT_SAMPLER_HPP
