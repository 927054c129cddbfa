#include "sfint/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "sfint/error.hpp"
#include "sfint/gp_sampler.hpp"
#include "sfint/mult_sampler.hpp"

namespace sfint {

PosteriorDraws fit_model(const ModelSpec& spec, const DataMatrix& data, const McmcSettings& settings,
                         const MhSettings& mh)
{
    if (spec.is_mult()) return run_mult_chain(spec, data, settings);
    return run_gp_chain(spec, data, settings, mh);
}

std::vector<PosteriorDraws> fit_chains(const ModelSpec& spec, const DataMatrix& data,
                                       const McmcSettings& settings, const MhSettings& mh, int chains,
                                       int threads)
{
    if (chains < 1) throw Error(ErrorCode::InvalidArgument, "need at least one chain");
    std::vector<PosteriorDraws> out(static_cast<std::size_t>(chains));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next++; c < chains; c = next++) {
            McmcSettings s = settings;
            s.chain = settings.chain + static_cast<std::uint64_t>(c);
            try {
                out[static_cast<std::size_t>(c)] = fit_model(spec, data, s, mh);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(threads, 1, chains);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

PosteriorDraws pool_chains(const std::vector<PosteriorDraws>& chains)
{
    if (chains.empty()) throw Error(ErrorCode::InvalidArgument, "no chains to pool");
    PosteriorDraws pooled = chains.front();
    pooled.states.clear();
    std::fill(pooled.mh_accepted.begin(), pooled.mh_accepted.end(), 0);
    std::fill(pooled.mh_proposed.begin(), pooled.mh_proposed.end(), 0);
    for (const PosteriorDraws& c : chains) {
        if (c.family != pooled.family) throw Error(ErrorCode::ShapeMismatch, "chains come from different families");
        pooled.states.insert(pooled.states.end(), c.states.begin(), c.states.end());
        for (std::size_t j = 0; j < std::min(pooled.mh_accepted.size(), c.mh_accepted.size()); ++j) {
            pooled.mh_accepted[j] += c.mh_accepted[j];
            pooled.mh_proposed[j] += c.mh_proposed[j];
        }
    }
    return pooled;
}

}  // namespace sfint
