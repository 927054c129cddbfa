#ifndef SFINT_SUMMARY_HPP
#define SFINT_SUMMARY_HPP

#include <string>
#include <vector>

#include "sfint/model.hpp"

namespace sfint {

struct ParameterSummary {
    std::string parameter;  // e.g. alpha[3][0]
    std::string role;       // loading, interaction_loading, interaction_effect, score, ...
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    /// Mean of the spike-and-slab indicator; negative for plain parameters.
    double inclusion_prob = -1.0;
    bool converged = true;

    bool spike_slab() const noexcept { return inclusion_prob >= 0.0; }
};

struct PosteriorSummary {
    std::vector<ParameterSummary> parameters;
    int states = 0;
};

inline constexpr int kMinSummaryStates = 20;

/// Equal-tailed interval and diagnostics over the retained states. A
/// spike-and-slab parameter with inclusion probability above 1/2 is
/// summarized over the states where its indicator is 1; otherwise it is
/// reported at the spike (0). Throws InsufficientDraws below 20 states.
PosteriorSummary posterior_summary(const PosteriorDraws& draws);

/// Linear-interpolated sample quantile (type 7), p in [0, 1].
double sample_quantile(std::vector<double> values, double p);

/// Two-window diagnostic: first 10% against last 50% of a trace, standardized
/// mean difference below 3.
bool two_window_converged(const std::vector<double>& trace);

void write_summary_csv(const PosteriorSummary& summary, const std::string& path);

}  // namespace sfint

#endif  // SFINT_SUMMARY_HPP
