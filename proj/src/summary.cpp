#include "sfint/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "sfint/error.hpp"

namespace sfint {

namespace {

std::string indexed(const char* name, Index a, Index b = -1)
{
    std::string s = std::string(name) + "[" + std::to_string(a);
    if (b >= 0) s += "][" + std::to_string(b);
    return s + "]";
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end)
{
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += v[k];
    return s / static_cast<double>(end - begin);
}

double variance_of(const std::vector<double>& v, std::size_t begin, std::size_t end, double mean)
{
    if (end - begin < 2) return 0.0;
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += (v[k] - mean) * (v[k] - mean);
    return s / static_cast<double>(end - begin - 1);
}

ParameterSummary plain_summary(std::string name, std::string role, const std::vector<double>& trace)
{
    ParameterSummary p;
    p.parameter = std::move(name);
    p.role = std::move(role);
    p.estimate = mean_of(trace, 0, trace.size());
    p.ci_low = sample_quantile(trace, 0.025);
    p.ci_high = sample_quantile(trace, 0.975);
    p.converged = two_window_converged(trace);
    return p;
}

ParameterSummary mixture_summary(std::string name, std::string role, const std::vector<double>& trace,
                                 const std::vector<int>& indicator)
{
    ParameterSummary p;
    p.parameter = std::move(name);
    p.role = std::move(role);
    std::vector<double> slab;
    for (std::size_t k = 0; k < trace.size(); ++k)
        if (indicator[k] == 1) slab.push_back(trace[k]);
    p.inclusion_prob = static_cast<double>(slab.size()) / static_cast<double>(trace.size());
    if (p.inclusion_prob > 0.5) {
        p.estimate = mean_of(slab, 0, slab.size());
        p.ci_low = sample_quantile(slab, 0.025);
        p.ci_high = sample_quantile(slab, 0.975);
    }
    p.converged = two_window_converged(trace);
    return p;
}

}  // namespace

double sample_quantile(std::vector<double> values, double p)
{
    if (values.empty()) throw Error(ErrorCode::InsufficientDraws, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

bool two_window_converged(const std::vector<double>& trace)
{
    const std::size_t n = trace.size();
    const std::size_t first = std::max<std::size_t>(1, n / 10);
    const std::size_t last_begin = n - std::max<std::size_t>(1, n / 2);
    const double ma = mean_of(trace, 0, first);
    const double mb = mean_of(trace, last_begin, n);
    const double se = std::sqrt(variance_of(trace, 0, first, ma) / static_cast<double>(first) +
                                variance_of(trace, last_begin, n, mb) / static_cast<double>(n - last_begin));
    if (se == 0.0) return ma == mb;
    return std::abs(ma - mb) / se < 3.0;
}

PosteriorSummary posterior_summary(const PosteriorDraws& draws)
{
    const auto s_count = draws.states.size();
    if (s_count < static_cast<std::size_t>(kMinSummaryStates))
        throw Error(ErrorCode::InsufficientDraws, "posterior summary needs at least " +
                                                      std::to_string(kMinSummaryStates) + " retained states, got " +
                                                      std::to_string(s_count));
    const McmcState& first = draws.states.front();
    PosteriorSummary out;
    out.states = static_cast<int>(s_count);
    std::vector<double> trace(s_count);
    std::vector<int> ind(s_count);

    auto collect = [&](const std::function<double(const McmcState&)>& get) {
        for (std::size_t k = 0; k < s_count; ++k) trace[k] = get(draws.states[k]);
    };
    auto collect_ind = [&](const std::function<int(const McmcState&)>& get) {
        for (std::size_t k = 0; k < s_count; ++k) ind[k] = get(draws.states[k]);
    };

    const Index m = first.alpha.rows();
    for (Index i = 0; i < m; ++i)
        for (Index l = 0; l < first.alpha.cols(); ++l) {
            collect([&](const McmcState& s) { return s.alpha(i, l); });
            collect_ind([&](const McmcState& s) { return s.h(i, l); });
            out.parameters.push_back(mixture_summary(indexed("alpha", i, l), "loading", trace, ind));
        }
    for (Index i = 0; i < first.theta.rows(); ++i)
        for (Index t = 0; t < first.theta.cols(); ++t) {
            collect([&](const McmcState& s) { return s.theta(i, t); });
            collect_ind([&](const McmcState& s) { return s.z(i, t); });
            out.parameters.push_back(mixture_summary(indexed("theta", i, t), "interaction_loading", trace, ind));
        }
    if (draws.family == Family::Gp) {
        for (Index i = 0; i < first.effect.rows(); ++i)
            for (Index j = 0; j < first.effect.cols(); ++j) {
                collect([&](const McmcState& s) { return s.effect(i, j); });
                collect_ind([&](const McmcState& s) { return s.z(i, 0); });
                out.parameters.push_back(mixture_summary(indexed("F", i, j), "interaction_effect", trace, ind));
            }
        for (Index j = 0; j < first.shared_effect.size(); ++j) {
            collect([&](const McmcState& s) { return s.shared_effect(j); });
            out.parameters.push_back(plain_summary(indexed("Fstar", j), "shared_effect", trace));
        }
    }
    for (Index l = 0; l < first.lambda.rows(); ++l)
        for (Index j = 0; j < first.lambda.cols(); ++j) {
            collect([&](const McmcState& s) { return s.lambda(l, j); });
            out.parameters.push_back(plain_summary(indexed("lambda", l, j), "score", trace));
        }
    for (Index t = 0; t < first.eta.rows(); ++t)
        for (Index j = 0; j < first.eta.cols(); ++j) {
            collect([&](const McmcState& s) { return s.eta(t, j); });
            out.parameters.push_back(plain_summary(indexed("eta", t, j), "interaction_score", trace));
        }
    for (Index i = 0; i < first.sigma2.size(); ++i) {
        collect([&](const McmcState& s) { return s.sigma2(i); });
        out.parameters.push_back(plain_summary(indexed("sigma2", i), "variance", trace));
    }
    for (Index i = 0; i < first.q.rows(); ++i)
        for (Index l = 0; l < first.q.cols(); ++l) {
            collect([&](const McmcState& s) { return s.q(i, l); });
            out.parameters.push_back(plain_summary(indexed("q", i, l), "loading_probability", trace));
        }
    for (Index i = 0; i < first.rho.rows(); ++i)
        for (Index t = 0; t < first.rho.cols(); ++t) {
            collect([&](const McmcState& s) { return s.rho(i, t); });
            out.parameters.push_back(plain_summary(indexed("rho", i, t), "interaction_probability", trace));
        }
    return out;
}

void write_summary_csv(const PosteriorSummary& summary, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "parameter,role,estimate,ci_low,ci_high,inclusion_prob,converged\n";
    for (const ParameterSummary& p : summary.parameters) {
        out << p.parameter << ',' << p.role << ',' << format_double(p.estimate) << ',' << format_double(p.ci_low)
            << ',' << format_double(p.ci_high) << ',';
        if (p.spike_slab()) out << format_double(p.inclusion_prob);
        out << ',' << (p.converged ? 1 : 0) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace sfint
