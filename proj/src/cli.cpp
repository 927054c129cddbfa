#include "sfint/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sfint/error.hpp"
#include "sfint/genomics.hpp"
#include "sfint/simulation.hpp"
#include "sfint/summary.hpp"

namespace sfint {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Context {
    Config resolved;
    fs::path dir;
    int threads;
    std::vector<std::string> files;

    std::string path(const std::string& name) const { return (dir / name).string(); }
    void finish(const std::string& command)
    {
        const auto seed = static_cast<std::uint64_t>(std::stoull(resolved.at("mcmc.seed")));
        write_manifest(dir.string(), command, resolved, seed, files);
    }
};

template <typename Derived>
nlohmann::ordered_json matrix_json(const Eigen::DenseBase<Derived>& m)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_json(const nlohmann::ordered_json& j, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

void cmd_simulate(Context& ctx, std::ostream& out)
{
    const SyntheticDataset ds = generate_saddle_dataset(simulation_from_config(ctx.resolved));
    write_data_csv(ds.data, ctx.path("data.csv"));
    const SyntheticTruth& t = ds.truth;
    nlohmann::ordered_json j;
    j["affected_set"] = t.affected_set;
    j["seed_groups"] = t.seed_groups;
    j["flipped_seeds"] = t.flipped_seeds;
    j["two_factor_set"] = t.two_factor_set;
    j["alpha"] = matrix_json(t.alpha);
    j["lambda"] = matrix_json(t.lambda);
    j["effect"] = matrix_json(t.effect);
    j["sigma2"] = matrix_json(t.sigma2);
    write_json(j, ctx.path("truth.json"));
    ctx.files = {"data.csv", "truth.json"};
    out << "features=" << ds.data.features() << "\nsamples=" << ds.data.samples()
        << "\naffected=" << t.affected_set.size() << '\n';
}

void write_acceptance_csv(const PosteriorDraws& draws, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "sample,accepted,proposed,rate\n";
    for (std::size_t j = 0; j < draws.mh_proposed.size(); ++j) {
        const auto p = draws.mh_proposed[j];
        out << j << ',' << draws.mh_accepted[j] << ',' << p << ','
            << format_double(p > 0 ? static_cast<double>(draws.mh_accepted[j]) / static_cast<double>(p) : 0.0) << '\n';
    }
    out << "all,,," << format_double(draws.acceptance_rate()) << '\n';
}

void cmd_fit(Context& ctx, std::ostream& out)
{
    const DataMatrix data = standardize_rows(read_data_csv(ctx.resolved.at("paths.data")));
    const ModelSpec spec = spec_from_config(ctx.resolved);
    const McmcSettings settings = mcmc_from_config(ctx.resolved);
    const int chains = std::stoi(ctx.resolved.at("mcmc.chains"));
    const PosteriorDraws draws =
        pool_chains(fit_chains(spec, data, settings, mh_from_config(ctx.resolved), chains, ctx.threads));
    save_draws(draws, ctx.path("draws.bin"));
    ctx.files.push_back("draws.bin");
    if (draws.states.size() >= static_cast<std::size_t>(kMinSummaryStates)) {
        write_summary_csv(posterior_summary(draws), ctx.path("summary.csv"));
        ctx.files.push_back("summary.csv");
    }
    out << "states=" << draws.states.size() << '\n';
    if (draws.family == Family::Gp) {
        write_acceptance_csv(draws, ctx.path("acceptance.csv"));
        ctx.files.push_back("acceptance.csv");
        out << "acceptance_rate=" << format_double(draws.acceptance_rate()) << '\n';
    }
}

void cmd_summarize(Context& ctx, std::ostream& out)
{
    const PosteriorDraws draws = load_draws(ctx.resolved.at("paths.draws"));
    const PosteriorSummary s = posterior_summary(draws);
    write_summary_csv(s, ctx.path("summary.csv"));
    ctx.files = {"summary.csv"};
    out << "parameters=" << s.parameters.size() << "\nstates=" << s.states << '\n';
}

void cmd_detect(Context& ctx, std::ostream& out)
{
    const PosteriorDraws draws = load_draws(ctx.resolved.at("paths.draws"));
    const double threshold = std::stod(ctx.resolved.at("detect.threshold"));
    const auto found = detect_interactions(draws, threshold);
    std::ofstream f(ctx.path("detected.csv"), std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write detected.csv");
    f << "feature,probability\n";
    for (const auto& d : found) f << d.feature << ',' << format_double(d.probability) << '\n';
    f.close();
    ctx.files = {"detected.csv"};
    out << "detected=" << found.size() << '\n';
}

ModelSpec parse_compare_spec(const std::string& item)
{
    const auto colon = item.find(':');
    const std::string name = item.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : item.substr(colon + 1);
    if (name.rfind("gp", 0) == 0 && name.size() == 3 && name[2] >= '1' && name[2] <= '5')
        return make_gp_spec(name[2] - '0', arg.empty() ? 0.2 : std::stod(arg));
    const Family family = family_from_string(name);
    if (family == Family::Gp) return make_gp_spec(1, arg.empty() ? 0.2 : std::stod(arg));
    return make_mult_spec(family, arg.empty() ? 1e-5 : std::stod(arg));
}

void cmd_compare(Context& ctx, std::ostream& out)
{
    const SyntheticDataset ds = generate_saddle_dataset(simulation_from_config(ctx.resolved));
    std::vector<ModelSpec> specs;
    std::string list = ctx.resolved.at("compare.specs");
    std::replace(list.begin(), list.end(), ',', ' ');
    std::istringstream items(list);
    for (std::string item; items >> item;) {
        try {
            specs.push_back(parse_compare_spec(item));
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::ParseError, "compare.specs: bad entry '" + item + "'");
        }
    }
    if (specs.empty()) throw Error(ErrorCode::ParseError, "compare.specs is empty");
    CompareOptions options;
    options.mcmc = mcmc_from_config(ctx.resolved);
    options.mh = mh_from_config(ctx.resolved);
    options.threads = ctx.threads;
    options.surface_resolution = std::stoi(ctx.resolved.at("surface.resolution"));
    const ComparisonReport report = compare_models(ds, specs, options);
    write_report_csv(report, ctx.path("report.csv"));
    ctx.files.push_back("report.csv");
    for (const ComparisonRow& row : report.rows) {
        for (std::size_t k = 0; k < row.surfaces.size(); ++k) {
            const std::string name =
                "surface_" + row.label + "_f" + std::to_string(ds.truth.affected_set[k]) + ".csv";
            write_surface_csv(row.surfaces[k], ctx.path(name));
            ctx.files.push_back(name);
        }
        out << row.label << " aad_lambda=" << format_double(row.aad_lambda)
            << " aad_effect=" << format_double(row.aad_effect)
            << " accuracy=" << format_double(row.confusion.accuracy())
            << " saddle_recovery=" << format_double(row.saddle_recovery) << '\n';
    }
}

void cmd_test_overlap(Context& ctx, std::ostream& out)
{
    OverlapTestInput in;
    in.population_size = std::stoll(ctx.resolved.at("overlap.population"));
    for (Index c : parse_index_list(ctx.resolved.at("overlap.counts"))) in.per_dataset_counts.push_back(c);
    in.observed_overlap = std::stoll(ctx.resolved.at("overlap.observed"));
    in.n_replicates = std::stoll(ctx.resolved.at("overlap.replicates"));
    const auto seed = static_cast<std::uint64_t>(std::stoull(ctx.resolved.at("mcmc.seed")));
    const OverlapTestResult r = overlap_permutation_test(in, seed, ctx.threads);
    nlohmann::ordered_json j;
    j["population_size"] = in.population_size;
    j["per_dataset_counts"] = in.per_dataset_counts;
    j["observed_overlap"] = in.observed_overlap;
    j["n_replicates"] = r.n_replicates;
    j["exceed_count"] = r.exceed_count;
    j["p_value"] = r.p_value;
    j["mean_overlap"] = r.mean_overlap;
    j["sd_overlap"] = r.sd_overlap;
    j["min_overlap"] = r.min_overlap;
    j["max_overlap"] = r.max_overlap;
    write_json(j, ctx.path("overlap.json"));
    ctx.files = {"overlap.json"};
    out << "p_value=" << format_double(r.p_value) << "\nmean_overlap=" << format_double(r.mean_overlap) << '\n';
}

void cmd_export_surface(Context& ctx, std::ostream& out)
{
    const PosteriorDraws draws = load_draws(ctx.resolved.at("paths.draws"));
    if (draws.states.empty()) throw Error(ErrorCode::InsufficientDraws, "draws file holds no states");
    const Index feature = std::stoll(ctx.resolved.at("surface.feature"));
    const Eigen::MatrixXd effect = posterior_mean_effect(draws);
    if (feature < 0 || feature >= effect.rows()) throw Error(ErrorCode::InvalidArgument, "surface.feature out of range");
    const SurfaceGrid grid = export_surface(Eigen::VectorXd(effect.row(feature).transpose()),
                                            posterior_mean_lambda(draws), std::stoi(ctx.resolved.at("surface.resolution")),
                                            std::stoi(ctx.resolved.at("surface.neighbors")));
    write_surface_csv(grid, ctx.path("surface.csv"));
    ctx.files = {"surface.csv"};
    const auto q = quadrant_signs(grid);
    out << "quadrant_signs=" << q[0] << ',' << q[1] << ',' << q[2] << ',' << q[3] << '\n';
}

}  // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"simulate", "fit",          "summarize",     "detect",
                                                "compare",  "test-overlap", "export-surface"};
    return names;
}

void run(const RunConfig& config, std::ostream& out)
{
    Context ctx;
    ctx.resolved = resolve_config(config.config);
    if (config.seed) ctx.resolved["mcmc.seed"] = std::to_string(*config.seed);
    ctx.dir = config.output_dir.empty() ? fs::path(".") : fs::path(config.output_dir);
    ctx.threads = std::max(1, config.threads);
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + ctx.dir.string());

    try {
        const std::string& c = config.command;
        if (c == "simulate") cmd_simulate(ctx, out);
        else if (c == "fit") cmd_fit(ctx, out);
        else if (c == "summarize") cmd_summarize(ctx, out);
        else if (c == "detect") cmd_detect(ctx, out);
        else if (c == "compare") cmd_compare(ctx, out);
        else if (c == "test-overlap") cmd_test_overlap(ctx, out);
        else if (c == "export-surface") cmd_export_surface(ctx, out);
        else throw Error(ErrorCode::InvalidArgument, "unknown command '" + c + "'");
    } catch (const std::invalid_argument& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed configuration value: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw Error(ErrorCode::ParseError, std::string("configuration value out of range: ") + e.what());
    }
    ctx.finish(config.command);
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try {
        run(config, out);
        return 0;
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error " << to_string(e.code()) << ": " << msg << '\n';
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error Internal: " << msg << '\n';
    }
    return 2;
}

}  // namespace sfint
