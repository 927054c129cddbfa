#include "sfint/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "json.hpp"
#include "sfint/error.hpp"

namespace sfint {

static_assert(std::endian::native == std::endian::little, "draws files are written in host order");

namespace {

constexpr char kMagic[8] = {'S', 'F', 'D', 'R', 'A', 'W', 'S', '\0'};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double to_double(const std::string& key, const std::string& value)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::ParseError, key + ": expected a number, got '" + value + "'");
}

long long to_int(const std::string& key, const std::string& value)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::ParseError, key + ": expected an integer, got '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw Error(ErrorCode::ParseError, key + ": expected true or false, got '" + value + "'");
}

const std::string& get(const Config& c, const std::string& key)
{
    const auto it = c.find(key);
    if (it == c.end()) throw Error(ErrorCode::ParseError, "missing configuration key " + key);
    return it->second;
}

std::optional<double> optional_double(const Config& c, const std::string& key)
{
    const std::string& v = get(c, key);
    if (v.empty()) return std::nullopt;
    return to_double(key, v);
}

void read_beta_table(const Config& c, const std::string& prefix, BetaTable& table)
{
    table.base = {to_double(prefix + ".a", get(c, prefix + ".a")), to_double(prefix + ".b", get(c, prefix + ".b"))};
    const std::pair<const char*, PriorGroup> groups[] = {{"associated", PriorGroup::Associated},
                                                         {"not_associated", PriorGroup::NotAssociated},
                                                         {"unknown", PriorGroup::Unknown}};
    for (const auto& [name, group] : groups) {
        const std::string key = prefix + "." + name;
        const std::string& a = get(c, key + ".a");
        const std::string& b = get(c, key + ".b");
        if (a.empty() != b.empty()) throw Error(ErrorCode::ParseError, key + ": set both .a and .b");
        if (!a.empty()) table.per_group[group] = {to_double(key + ".a", a), to_double(key + ".b", b)};
    }
}

// Little-endian byte buffer with bounds-checked reads.
class Writer {
public:
    template <typename T>
    void put(T v)
    {
        char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        buf_.append(bytes, sizeof(T));
    }
    template <typename Derived>
    void put_matrix(const Eigen::DenseBase<Derived>& m)
    {
        put<std::int64_t>(m.rows());
        put<std::int64_t>(m.cols());
        using Scalar = typename Derived::Scalar;
        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense = m;
        buf_.append(reinterpret_cast<const char*>(dense.data()), sizeof(Scalar) * static_cast<std::size_t>(dense.size()));
    }
    std::string& bytes() { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(const std::string& data, std::size_t begin, std::size_t end) : data_(data), pos_(begin), end_(end) {}

    template <typename T>
    T get()
    {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    template <typename Scalar>
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> get_matrix()
    {
        const auto rows = get<std::int64_t>();
        const auto cols = get<std::int64_t>();
        if (rows < 0 || cols < 0 || (rows > 0 && cols > static_cast<std::int64_t>(remaining() / sizeof(Scalar)) / rows))
            throw Error(ErrorCode::CorruptFile, "draws file: bad block shape");
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
        const std::size_t bytes = sizeof(Scalar) * static_cast<std::size_t>(rows * cols);
        need(bytes);
        std::memcpy(m.data(), data_.data() + pos_, bytes);
        pos_ += bytes;
        return m;
    }
    std::size_t remaining() const { return end_ - pos_; }

private:
    void need(std::size_t n) const
    {
        if (n > remaining()) throw Error(ErrorCode::CorruptFile, "draws file: payload ends early");
    }
    const std::string& data_;
    std::size_t pos_;
    std::size_t end_;
};

std::uint32_t crc_of(const char* data, std::size_t size)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::string hex32(std::uint32_t v)
{
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

}  // namespace

DataMatrix read_data_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ": empty file");
    std::vector<std::string> header = split(line, ',');
    if (header.size() < 2) throw Error(ErrorCode::ParseError, path + ": header needs at least one sample id");
    DataMatrix out;
    out.sample_ids.assign(header.begin() + 1, header.end());
    const std::size_t n = out.sample_ids.size();
    std::vector<double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != n + 1)
            throw Error(ErrorCode::ShapeMismatch, path + ":" + std::to_string(line_no) + ": expected " +
                                                      std::to_string(n + 1) + " fields, got " +
                                                      std::to_string(cells.size()));
        out.feature_ids.push_back(cells[0]);
        for (std::size_t j = 1; j <= n; ++j)
            values.push_back(to_double(path + ":" + std::to_string(line_no), cells[j]));
    }
    const auto m = static_cast<Index>(out.feature_ids.size());
    out.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), m, static_cast<Index>(n));
    return out;
}

void write_data_csv(const DataMatrix& data, const std::string& path)
{
    if (static_cast<Index>(data.feature_ids.size()) != data.features() ||
        static_cast<Index>(data.sample_ids.size()) != data.samples())
        throw Error(ErrorCode::ShapeMismatch, "data ids do not match the matrix shape");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "feature";
    for (const auto& s : data.sample_ids) out << ',' << s;
    out << '\n';
    for (Index i = 0; i < data.features(); ++i) {
        out << data.feature_ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < data.samples(); ++j) out << ',' << format_double(data.values(i, j));
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

const Config& config_defaults()
{
    static const Config defaults = [] {
        Config c{
            {"model.family", "gp"},
            {"model.factors", "2"},
            {"model.gp_variant", "1"},
            {"model.length_scale", ""},
            {"model.nu", ""},
            {"model.omega", ""},
            {"model.omega_alpha", ""},
            {"model.omega_theta", ""},
            {"model.sigma2_shape", "2.1"},
            {"model.sigma2_scale", "1.1"},
            {"model.loading_prior", ""},
            {"model.interaction_prior", ""},
            {"prior.gamma.a", "1"},
            {"prior.gamma.b", "1"},
            {"prior.beta.a", "1"},
            {"prior.beta.b", "1"},
            {"seeds.group1", ""},
            {"seeds.group2", ""},
            {"seeds.constrain", "true"},
            {"mcmc.iters", "600"},
            {"mcmc.burn_in", "300"},
            {"mcmc.thin", "1"},
            {"mcmc.seed", "1"},
            {"mcmc.chains", "1"},
            {"mh.rw_step", "0.1"},
            {"mh.adapt", "true"},
            {"mh.target_accept", "0.3"},
            {"simulate.features", "100"},
            {"simulate.samples", "100"},
            {"simulate.frac_affected", "0.1"},
            {"simulate.noise_scale", "1"},
            {"simulate.kind", "product"},
            {"simulate.seed_fraction", "0.1"},
            {"simulate.flipped_seeds", "0"},
            {"simulate.two_factor_features", "-1"},
            {"paths.data", "data.csv"},
            {"paths.draws", "draws.bin"},
            {"detect.threshold", "0.5"},
            {"overlap.population", "3704"},
            {"overlap.counts", "314,170,244,255"},
            {"overlap.observed", "136"},
            {"overlap.replicates", "100000"},
            {"surface.feature", "0"},
            {"surface.resolution", "25"},
            {"surface.neighbors", "8"},
            {"compare.specs", "mult_approach2, gp1:0.2, gp1:0.5"},
        };
        for (const char* table : {"prior.gamma", "prior.beta"})
            for (const char* group : {"associated", "not_associated", "unknown"})
                for (const char* p : {"a", "b"}) c[std::string(table) + "." + group + "." + p] = "";
        return c;
    }();
    return defaults;
}

Config parse_config(const std::string& text, const std::string& origin)
{
    Config out;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": empty key");
        if (!config_defaults().contains(key))
            throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": unknown key " + key);
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

Config read_config(const std::string& path) { return parse_config(read_file(path), path); }

void apply_override(Config& config, const std::string& assignment)
{
    const Config one = parse_config(assignment, "--set");
    if (one.size() != 1) throw Error(ErrorCode::ParseError, "--set expects key=value, got '" + assignment + "'");
    config[one.begin()->first] = one.begin()->second;
}

Config resolve_config(const Config& config)
{
    Config out = config_defaults();
    for (const auto& [k, v] : config) {
        if (!out.contains(k)) throw Error(ErrorCode::ParseError, "unknown key " + k);
        out[k] = v;
    }
    return out;
}

std::vector<Index> parse_index_list(const std::string& text)
{
    std::vector<Index> out;
    for (const std::string& item : split(text, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-', 1);
        if (dash == std::string::npos) {
            out.push_back(to_int("index list", item));
            continue;
        }
        const long long lo = to_int("index list", trim(item.substr(0, dash)));
        const long long hi = to_int("index list", trim(item.substr(dash + 1)));
        if (hi < lo) throw Error(ErrorCode::ParseError, "index range " + item + " is reversed");
        for (long long i = lo; i <= hi; ++i) out.push_back(i);
    }
    return out;
}

ModelSpec spec_from_config(const Config& in)
{
    const Config c = resolve_config(in);
    ModelSpec spec;
    spec.family = family_from_string(get(c, "model.family"));
    spec.factors = static_cast<int>(to_int("model.factors", get(c, "model.factors")));
    if (spec.family == Family::Gp) {
        spec.gp_variant = static_cast<int>(to_int("model.gp_variant", get(c, "model.gp_variant")));
    }
    spec.length_scale = optional_double(c, "model.length_scale");
    spec.nu = optional_double(c, "model.nu");
    spec.omega = optional_double(c, "model.omega");
    spec.omega_alpha = optional_double(c, "model.omega_alpha");
    spec.omega_theta = optional_double(c, "model.omega_theta");
    spec.sigma2_prior = {to_double("model.sigma2_shape", get(c, "model.sigma2_shape")),
                         to_double("model.sigma2_scale", get(c, "model.sigma2_scale"))};

    if (const std::string& v = get(c, "model.loading_prior"); !v.empty()) {
        if (v == "per_entry") spec.loading_prior = LoadingPrior::PerEntry;
        else if (v == "grouped") spec.loading_prior = LoadingPrior::Grouped;
        else throw Error(ErrorCode::ParseError, "model.loading_prior: expected per_entry or grouped");
    }
    if (const std::string& v = get(c, "model.interaction_prior"); !v.empty()) {
        if (v == "per_feature") spec.interaction_prior = InteractionPrior::PerFeature;
        else if (v == "global") spec.interaction_prior = InteractionPrior::Global;
        else if (v == "grouped") spec.interaction_prior = InteractionPrior::Grouped;
        else throw Error(ErrorCode::ParseError, "model.interaction_prior: expected per_feature, global or grouped");
    }
    read_beta_table(c, "prior.gamma", spec.gamma_params);
    read_beta_table(c, "prior.beta", spec.beta_params);

    const std::vector<Index> g1 = parse_index_list(get(c, "seeds.group1"));
    const std::vector<Index> g2 = parse_index_list(get(c, "seeds.group2"));
    if (!g1.empty() || !g2.empty()) spec.seed_groups = {g1, g2};
    if (to_bool("seeds.constrain", get(c, "seeds.constrain"))) constrain_seed_groups(spec);
    return spec;
}

McmcSettings mcmc_from_config(const Config& in)
{
    const Config c = resolve_config(in);
    McmcSettings s;
    s.iters = static_cast<int>(to_int("mcmc.iters", get(c, "mcmc.iters")));
    s.burn_in = static_cast<int>(to_int("mcmc.burn_in", get(c, "mcmc.burn_in")));
    s.thin = static_cast<int>(to_int("mcmc.thin", get(c, "mcmc.thin")));
    s.seed = static_cast<std::uint64_t>(to_int("mcmc.seed", get(c, "mcmc.seed")));
    if (s.thin < 1 || s.burn_in < 0 || s.burn_in >= s.iters)
        throw Error(ErrorCode::InvalidArgument, "mcmc: require 0 <= burn_in < iters and thin >= 1");
    return s;
}

MhSettings mh_from_config(const Config& in)
{
    const Config c = resolve_config(in);
    MhSettings mh;
    mh.rw_step = to_double("mh.rw_step", get(c, "mh.rw_step"));
    mh.adapt = to_bool("mh.adapt", get(c, "mh.adapt"));
    mh.target_accept = to_double("mh.target_accept", get(c, "mh.target_accept"));
    return mh;
}

SaddleOptions simulation_from_config(const Config& in)
{
    const Config c = resolve_config(in);
    SaddleOptions o;
    o.features = to_int("simulate.features", get(c, "simulate.features"));
    o.samples = to_int("simulate.samples", get(c, "simulate.samples"));
    o.frac_affected = to_double("simulate.frac_affected", get(c, "simulate.frac_affected"));
    o.noise_scale = to_double("simulate.noise_scale", get(c, "simulate.noise_scale"));
    o.seed = static_cast<std::uint64_t>(to_int("mcmc.seed", get(c, "mcmc.seed")));
    const std::string& kind = get(c, "simulate.kind");
    if (kind == "product") o.kind = InteractionKind::Product;
    else if (kind == "independent") o.kind = InteractionKind::IndependentFactor;
    else throw Error(ErrorCode::ParseError, "simulate.kind: expected product or independent");
    o.seed_fraction = to_double("simulate.seed_fraction", get(c, "simulate.seed_fraction"));
    o.flipped_seeds = to_int("simulate.flipped_seeds", get(c, "simulate.flipped_seeds"));
    o.two_factor_features = to_int("simulate.two_factor_features", get(c, "simulate.two_factor_features"));
    return o;
}

void save_draws(const PosteriorDraws& draws, const std::string& path)
{
    Writer w;
    w.bytes().append(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kDrawsFormatVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(draws.family));
    w.put<std::int32_t>(draws.total_iters);
    w.put<std::int32_t>(draws.burn_in);
    w.put<std::int32_t>(draws.thin);
    w.put<double>(draws.rw_step);
    for (const auto* tally : {&draws.mh_accepted, &draws.mh_proposed}) {
        w.put<std::uint64_t>(tally->size());
        for (std::int64_t v : *tally) w.put<std::int64_t>(v);
    }
    w.put<std::uint64_t>(draws.states.size());
    for (const McmcState& s : draws.states) {
        w.put_matrix(s.alpha);
        w.put_matrix(s.lambda);
        w.put_matrix(s.theta);
        w.put_matrix(s.eta);
        w.put_matrix(s.effect);
        w.put_matrix(s.shared_effect);
        w.put_matrix(s.sigma2);
        w.put_matrix(s.h);
        w.put_matrix(s.z);
        w.put_matrix(s.q);
        w.put_matrix(s.rho);
    }
    w.put<std::uint32_t>(crc_of(w.bytes().data(), w.bytes().size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

PosteriorDraws load_draws(const std::string& path)
{
    const std::string data = read_file(path);
    constexpr std::size_t header = sizeof kMagic + sizeof(std::uint32_t);
    if (data.size() < header + sizeof(std::uint32_t) || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
        throw Error(ErrorCode::CorruptFile, path + ": not a draws file");
    std::uint32_t version = 0;
    std::memcpy(&version, data.data() + sizeof kMagic, sizeof version);
    if (version != kDrawsFormatVersion)
        throw Error(ErrorCode::FormatVersionMismatch, path + ": file format version " + std::to_string(version) +
                                                          ", reader supports version " +
                                                          std::to_string(kDrawsFormatVersion));
    const std::size_t body = data.size() - sizeof(std::uint32_t);
    std::uint32_t stored = 0;
    std::memcpy(&stored, data.data() + body, sizeof stored);
    if (stored != crc_of(data.data(), body)) throw Error(ErrorCode::CorruptFile, path + ": checksum mismatch");

    Reader r(data, header, body);
    PosteriorDraws d;
    const auto family = r.get<std::uint8_t>();
    if (family > static_cast<std::uint8_t>(Family::Gp)) throw Error(ErrorCode::CorruptFile, path + ": bad family tag");
    d.family = static_cast<Family>(family);
    d.total_iters = r.get<std::int32_t>();
    d.burn_in = r.get<std::int32_t>();
    d.thin = r.get<std::int32_t>();
    d.rw_step = r.get<double>();
    for (auto* tally : {&d.mh_accepted, &d.mh_proposed}) {
        const auto count = r.get<std::uint64_t>();
        if (count > r.remaining() / sizeof(std::int64_t)) throw Error(ErrorCode::CorruptFile, path + ": bad tally size");
        tally->resize(count);
        for (auto& v : *tally) v = r.get<std::int64_t>();
    }
    const auto states = r.get<std::uint64_t>();
    if (states > r.remaining()) throw Error(ErrorCode::CorruptFile, path + ": bad state count");
    d.states.resize(states);
    for (McmcState& s : d.states) {
        s.alpha = r.get_matrix<double>();
        s.lambda = r.get_matrix<double>();
        s.theta = r.get_matrix<double>();
        s.eta = r.get_matrix<double>();
        s.effect = r.get_matrix<double>();
        s.shared_effect = r.get_matrix<double>();
        s.sigma2 = r.get_matrix<double>();
        s.h = r.get_matrix<int>();
        s.z = r.get_matrix<int>();
        s.q = r.get_matrix<double>();
        s.rho = r.get_matrix<double>();
    }
    if (r.remaining() != 0) throw Error(ErrorCode::CorruptFile, path + ": trailing bytes after the last state");
    return d;
}

std::uint32_t file_crc32(const std::string& path)
{
    const std::string data = read_file(path);
    return crc_of(data.data(), data.size());
}

void write_manifest(const std::string& dir, const std::string& command, const Config& resolved,
                    std::uint64_t seed, const std::vector<std::string>& files)
{
    namespace fs = std::filesystem;
    nlohmann::ordered_json j;
    j["command"] = command;
    j["seed"] = seed;
    j["draws_format_version"] = kDrawsFormatVersion;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : resolved) j["config"][k] = v;
    j["files"] = nlohmann::ordered_json::array();
    for (const std::string& f : files) {
        const fs::path p = fs::path(dir) / f;
        j["files"].push_back({{"path", f}, {"crc32", hex32(file_crc32(p.string()))}, {"bytes", fs::file_size(p)}});
    }
    std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write manifest in " + dir);
    out << j.dump(2) << '\n';
}

std::vector<std::string> verify_manifest(const std::string& dir)
{
    namespace fs = std::filesystem;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file((fs::path(dir) / "manifest.json").string()));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest.json: ") + e.what());
    }
    std::vector<std::string> bad;
    for (const auto& f : j.at("files")) {
        const std::string rel = f.at("path").get<std::string>();
        const fs::path p = fs::path(dir) / rel;
        if (!fs::exists(p) || hex32(file_crc32(p.string())) != f.at("crc32").get<std::string>()) bad.push_back(rel);
    }
    return bad;
}

}  // namespace sfint
