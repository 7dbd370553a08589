#include <pdcbo/bench/config.hpp>

#include <pdcbo/problems/williams_otto.hpp>

#include <cstdio>
#include <fstream>
#include <set>

namespace pdcbo::bench {

using nlohmann::json;

namespace {
    void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
    {
        if (!j.is_object())
            throw ConfigError(where + ": expected an object");
        for (const auto& [key, _] : j.items()) {
            bool known = false;
            for (const char* a : allowed)
                known = known || key == a;
            if (!known)
                throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }

    template <typename T>
    T get(const json& j, const char* key, const std::string& where)
    {
        if (!j.contains(key))
            throw ConfigError(where + ": missing required key '" + key + "'");
        try {
            return j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    T get_or(const json& j, const char* key, T fallback, const std::string& where)
    {
        return j.contains(key) ? get<T>(j, key, where) : fallback;
    }

    Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), Index(v.size())); }
    std::vector<double> from_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

    Box parse_box(const json& j, const std::string& where)
    {
        Box b;
        try {
            for (const auto& iv : j)
                b.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        } catch (const json::exception& e) {
            throw ConfigError(where + ": boxes are lists of [lo, hi] pairs (" + e.what() + ")");
        }
        if (!box_valid(b))
            throw ConfigError(where + ": box must be nonempty with finite lo < hi");
        return b;
    }

    json box_json(const Box& b)
    {
        json out = json::array();
        for (const auto& iv : b)
            out.push_back({iv.lo, iv.hi});
        return out;
    }

    gp::KernelSpecd parse_kernel(const json& j, const std::string& where)
    {
        check_keys(j, where, {"kind", "signal_variance", "lengthscales"});
        try {
            return gp::KernelSpecd(gp::kernel_kind_from_string(get_or<std::string>(j, "kind", "squared_exponential", where)),
                                   get<double>(j, "signal_variance", where),
                                   to_vector(get<std::vector<double>>(j, "lengthscales", where)));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }

    json kernel_json(const gp::KernelSpecd& k)
    {
        return {{"kind", gp::to_string(k.kind)},
                {"signal_variance", k.signal_variance},
                {"lengthscales", from_vector(k.lengthscales)}};
    }

    Vector per_function(const json& j, const char* key, Index n, double fallback, const std::string& where)
    {
        if (!j.contains(key))
            return Vector::Constant(n, fallback);
        if (j.at(key).is_number())
            return Vector::Constant(n, j.at(key).get<double>());
        const auto v = get<std::vector<double>>(j, key, where);
        if (Index(v.size()) != n)
            throw ConfigError(where + "." + key + ": expected one value per function (" + std::to_string(n) + ")");
        return to_vector(v);
    }

    std::vector<Index> parse_resolution(const json& j, const std::string& where)
    {
        std::vector<Index> r;
        if (j.is_number_integer())
            r.push_back(j.get<Index>());
        else if (j.is_array())
            for (const auto& v : j)
                r.push_back(v.get<Index>());
        else
            throw ConfigError(where + ": resolution must be an integer or a list of integers");
        if (r.empty())
            throw ConfigError(where + ": empty resolution");
        for (Index v : r)
            if (v < 1)
                throw ConfigError(where + ": resolutions must be >= 1");
        return r;
    }

    ProblemSpec parse_problem(const json& j)
    {
        const std::string where = "problem";
        ProblemSpec p;
        p.family = get<std::string>(j, "family", where);
        if (p.family == "gp_sampled") {
            check_keys(j, where,
                       {"family", "n_constraints", "theta_box", "z_box", "anchor_resolution", "kernel", "noise_sigma"});
            p.n_constraints = get_or<Index>(j, "n_constraints", 1, where);
            if (p.n_constraints < 1)
                throw ConfigError(where + ".n_constraints must be >= 1");
            p.theta_box = parse_box(get<json>(j, "theta_box", where), where + ".theta_box");
            p.z_box = parse_box(get<json>(j, "z_box", where), where + ".z_box");
            if (j.contains("anchor_resolution"))
                p.anchor_resolution = parse_resolution(j.at("anchor_resolution"), where + ".anchor_resolution");
            for (Index r : p.anchor_resolution)
                if (r < 2)
                    throw ConfigError(where + ".anchor_resolution must be >= 2 per dimension");
            p.kernel = parse_kernel(get<json>(j, "kernel", where), where + ".kernel");
            if (p.kernel.dim() != Index(p.theta_box.size() + p.z_box.size()))
                throw ConfigError(where + ".kernel: need one lengthscale per theta and z dimension");
            p.noise_sigma = get_or<double>(j, "noise_sigma", 0.05, where);
        } else if (p.family == "williams_otto") {
            check_keys(j, where, {"family", "nominal_prices", "alpha", "noise_sigma"});
            p.n_constraints = 2;
            p.nominal_prices = to_vector(get_or<std::vector<double>>(
                j, "nominal_prices", from_vector(problems::williams_otto_nominal_prices()), where));
            if (p.nominal_prices.size() != 4 || !(p.nominal_prices.array() > 0.0).all())
                throw ConfigError(where + ".nominal_prices: expected 4 positive prices (P, E, A, B)");
            p.alpha = get_or<double>(j, "alpha", 0.2, where);
            if (!(p.alpha >= 0.0 && p.alpha < 1.0))
                throw ConfigError(where + ".alpha must lie in [0, 1)");
            p.noise_sigma = get_or<double>(j, "noise_sigma", 0.05, where);
            p.theta_box = problems::WilliamsOttoInstance::parameter_box();
            for (Index i = 0; i < 4; ++i)
                p.z_box.push_back({(1.0 - p.alpha) * p.nominal_prices(i), (1.0 + p.alpha) * p.nominal_prices(i)});
        } else {
            throw ConfigError(where + ".family: unknown problem family '" + p.family
                              + "' (expected gp_sampled or williams_otto)");
        }
        if (!(p.noise_sigma >= 0.0))
            throw ConfigError(where + ".noise_sigma must be non-negative");
        return p;
    }

    json problem_json(const ProblemSpec& p)
    {
        if (p.family == "williams_otto")
            return {{"family", p.family},
                    {"nominal_prices", from_vector(p.nominal_prices)},
                    {"alpha", p.alpha},
                    {"noise_sigma", p.noise_sigma}};
        return {{"family", p.family},
                {"n_constraints", p.n_constraints},
                {"theta_box", box_json(p.theta_box)},
                {"z_box", box_json(p.z_box)},
                {"anchor_resolution", p.anchor_resolution},
                {"kernel", kernel_json(p.kernel)},
                {"noise_sigma", p.noise_sigma}};
    }

    AlgorithmSpec parse_algorithm(const json& j, std::size_t index)
    {
        const std::string where = "algorithms[" + std::to_string(index) + "]";
        AlgorithmSpec a;
        a.name = get<std::string>(j, "name", where);
        a.label = get_or<std::string>(j, "label", a.name, where);
        if (a.name == "pdcbo") {
            check_keys(j, where,
                       {"name", "label", "schedule", "eta", "epsilon", "beta_sqrt", "delta", "noise_sub_gaussian",
                        "doubling", "initial_epoch"});
            auto& s = a.schedule;
            try {
                s.mode = solver::schedule_mode_from_string(get_or<std::string>(j, "schedule", "practical", where));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(where + ".schedule: " + e.what());
            }
            s.practical_eta = get_or<double>(j, "eta", 1.0, where);
            s.practical_epsilon = get_or<double>(j, "epsilon", 0.0, where);
            s.practical_beta = get_or<double>(j, "beta_sqrt", 1.0, where);
            s.delta = get_or<double>(j, "delta", 0.05, where);
            s.noise_sub_gaussian = get_or<double>(j, "noise_sub_gaussian", 0.05, where);
            s.doubling = get_or<bool>(j, "doubling", false, where);
            s.initial_epoch = get_or<long>(j, "initial_epoch", 1, where);
            if (!(s.practical_eta > 0.0) || !(s.practical_epsilon >= 0.0) || !(s.practical_beta > 0.0))
                throw ConfigError(where + ": eta and beta_sqrt must be positive, epsilon non-negative");
            if (!(s.delta > 0.0 && s.delta < 1.0))
                throw ConfigError(where + ".delta must lie in (0, 1)");
            if (s.initial_epoch < 1)
                throw ConfigError(where + ".initial_epoch must be >= 1");
            if (s.doubling && s.mode != solver::ScheduleMode::Theory)
                throw ConfigError(where + ": doubling requires the theory schedule");
        } else if (a.name == "cei") {
            check_keys(j, where, {"name", "label"});
        } else if (a.name == "safe_bo") {
            check_keys(j, where, {"name", "label", "beta_sqrt"});
            a.beta_sqrt = get_or<double>(j, "beta_sqrt", 2.0, where);
            if (!(a.beta_sqrt > 0.0))
                throw ConfigError(where + ".beta_sqrt must be positive");
        } else {
            throw ConfigError(where + ".name: unknown algorithm '" + a.name + "' (expected pdcbo, cei or safe_bo)");
        }
        if (a.label.empty() || a.label.find_first_of("/\\ ,") != std::string::npos)
            throw ConfigError(where + ".label must be nonempty without spaces, commas or slashes");
        return a;
    }

    json algorithm_json(const AlgorithmSpec& a)
    {
        json j = {{"name", a.name}, {"label", a.label}};
        if (a.name == "pdcbo") {
            const auto& s = a.schedule;
            j["schedule"] = solver::to_string(s.mode);
            j["eta"] = s.practical_eta;
            j["epsilon"] = s.practical_epsilon;
            j["beta_sqrt"] = s.practical_beta;
            j["delta"] = s.delta;
            j["noise_sub_gaussian"] = s.noise_sub_gaussian;
            j["doubling"] = s.doubling;
            j["initial_epoch"] = s.initial_epoch;
        } else if (a.name == "safe_bo") {
            j["beta_sqrt"] = a.beta_sqrt;
        }
        return j;
    }
} // namespace

ExperimentConfig parse_config(const json& j)
{
    check_keys(j, "config",
               {"name", "problem", "model", "grid", "context_resolution", "horizon", "replicates", "base_seed",
                "output_dir", "band_multiplier", "algorithms"});
    ExperimentConfig c;
    c.name = get_or<std::string>(j, "name", "experiment", "config");
    c.problem = parse_problem(get<json>(j, "problem", "config"));
    const Index nf = c.n_functions();
    const Index input_dim = Index(c.problem.theta_box.size() + c.problem.z_box.size());

    const json model = get<json>(j, "model", "config");
    check_keys(model, "model", {"kernel", "kernels", "noise_variance", "output_scale"});
    if (model.contains("kernels")) {
        const json& ks = model.at("kernels");
        if (!ks.is_array() || Index(ks.size()) != nf)
            throw ConfigError("model.kernels: expected one kernel per function (" + std::to_string(nf) + ")");
        for (std::size_t i = 0; i < ks.size(); ++i)
            c.kernels.push_back(parse_kernel(ks[i], "model.kernels[" + std::to_string(i) + "]"));
    } else {
        const auto k = parse_kernel(get<json>(model, "kernel", "model"), "model.kernel");
        c.kernels.assign(std::size_t(nf), k);
    }
    for (const auto& k : c.kernels)
        if (k.dim() != input_dim)
            throw ConfigError("model: kernel lengthscales must match n_theta + n_z = " + std::to_string(input_dim));
    c.noise_variance = per_function(model, "noise_variance", nf, 0.05 * 0.05, "model");
    c.output_scale = per_function(model, "output_scale", nf, 1.0, "model");
    if (!(c.noise_variance.array() > 0.0).all() || !(c.output_scale.array() > 0.0).all())
        throw ConfigError("model: noise variances and output scales must be positive");

    const json grid = get<json>(j, "grid", "config");
    check_keys(grid, "grid", {"resolution"});
    c.grid_resolution = parse_resolution(get<json>(grid, "resolution", "grid"), "grid.resolution");
    if (j.contains("context_resolution"))
        c.context_resolution = parse_resolution(j.at("context_resolution"), "context_resolution");

    c.horizon = get<long>(j, "horizon", "config");
    c.replicates = get_or<long>(j, "replicates", 1, "config");
    c.base_seed = get_or<std::uint64_t>(j, "base_seed", 0, "config");
    c.output_dir = get_or<std::string>(j, "output_dir", "runs/" + c.name, "config");
    c.band_multiplier = get_or<double>(j, "band_multiplier", 0.5, "config");
    if (c.horizon < 1 || c.replicates < 1)
        throw ConfigError("config: horizon and replicates must be >= 1");
    if (!(c.band_multiplier >= 0.0))
        throw ConfigError("config.band_multiplier must be non-negative");

    const json algs = get<json>(j, "algorithms", "config");
    if (!algs.is_array() || algs.empty())
        throw ConfigError("config.algorithms: expected a nonempty list");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < algs.size(); ++i) {
        c.algorithms.push_back(parse_algorithm(algs[i], i));
        if (!labels.insert(c.algorithms.back().label).second)
            throw ConfigError("config.algorithms: duplicate label '" + c.algorithms.back().label + "'");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c)
{
    json kernels = json::array();
    for (const auto& k : c.kernels)
        kernels.push_back(kernel_json(k));
    json algs = json::array();
    for (const auto& a : c.algorithms)
        algs.push_back(algorithm_json(a));
    return {{"name", c.name},
            {"problem", problem_json(c.problem)},
            {"model",
             {{"kernels", kernels},
              {"noise_variance", from_vector(c.noise_variance)},
              {"output_scale", from_vector(c.output_scale)}}},
            {"grid", {{"resolution", c.grid_resolution}}},
            {"context_resolution", c.context_resolution},
            {"horizon", c.horizon},
            {"replicates", c.replicates},
            {"base_seed", c.base_seed},
            {"output_dir", c.output_dir},
            {"band_multiplier", c.band_multiplier},
            {"algorithms", algs}};
}

std::string config_hash(const ExperimentConfig& c)
{
    json j = to_json(c);
    j.erase("output_dir");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace pdcbo::bench
