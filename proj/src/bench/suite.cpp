#include <pdcbo/bench/suite.hpp>

#include <pdcbo/baselines/baselines.hpp>
#include <pdcbo/bench/trace_io.hpp>
#include <pdcbo/metrics/metrics.hpp>
#include <pdcbo/problems/gp_sampled.hpp>
#include <pdcbo/problems/williams_otto.hpp>
#include <pdcbo/solver/pdcbo.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace pdcbo::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
    std::vector<Index> broadcast(const std::vector<Index>& r, std::size_t dim, const char* what)
    {
        if (r.size() == dim)
            return r;
        if (r.size() == 1)
            return std::vector<Index>(dim, r.front());
        throw ConfigError(std::string(what) + ": expected 1 or " + std::to_string(dim) + " resolutions");
    }

    Box problem_joint_box(const ExperimentConfig& cfg)
    {
        Box b = cfg.problem.theta_box;
        b.insert(b.end(), cfg.problem.z_box.begin(), cfg.problem.z_box.end());
        return b;
    }

    /// Runs job(i) for i in [0, n) on up to `workers` threads.
    void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job)
    {
        const std::size_t threads = std::min<std::size_t>(n, std::size_t(std::max(1, workers)));
        if (threads <= 1) {
            for (std::size_t i = 0; i < n; ++i)
                job(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++)
                    job(i);
            });
        for (auto& th : pool)
            th.join();
    }

    struct Cell {
        const AlgorithmSpec* algorithm;
        long replicate;
    };

    std::vector<Cell> cells_of(const ExperimentConfig& cfg)
    {
        std::vector<Cell> cells;
        for (const auto& a : cfg.algorithms)
            for (long r = 0; r < cfg.replicates; ++r)
                cells.push_back({&a, r});
        return cells;
    }

    std::string read_file(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot read " + p.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_config(const fs::path& dir, const ExperimentConfig& cfg)
    {
        fs::create_directories(dir);
        std::ofstream out(dir / "config.json", std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + (dir / "config.json").string());
        out << to_json(cfg).dump(2) << '\n';
    }

    std::string fmt(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    std::string short_fmt(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return buf;
    }

    void mean_std(const std::vector<double>& xs, double& mean, double& sd)
    {
        mean = 0.0;
        for (double x : xs)
            mean += x;
        mean /= double(xs.size());
        double ss = 0.0;
        for (double x : xs)
            ss += (x - mean) * (x - mean);
        sd = xs.size() > 1 ? std::sqrt(ss / double(xs.size() - 1)) : 0.0;
    }
} // namespace

Lattice make_grid(const ExperimentConfig& cfg)
{
    return Lattice(cfg.problem.theta_box, broadcast(cfg.grid_resolution, cfg.problem.theta_box.size(), "grid.resolution"));
}

Lattice make_context_lattice(const ExperimentConfig& cfg)
{
    return Lattice(cfg.problem.z_box, broadcast(cfg.context_resolution, cfg.problem.z_box.size(), "context_resolution"));
}

std::uint64_t replicate_seed(const ExperimentConfig& cfg, long replicate)
{
    return derive_seed(cfg.base_seed, Stream::Replicate, {std::uint64_t(replicate)});
}

problems::ProblemPtr make_problem(const ExperimentConfig& cfg, long replicate, const Lattice& grid)
{
    const auto& p = cfg.problem;
    if (p.family == "williams_otto")
        return std::make_shared<problems::WilliamsOttoInstance>(p.nominal_prices, p.alpha, p.noise_sigma,
                                                                problems::WilliamsOttoConstants{}, &grid);
    const std::size_t dim = p.theta_box.size() + p.z_box.size();
    return problems::sample_gp_instance(p.kernel, p.theta_box, p.z_box, p.n_constraints,
                                        derive_seed(cfg.base_seed, Stream::Problem, {std::uint64_t(replicate)}),
                                        broadcast(p.anchor_resolution, dim, "problem.anchor_resolution"), p.noise_sigma);
}

InstanceConstants instance_constants(const ExperimentConfig& cfg,
                                     const problems::ProblemInstance& problem,
                                     const Lattice& grid)
{
    const Lattice lattice = make_context_lattice(cfg);
    const Matrix& contexts = lattice.points();
    InstanceConstants c;
    c.sup_norm = metrics::sup_norms(problem, grid, contexts).cwiseQuotient(cfg.output_scale);
    const auto slater = metrics::uniform_slater(problem, grid, contexts, cfg.output_scale.tail(problem.n_constraints()));
    c.xi = slater.xi;
    c.slater_seed_index = slater.seed_index;
    c.slater_seed_margin = slater.seed_margin;
    return c;
}

ExperimentTrace run_cell(const ExperimentConfig& cfg, const AlgorithmSpec& algorithm, long replicate)
{
    const Lattice grid = make_grid(cfg);
    const problems::ProblemPtr problem = make_problem(cfg, replicate, grid);
    const std::uint64_t seed = replicate_seed(cfg, replicate);
    const solver::ModelSetup setup{cfg.kernels, cfg.noise_variance, cfg.output_scale, grid};
    const Index nf = cfg.n_functions();

    ExperimentTrace trace;
    if (algorithm.name == "pdcbo") {
        solver::ScheduleConfig s = algorithm.schedule;
        s.horizon = cfg.horizon;
        if (s.mode == solver::ScheduleMode::Theory) {
            const InstanceConstants k = instance_constants(cfg, *problem, grid);
            if (!(k.xi > 0.0))
                throw InfeasibleContextError("no uniform Slater margin on the context lattice (xi = " + short_fmt(k.xi)
                                             + "); theory schedule undefined");
            s.c0 = k.sup_norm(0);
            s.c = k.sup_norm.tail(nf - 1);
            s.xi = k.xi;
        }
        trace = s.doubling ? solver::run_with_doubling(problem, s, setup, seed, cfg.horizon)
                           : solver::run_pdcbo(problem, s, setup, seed, cfg.horizon);
    } else if (algorithm.name == "cei") {
        baselines::CeiPolicy policy(nf);
        trace = solver::run_policy(problem, policy, setup, seed, cfg.horizon);
    } else if (algorithm.name == "safe_bo") {
        baselines::SafeBoState state;
        state.beta_sqrt = algorithm.beta_sqrt;
        double margin = 0.0;
        if (const auto declared = problem->declared_safe_seed()) {
            state.seed_index = grid.nearest(*declared);
            margin = std::numeric_limits<double>::quiet_NaN();
        } else {
            const InstanceConstants k = instance_constants(cfg, *problem, grid);
            state.seed_index = k.slater_seed_index;
            margin = k.slater_seed_margin;
        }
        baselines::SafeBoPolicy policy(nf, state);
        trace = solver::run_policy(problem, policy, setup, seed, cfg.horizon);
        trace.meta.values["safe_seed_index"] = double(state.seed_index);
        if (!std::isnan(margin))
            trace.meta.values["safe_seed_margin"] = margin;
    } else {
        throw ConfigError("unknown algorithm '" + algorithm.name + "'");
    }
    trace.meta.algorithm = algorithm.label;
    trace.meta.replicate = replicate;
    trace.meta.config_hash = config_hash(cfg);
    return trace;
}

fs::path trace_path(const fs::path& dir, const std::string& label, long replicate)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "_r%03ld.csv", replicate);
    return dir / "traces" / (label + buf);
}

bool SuiteResult::all_ok() const
{
    for (const auto& c : cells)
        if (!c.ok)
            return false;
    return true;
}

int worker_count_from_env()
{
    if (const char* env = std::getenv("PDCBO_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            return int(v);
    }
    return int(std::max(1u, std::thread::hardware_concurrency()));
}

SuiteResult run_suite(const ExperimentConfig& cfg, int workers, std::ostream* log)
{
    const fs::path dir = cfg.output_dir;
    write_config(dir, cfg);
    // Validates grid/context resolutions before any worker starts.
    make_grid(cfg);
    make_context_lattice(cfg);

    const auto cells = cells_of(cfg);
    SuiteResult result;
    result.cells.resize(cells.size());
    std::vector<ExperimentTrace> traces(cells.size());
    std::mutex log_mutex;

    parallel_for(cells.size(), workers, [&](std::size_t i) {
        CellResult& out = result.cells[i];
        out.label = cells[i].algorithm->label;
        out.replicate = cells[i].replicate;
        out.path = trace_path(dir, out.label, out.replicate);
        try {
            traces[i] = run_cell(cfg, *cells[i].algorithm, cells[i].replicate);
            save_trace(out.path, traces[i]);
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        if (log) {
            std::lock_guard lock(log_mutex);
            *log << (out.ok ? "ok     " : "FAILED ") << out.label << " r" << out.replicate;
            if (out.ok)
                *log << "  R_T=" << short_fmt(traces[i].rows.back().regret_cum)
                     << "  wall=" << short_fmt(traces[i].meta.wall_time_s) << "s";
            else
                *log << "  " << out.error;
            *log << '\n';
        }
    });

    Aggregate agg;
    agg.name = cfg.name;
    agg.family = cfg.problem.family;
    agg.n_constraints = cfg.problem.n_constraints;
    agg.band_multiplier = cfg.band_multiplier;
    for (const auto& a : cfg.algorithms) {
        std::vector<ExperimentTrace> ok;
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (result.cells[i].ok && cells[i].algorithm == &a)
                ok.push_back(std::move(traces[i]));
        if (!ok.empty())
            agg.series.push_back(aggregate_traces(a.label, ok));
    }
    result.aggregate_path = dir / "aggregate.csv";
    write_aggregate(result.aggregate_path, agg);
    return result;
}

AggregateSeries aggregate_traces(const std::string& label, const std::vector<ExperimentTrace>& traces)
{
    if (traces.empty())
        throw std::invalid_argument("aggregate_traces: no traces");
    const long T = traces.front().steps();
    const Index nc = traces.front().meta.n_constraints;
    for (const auto& tr : traces)
        if (tr.steps() != T || tr.meta.n_constraints != nc)
            throw std::invalid_argument("aggregate_traces: traces of '" + label + "' differ in length or constraints");

    AggregateSeries s;
    s.label = label;
    s.replicates = long(traces.size());
    std::vector<double> cost(traces.size(), 0.0);
    std::vector<double> xs(traces.size());
    for (long k = 0; k < T; ++k) {
        const auto step = std::size_t(k);
        s.t.push_back(traces.front().rows[step].t);
        double m, sd;
        for (std::size_t r = 0; r < traces.size(); ++r)
            xs[r] = traces[r].rows[step].regret_cum;
        mean_std(xs, m, sd);
        s.regret_mean.push_back(m);
        s.regret_std.push_back(sd);
        for (std::size_t r = 0; r < traces.size(); ++r)
            xs[r] = cost[r] += traces[r].rows[step].f_true;
        mean_std(xs, m, sd);
        s.cost_mean.push_back(m);
        s.cost_std.push_back(sd);

        Vector gm(nc), gs(nc), am(nc), as(nc);
        for (Index i = 0; i < nc; ++i) {
            for (std::size_t r = 0; r < traces.size(); ++r)
                xs[r] = traces[r].rows[step].g_cum(i);
            mean_std(xs, gm(i), gs(i));
            for (std::size_t r = 0; r < traces.size(); ++r)
                xs[r] = traces[r].rows[step].g_cum(i) / double(k + 1);
            mean_std(xs, am(i), as(i));
        }
        s.gsum_mean.push_back(gm);
        s.gsum_std.push_back(gs);
        s.gavg_mean.push_back(am);
        s.gavg_std.push_back(as);
    }
    return s;
}

std::vector<std::string> aggregate_columns(Index n_constraints)
{
    std::vector<std::string> c{"label", "t", "replicates", "regret_mean", "regret_std", "cost_mean", "cost_std"};
    for (const char* stem : {"gsum_mean_", "gsum_std_", "gavg_mean_", "gavg_std_"})
        for (Index i = 1; i <= n_constraints; ++i)
            c.push_back(stem + std::to_string(i));
    return c;
}

void write_aggregate(const fs::path& path, const Aggregate& agg)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    const auto cols = aggregate_columns(agg.n_constraints);
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& s : agg.series) {
        for (std::size_t k = 0; k < s.t.size(); ++k) {
            out << s.label << ',' << s.t[k] << ',' << s.replicates << ',' << fmt(s.regret_mean[k]) << ','
                << fmt(s.regret_std[k]) << ',' << fmt(s.cost_mean[k]) << ',' << fmt(s.cost_std[k]);
            for (const auto* v : {&s.gsum_mean[k], &s.gsum_std[k], &s.gavg_mean[k], &s.gavg_std[k]})
                for (Index i = 0; i < v->size(); ++i)
                    out << ',' << fmt((*v)(i));
            out << '\n';
        }
    }
    std::ofstream meta(sidecar_path(path), std::ios::binary);
    meta << json{{"name", agg.name},
                 {"family", agg.family},
                 {"n_constraints", agg.n_constraints},
                 {"band_multiplier", agg.band_multiplier}}
                .dump(2)
         << '\n';
}

Aggregate read_aggregate(const fs::path& path)
{
    Aggregate agg;
    {
        std::ifstream meta(sidecar_path(path));
        if (!meta)
            throw std::runtime_error("missing aggregate sidecar " + sidecar_path(path).string());
        try {
            json j;
            meta >> j;
            agg.name = j.at("name").get<std::string>();
            agg.family = j.at("family").get<std::string>();
            agg.n_constraints = j.at("n_constraints").get<Index>();
            agg.band_multiplier = j.at("band_multiplier").get<double>();
        } catch (const json::exception& e) {
            throw std::runtime_error(sidecar_path(path).string() + ": " + e.what());
        }
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path.string() + ": empty aggregate");
    const auto cols = aggregate_columns(agg.n_constraints);
    std::string expected;
    for (std::size_t i = 0; i < cols.size(); ++i)
        expected += (i ? "," : "") + cols[i];
    if (line != expected)
        throw std::runtime_error(path.string() + ": aggregate header does not match");

    const Index nc = agg.n_constraints;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');)
            cells.push_back(c);
        if (cells.size() != cols.size())
            throw std::runtime_error(path.string() + ": wrong column count on line " + std::to_string(line_no));
        if (agg.series.empty() || agg.series.back().label != cells[0]) {
            agg.series.emplace_back();
            agg.series.back().label = cells[0];
        }
        auto& s = agg.series.back();
        std::size_t pos = 1;
        auto real = [&] {
            const std::string& c = cells[pos++];
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (c.empty() || end != c.c_str() + c.size())
                throw std::runtime_error(path.string() + ": bad number '" + c + "' on line " + std::to_string(line_no));
            return v;
        };
        s.t.push_back(long(real()));
        s.replicates = long(real());
        s.regret_mean.push_back(real());
        s.regret_std.push_back(real());
        s.cost_mean.push_back(real());
        s.cost_std.push_back(real());
        for (auto* v : {&s.gsum_mean, &s.gsum_std, &s.gavg_mean, &s.gavg_std}) {
            Vector x(nc);
            for (Index i = 0; i < nc; ++i)
                x(i) = real();
            v->push_back(x);
        }
    }
    return agg;
}

std::vector<std::pair<std::string, std::vector<ExperimentTrace>>> load_suite_traces(const fs::path& dir,
                                                                                    const ExperimentConfig& cfg)
{
    std::vector<std::pair<std::string, std::vector<ExperimentTrace>>> out;
    for (const auto& a : cfg.algorithms) {
        std::vector<ExperimentTrace> traces;
        for (long r = 0; r < cfg.replicates; ++r) {
            const fs::path p = trace_path(dir, a.label, r);
            if (fs::exists(p))
                traces.push_back(load_trace(p));
        }
        out.emplace_back(a.label, std::move(traces));
    }
    return out;
}

ReplayResult replay_suite(const fs::path& dir, int workers)
{
    const ExperimentConfig cfg = load_config(dir / "config.json");
    const auto cells = cells_of(cfg);
    ReplayResult result;
    result.cells = long(cells.size());
    std::vector<std::vector<ReplayMismatch>> found(cells.size());
    parallel_for(cells.size(), workers, [&](std::size_t i) {
        const fs::path p = trace_path(dir, cells[i].algorithm->label, cells[i].replicate);
        try {
            if (!fs::exists(p)) {
                found[i].push_back({p, "trace missing"});
                return;
            }
            const ExperimentTrace fresh = run_cell(cfg, *cells[i].algorithm, cells[i].replicate);
            if (trace_csv_string(fresh) != read_file(p))
                found[i].push_back({p, "CSV bytes differ"});
            json stored;
            std::ifstream(sidecar_path(p)) >> stored;
            if (stable_metadata_text(fresh.meta) != stable_metadata_text(metadata_from_json(stored)))
                found[i].push_back({sidecar_path(p), "metadata differs"});
        } catch (const std::exception& e) {
            found[i].push_back({p, std::string("replay failed: ") + e.what()});
        }
    });
    for (auto& f : found)
        result.mismatches.insert(result.mismatches.end(), f.begin(), f.end());
    return result;
}

std::vector<ReportLine> report_suite(const fs::path& dir)
{
    const ExperimentConfig cfg = load_config(dir / "config.json");
    const auto groups = load_suite_traces(dir, cfg);
    std::vector<ReportLine> lines;

    Aggregate agg;
    agg.name = cfg.name;
    agg.family = cfg.problem.family;
    agg.n_constraints = cfg.problem.n_constraints;
    agg.band_multiplier = cfg.band_multiplier;
    for (const auto& [label, traces] : groups) {
        if (long(traces.size()) != cfg.replicates)
            lines.push_back({"traces " + label, false,
                             std::to_string(traces.size()) + " of " + std::to_string(cfg.replicates) + " present"});
        if (!traces.empty())
            agg.series.push_back(aggregate_traces(label, traces));
    }
    write_aggregate(dir / "aggregate.csv", agg);

    const Box jb = problem_joint_box(cfg);
    for (const auto& [label, traces] : groups) {
        bool dual_nonneg = true, prefix = true, sigma_ok = true, telescoping = true;
        std::string dual_detail;
        bool dual_ok = true, dual_applicable = false;
        double worst_sigma_ratio = 0.0;
        for (const auto& tr : traces) {
            const Index nc = tr.meta.n_constraints;
            double regret = 0.0;
            Vector g = Vector::Zero(nc);
            for (const auto& row : tr.rows) {
                dual_nonneg = dual_nonneg && (row.lambda.array() >= 0.0).all() && (row.lambda_next.array() >= 0.0).all();
                regret += row.regret;
                g += row.g_true;
                const double tol = 1e-9 * std::max(1.0, std::abs(regret));
                prefix = prefix && std::abs(regret - row.regret_cum) <= tol
                      && ((g - row.g_cum).cwiseAbs().array() <= 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff())).all();
            }

            std::vector<double> gammas;
            for (Index i = 0; i <= nc; ++i)
                gammas.push_back(solver::gamma_sequence(cfg.kernels[std::size_t(i)], cfg.noise_variance(i), jb, tr.steps())
                                     ->back());
            const auto l2 = metrics::check_sigma_sum_bound(tr, gammas);
            sigma_ok = sigma_ok && l2.holds();
            for (const auto& e : l2.functions)
                worst_sigma_ratio = std::max(worst_sigma_ratio, e.lhs / e.rhs_certified);

            const auto db = metrics::check_dual_bound(tr);
            if (!db.skipped) {
                dual_applicable = true;
                dual_ok = dual_ok && db.holds;
                if (!db.holds)
                    dual_detail = "r" + std::to_string(tr.meta.replicate) + ": max 1/2|lambda|^2 = "
                                + short_fmt(db.max_value) + " > C_V = " + short_fmt(db.bound);
            }

            if (!tr.meta.schedule_mode.empty()) {
                for (const auto& ep : tr.meta.epochs) {
                    const auto first = std::size_t(ep.start_step - 1);
                    const auto last = first + std::size_t(ep.length) - 1;
                    if (ep.length < 1 || last >= tr.rows.size())
                        continue;
                    Vector sum = tr.rows[first].lambda;
                    for (std::size_t k = first; k <= last; ++k)
                        sum += tr.rows[k].lcb_g + Vector::Constant(nc, ep.epsilon);
                    const Vector& end = tr.rows[last].lambda_next;
                    const double tol = 1e-9 * std::max(1.0, sum.cwiseAbs().maxCoeff());
                    telescoping = telescoping && ((end - sum).array() >= -tol).all();
                }
            }
        }
        lines.push_back({label + " lambda >= 0", dual_nonneg, ""});
        lines.push_back({label + " cumulative columns are prefix sums", prefix, ""});
        lines.push_back({label + " cumulative sigma bound", sigma_ok,
                         "worst lhs / certified rhs = " + short_fmt(worst_sigma_ratio)});
        if (dual_applicable)
            lines.push_back({label + " dual bound", dual_ok, dual_detail});
        if (!traces.empty() && !traces.front().meta.schedule_mode.empty())
            lines.push_back({label + " dual telescoping", telescoping, ""});
    }
    for (const auto& s : agg.series) {
        std::ostringstream d;
        d << "T=" << s.t.size() << " mean R_T=" << short_fmt(s.regret_mean.back())
          << " mean cost=" << short_fmt(s.cost_mean.back()) << " mean sum g=";
        for (Index i = 0; i < s.gsum_mean.back().size(); ++i)
            d << (i ? "/" : "") << short_fmt(s.gsum_mean.back()(i));
        lines.push_back({s.label + " summary", true, d.str()});
    }
    return lines;
}

} // namespace pdcbo::bench
