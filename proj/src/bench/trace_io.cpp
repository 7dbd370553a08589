#include <pdcbo/bench/trace_io.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pdcbo::bench {

using nlohmann::json;

namespace {
    void append_indexed(std::vector<std::string>& cols, const std::string& stem, Index n)
    {
        for (Index i = 1; i <= n; ++i)
            cols.push_back(stem + std::to_string(i));
    }

    void put(std::string& line, double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        line += ',';
        line += buf;
    }

    void put(std::string& line, const Vector& v)
    {
        for (Index i = 0; i < v.size(); ++i)
            put(line, v(i));
    }

    std::vector<std::string> split(const std::string& line)
    {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            out.push_back(cell);
        return out;
    }

    Index count_prefix(const std::vector<std::string>& header, const std::string& stem)
    {
        Index n = 0;
        while (std::find(header.begin(), header.end(), stem + std::to_string(n + 1)) != header.end())
            ++n;
        return n;
    }

    class Cursor {
    public:
        Cursor(const std::vector<std::string>& cells, std::size_t line) : _cells(cells), _line(line) {}

        double real()
        {
            if (_pos >= _cells.size())
                fail("too few columns");
            const std::string& s = _cells[_pos++];
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size())
                fail("bad number '" + s + "'");
            return v;
        }

        long integer()
        {
            if (_pos >= _cells.size())
                fail("too few columns");
            const std::string& s = _cells[_pos++];
            char* end = nullptr;
            const long v = std::strtol(s.c_str(), &end, 10);
            if (s.empty() || end != s.c_str() + s.size())
                fail("bad integer '" + s + "'");
            return v;
        }

        Vector vec(Index n)
        {
            Vector v(n);
            for (Index i = 0; i < n; ++i)
                v(i) = real();
            return v;
        }

        void finish() const
        {
            if (_pos != _cells.size())
                fail("too many columns");
        }

    private:
        [[noreturn]] void fail(const std::string& what) const
        {
            throw std::runtime_error("trace CSV line " + std::to_string(_line) + ": " + what);
        }

        const std::vector<std::string>& _cells;
        std::size_t _line;
        std::size_t _pos = 0;
    };

    json epoch_json(const EpochInfo& e)
    {
        return {{"start_step", e.start_step},
                {"length", e.length},
                {"horizon", e.horizon},
                {"eta", e.eta},
                {"epsilon", e.epsilon},
                {"lambda1", e.lambda1},
                {"dual_bound", e.dual_bound},
                {"horizon_too_short", e.horizon_too_short}};
    }

    EpochInfo epoch_from_json(const json& j)
    {
        EpochInfo e;
        e.start_step = j.at("start_step").get<long>();
        e.length = j.at("length").get<long>();
        e.horizon = j.at("horizon").get<long>();
        e.eta = j.at("eta").get<double>();
        e.epsilon = j.at("epsilon").get<double>();
        e.lambda1 = j.at("lambda1").get<double>();
        e.dual_bound = j.at("dual_bound").get<double>();
        e.horizon_too_short = j.at("horizon_too_short").get<bool>();
        return e;
    }
} // namespace

std::vector<std::string> trace_columns(Index n_theta, Index n_z, Index n_constraints)
{
    std::vector<std::string> c{"t", "grid_index"};
    append_indexed(c, "theta_", n_theta);
    append_indexed(c, "z_", n_z);
    c.push_back("y_f");
    append_indexed(c, "y_g", n_constraints);
    c.push_back("f_true");
    append_indexed(c, "g_true_", n_constraints);
    c.insert(c.end(), {"f_star", "regret", "regret_cum"});
    append_indexed(c, "g_cum_", n_constraints);
    append_indexed(c, "lambda_", n_constraints);
    append_indexed(c, "lambda_next_", n_constraints);
    c.push_back("lcb_f");
    append_indexed(c, "lcb_g_", n_constraints);
    c.push_back("sigma_f");
    append_indexed(c, "sigma_g_", n_constraints);
    c.push_back("primal_value");
    return c;
}

void write_trace_csv(std::ostream& out, const ExperimentTrace& trace)
{
    const auto& m = trace.meta;
    const auto cols = trace_columns(m.n_theta, m.n_z, m.n_constraints);
    std::string line;
    for (std::size_t i = 0; i < cols.size(); ++i)
        line += (i ? "," : "") + cols[i];
    out << line << '\n';
    for (const auto& r : trace.rows) {
        if (r.theta.size() != m.n_theta || r.z.size() != m.n_z || r.g_true.size() != m.n_constraints)
            throw std::invalid_argument("write_trace_csv: row dimensions disagree with the metadata");
        line = std::to_string(r.t) + ',' + std::to_string(r.grid_index);
        put(line, r.theta);
        put(line, r.z);
        put(line, r.y);
        put(line, r.f_true);
        put(line, r.g_true);
        put(line, r.f_star);
        put(line, r.regret);
        put(line, r.regret_cum);
        put(line, r.g_cum);
        put(line, r.lambda);
        put(line, r.lambda_next);
        put(line, r.lcb_f);
        put(line, r.lcb_g);
        put(line, r.sigma);
        put(line, r.primal_value);
        out << line << '\n';
    }
}

std::string trace_csv_string(const ExperimentTrace& trace)
{
    std::ostringstream out;
    write_trace_csv(out, trace);
    return out.str();
}

ExperimentTrace read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("trace CSV is empty");
    const auto header = split(line);
    ExperimentTrace trace;
    auto& m = trace.meta;
    m.n_theta = count_prefix(header, "theta_");
    m.n_z = count_prefix(header, "z_");
    m.n_constraints = count_prefix(header, "g_true_");
    if (header != trace_columns(m.n_theta, m.n_z, m.n_constraints))
        throw std::runtime_error("trace CSV header does not match the documented column order");

    const Index nc = m.n_constraints;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto cells = split(line);
        Cursor c(cells, line_no);
        TraceRow r;
        r.t = c.integer();
        r.grid_index = c.integer();
        r.theta = c.vec(m.n_theta);
        r.z = c.vec(m.n_z);
        r.y = c.vec(nc + 1);
        r.f_true = c.real();
        r.g_true = c.vec(nc);
        r.f_star = c.real();
        r.regret = c.real();
        r.regret_cum = c.real();
        r.g_cum = c.vec(nc);
        r.lambda = c.vec(nc);
        r.lambda_next = c.vec(nc);
        r.lcb_f = c.real();
        r.lcb_g = c.vec(nc);
        r.sigma = c.vec(nc + 1);
        r.primal_value = c.real();
        c.finish();
        trace.rows.push_back(std::move(r));
    }
    return trace;
}

json metadata_json(const TraceMetadata& m)
{
    json epochs = json::array();
    for (const auto& e : m.epochs)
        epochs.push_back(epoch_json(e));
    return {{"algorithm", m.algorithm},
            {"schedule_mode", m.schedule_mode},
            {"problem", m.problem},
            {"replicate", m.replicate},
            {"seed", m.seed},
            {"config_hash", m.config_hash},
            {"n_theta", m.n_theta},
            {"n_z", m.n_z},
            {"n_constraints", m.n_constraints},
            {"epochs", epochs},
            {"wall_time_s", m.wall_time_s},
            {"values", m.values}};
}

TraceMetadata metadata_from_json(const json& j)
{
    TraceMetadata m;
    try {
        m.algorithm = j.at("algorithm").get<std::string>();
        m.schedule_mode = j.at("schedule_mode").get<std::string>();
        m.problem = j.at("problem").get<std::string>();
        m.replicate = j.at("replicate").get<long>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.n_theta = j.at("n_theta").get<Index>();
        m.n_z = j.at("n_z").get<Index>();
        m.n_constraints = j.at("n_constraints").get<Index>();
        for (const auto& e : j.at("epochs"))
            m.epochs.push_back(epoch_from_json(e));
        m.wall_time_s = j.at("wall_time_s").get<double>();
        m.values = j.at("values").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("trace metadata: ") + e.what());
    }
    return m;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path)
{
    auto p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

void save_trace(const std::filesystem::path& csv_path, const ExperimentTrace& trace)
{
    if (csv_path.has_parent_path())
        std::filesystem::create_directories(csv_path.parent_path());
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + csv_path.string());
        write_trace_csv(out, trace);
    }
    std::ofstream meta(sidecar_path(csv_path), std::ios::binary);
    if (!meta)
        throw std::runtime_error("cannot write " + sidecar_path(csv_path).string());
    meta << metadata_json(trace.meta).dump(2) << '\n';
}

ExperimentTrace load_trace(const std::filesystem::path& csv_path)
{
    std::ifstream in(csv_path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + csv_path.string());
    ExperimentTrace trace = read_trace_csv(in);
    std::ifstream meta_in(sidecar_path(csv_path));
    if (!meta_in)
        throw std::runtime_error("missing metadata sidecar " + sidecar_path(csv_path).string());
    json j;
    try {
        meta_in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(sidecar_path(csv_path).string() + ": " + e.what());
    }
    const TraceMetadata header_dims = trace.meta;
    trace.meta = metadata_from_json(j);
    if (trace.meta.n_theta != header_dims.n_theta || trace.meta.n_z != header_dims.n_z
        || trace.meta.n_constraints != header_dims.n_constraints)
        throw std::runtime_error(csv_path.string() + ": CSV header dimensions disagree with the sidecar");
    return trace;
}

std::string stable_metadata_text(const TraceMetadata& meta)
{
    json j = metadata_json(meta);
    j.erase("wall_time_s");
    return j.dump();
}

} // namespace pdcbo::bench
