#pragma once

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "nhrod/diagnostics.hpp"
#include "nhrod/initial.hpp"

namespace nhrod::sim {

/// Bad configuration or command line; maps to exit status 1.
class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values or a failed step during a run; maps to exit status 2.
class numerical_abort : public std::runtime_error {
public:
    numerical_abort(long step, std::string field, const std::string& what)
        : std::runtime_error(what), step_(step), field_(std::move(field))
    {
    }
    long step() const { return step_; }
    const std::string& field() const { return field_; }

private:
    long step_;
    std::string field_;
};

enum class Preset { Paper, StraightRest, ThetaWave, Custom };

inline std::optional<Preset> parse_preset(std::string_view name)
{
    if (name == "paper") return Preset::Paper;
    if (name == "straight_rest") return Preset::StraightRest;
    if (name == "theta_wave") return Preset::ThetaWave;
    if (name == "custom") return Preset::Custom;
    return std::nullopt;
}

struct RunConfig {
    RodParameters params;
    std::size_t n_nodes = 32;
    BoundaryCondition bc = BoundaryCondition::Free;
    std::optional<double> dt;  ///< explicit step; otherwise dt_factor * k^2
    double dt_factor = 0.125;
    double t_end = 0.0;
    Preset preset = Preset::Paper;
    std::string initial_file;
    bool constrained = true;
    std::string diag_path;
    std::string snap_path;
    long snap_every = 1;

    Grid grid() const { return Grid(n_nodes, params.length, bc); }

    double time_step() const
    {
        if (dt) return *dt;
        const double k = grid().spacing();
        return dt_factor * k * k;
    }

    /// ceil(t_end / h), with a relative slack so exact multiples are not rounded up.
    long step_count() const
    {
        const double ratio = t_end / time_step();
        return long(std::ceil(ratio * (1 - 1e-12)));
    }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& value, const std::string& key, int line)
{
    double out = 0.0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
        std::ostringstream msg;
        msg << "line " << line << ": field '" << key << "' expects a number, got '" << value << "'";
        throw usage_error(msg.str());
    }
    return out;
}

inline long parse_long(const std::string& value, const std::string& key, int line)
{
    long out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        std::ostringstream msg;
        msg << "line " << line << ": field '" << key << "' expects an integer, got '" << value << "'";
        throw usage_error(msg.str());
    }
    return out;
}

[[noreturn]] inline void bad_value(const std::string& key, const std::string& value, int line, const char* expected)
{
    std::ostringstream msg;
    msg << "line " << line << ": field '" << key << "' expects " << expected << ", got '" << value << "'";
    throw usage_error(msg.str());
}

} // namespace detail

/**
 * Parses the flat `key = value` configuration format. Blank lines and lines
 * starting with '#' are ignored. Unknown or repeated keys are errors.
 */
inline RunConfig parse_config(std::istream& in)
{
    RunConfig cfg;
    std::map<std::string, int> seen;
    std::string raw;
    int line = 0;
    bool have_t_end = false;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = detail::trim(raw);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw usage_error("line " + std::to_string(line) + ": expected 'key = value', got '" + text + "'");
        const auto key = detail::trim(std::string_view(text).substr(0, eq));
        const auto value = detail::trim(std::string_view(text).substr(eq + 1));
        if (value.empty()) throw usage_error("line " + std::to_string(line) + ": field '" + key + "' has no value");
        if (auto [it, fresh] = seen.emplace(key, line); !fresh)
            throw usage_error("line " + std::to_string(line) + ": field '" + key + "' repeated (first on line " +
                              std::to_string(it->second) + ")");

        auto num = [&] { return detail::parse_double(value, key, line); };
        if (key == "rho") cfg.params.rho = num();
        else if (key == "alpha") cfg.params.alpha = num();
        else if (key == "beta") cfg.params.beta = num();
        else if (key == "bend_k") cfg.params.bend_k = num();
        else if (key == "radius") cfg.params.radius = num();
        else if (key == "length") cfg.params.length = num();
        else if (key == "n_nodes") {
            const long n = detail::parse_long(value, key, line);
            if (n < long(Grid::min_nodes)) detail::bad_value(key, value, line, "an integer >= 5");
            cfg.n_nodes = std::size_t(n);
        } else if (key == "bc") {
            if (value == "free") cfg.bc = BoundaryCondition::Free;
            else if (value == "periodic") cfg.bc = BoundaryCondition::Periodic;
            else detail::bad_value(key, value, line, "free or periodic");
        } else if (key == "dt") {
            cfg.dt = num();
            if (*cfg.dt <= 0) detail::bad_value(key, value, line, "a positive number");
        } else if (key == "dt_factor") {
            cfg.dt_factor = num();
            if (cfg.dt_factor <= 0) detail::bad_value(key, value, line, "a positive number");
        } else if (key == "t_end") {
            cfg.t_end = num();
            if (cfg.t_end <= 0) detail::bad_value(key, value, line, "a positive number");
            have_t_end = true;
        } else if (key == "preset") {
            auto p = parse_preset(value);
            if (!p) detail::bad_value(key, value, line, "paper, straight_rest, theta_wave or custom");
            cfg.preset = *p;
        } else if (key == "initial_file") cfg.initial_file = value;
        else if (key == "constrained") {
            if (value == "true") cfg.constrained = true;
            else if (value == "false") cfg.constrained = false;
            else detail::bad_value(key, value, line, "true or false");
        } else if (key == "diag_path") cfg.diag_path = value;
        else if (key == "snap_path") cfg.snap_path = value;
        else if (key == "snap_every") {
            cfg.snap_every = detail::parse_long(value, key, line);
            if (cfg.snap_every < 1) detail::bad_value(key, value, line, "an integer >= 1");
        } else {
            throw usage_error("line " + std::to_string(line) + ": unknown field '" + key + "'");
        }
    }

    if (seen.count("dt") && seen.count("dt_factor"))
        throw usage_error("line " + std::to_string(seen["dt_factor"]) + ": give either 'dt' or 'dt_factor', not both");
    if (!have_t_end) throw usage_error("missing required field 't_end'");
    if (cfg.preset == Preset::Custom && cfg.initial_file.empty())
        throw usage_error("preset 'custom' requires 'initial_file'");
    if (cfg.preset != Preset::Custom && cfg.bc == BoundaryCondition::Periodic)
        throw usage_error("line " + std::to_string(seen["bc"]) +
                          ": built-in presets describe an open rod and need bc = free");
    try {
        cfg.params.validate();
    } catch (const contract_violation& e) {
        throw usage_error(e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw usage_error("cannot read config file '" + path + "'");
    return parse_config(in);
}

/**
 * Node-value file for the custom preset: comma-separated with header
 * `x,y,theta,vx,vy,vtheta` and one row per node.
 */
inline InitialData read_initial_file(std::istream& in, std::size_t n_nodes)
{
    std::string raw;
    if (!std::getline(in, raw) || detail::trim(raw) != "x,y,theta,vx,vy,vtheta")
        throw usage_error("initial file: line 1 must be the header 'x,y,theta,vx,vy,vtheta'");
    InitialData data(n_nodes);
    std::size_t row = 0;
    int line = 1;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = detail::trim(raw);
        if (text.empty()) continue;
        if (row >= n_nodes) throw usage_error("initial file: more than n_nodes rows");
        std::array<double, 6> vals{};
        std::stringstream ss(text);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= 6) throw usage_error("initial file line " + std::to_string(line) + ": expected 6 columns");
            vals[c] = detail::parse_double(detail::trim(cell), "column " + std::to_string(c + 1), line);
            ++c;
        }
        if (c != 6) throw usage_error("initial file line " + std::to_string(line) + ": expected 6 columns");
        data.x0[row] = vals[0];
        data.y0[row] = vals[1];
        data.theta0[row] = vals[2];
        data.vx0[row] = vals[3];
        data.vy0[row] = vals[4];
        data.vtheta0[row] = vals[5];
        ++row;
    }
    if (row != n_nodes)
        throw usage_error("initial file: expected " + std::to_string(n_nodes) + " rows, got " + std::to_string(row));
    return data;
}

/// theta(s, t) = cos(pi s / l) cos(omega t), omega = (pi / l) sqrt(beta / alpha).
inline double theta_wave_exact(double s, double t, const RodParameters& p)
{
    const double kw = std::numbers::pi / p.length;
    return std::cos(kw * s) * std::cos(kw * std::sqrt(p.beta / p.alpha) * t);
}

/// True when the preset has a closed-form solution under this configuration.
inline bool has_analytic_solution(const RunConfig& cfg)
{
    return cfg.preset == Preset::ThetaWave && (!cfg.constrained || cfg.params.radius == 0.0);
}

inline InitialData preset_initial_data(const RunConfig& cfg)
{
    const auto grid = cfg.grid();
    const std::size_t n = grid.size();
    if (cfg.preset == Preset::Custom) {
        std::ifstream in(cfg.initial_file);
        if (!in) throw usage_error("cannot read initial file '" + cfg.initial_file + "'");
        return read_initial_file(in, n);
    }
    InitialData d(n);
    const double ell = cfg.params.length;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = grid.position(i);
        d.x0[i] = s;
        switch (cfg.preset) {
        case Preset::Paper: d.theta0[i] = -std::numbers::pi / 2 * std::cos(std::numbers::pi * s / ell); break;
        case Preset::ThetaWave: d.theta0[i] = theta_wave_exact(s, 0.0, cfg.params); break;
        default: break;
        }
    }
    return d;
}

/// Writes diagnostics rows with 17 significant digits.
class DiagnosticsWriter {
public:
    explicit DiagnosticsWriter(std::ostream& out) : out_(out)
    {
        out_ << "step,t,energy,px,py,ptheta,jz,c1_max,c2_max,stretch_min,stretch_max\n";
        out_ << std::setprecision(17);
    }

    void write(const DiagnosticsRecord& r)
    {
        out_ << r.step << ',' << r.t << ',' << r.energy << ',' << r.px << ',' << r.py << ',' << r.ptheta << ','
             << r.jz << ',' << r.c1_max << ',' << r.c2_max << ',' << r.stretch_min << ',' << r.stretch_max << '\n';
    }

private:
    std::ostream& out_;
};

/// Snapshot blocks: `step,t` header and values, then `i,s,x,y,theta` and one row per node.
class SnapshotWriter {
public:
    explicit SnapshotWriter(std::ostream& out) : out_(out) { out_ << std::setprecision(17); }

    void write(long step, double t, const FieldLevel& level, const Grid& grid)
    {
        if (blocks_++ > 0) out_ << '\n';
        out_ << "step,t\n" << step << ',' << t << "\ni,s,x,y,theta\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            out_ << i << ',' << grid.position(i) << ',' << level.x[i] << ',' << level.y[i] << ',' << level.theta[i]
                 << '\n';
    }

private:
    std::ostream& out_;
    long blocks_ = 0;
};

/// Called once per diagnostics row with the pair (step, step + 1).
using RunObserver = std::function<void(const DiagnosticsRecord&, const StatePair&)>;

struct RunResult {
    long steps = 0;
    StatePair final_state;
    DiagnosticsRecord last;
};

namespace detail {
inline std::string first_nonfinite_field(const FieldLevel& level)
{
    if (!nhrod::detail::all_finite(level.x)) return "x";
    if (!nhrod::detail::all_finite(level.y)) return "y";
    if (!nhrod::detail::all_finite(level.theta)) return "theta";
    return {};
}

[[noreturn]] inline void abort_run(long step, const std::string& field, const std::string& why)
{
    std::ostringstream msg;
    msg << "numerical abort at step " << step;
    if (!field.empty()) msg << ": field '" << field << "' is not finite";
    if (!why.empty()) msg << (field.empty() ? ": " : " (") << why << (field.empty() ? "" : ")");
    throw numerical_abort(step, field, msg.str());
}
} // namespace detail

/**
 * Bootstraps the configured initial data and takes step_count() steps of the
 * selected stepper. Rows are reported for steps 0 .. step_count(); row j
 * describes the pair of levels (j, j+1).
 */
inline RunResult run(const RunConfig& cfg, const InitialData& data, const RunObserver& observer = {},
                     std::ostream* warnings = nullptr)
{
    const auto grid = cfg.grid();
    const auto& p = cfg.params;
    const double h = cfg.time_step();

    if (warnings && h > stability_limit(p, grid))
        *warnings << "warning: dt = " << h << " exceeds the explicit beam stability limit "
                  << stability_limit(p, grid) << "\n";

    StatePair state = build_initial_pair(data, p, grid, h, cfg.constrained);
    if (auto f = detail::first_nonfinite_field(state.curr); !f.empty()) detail::abort_run(0, f, {});

    DiagnosticsRecord rec = make_record(0, state, {}, p, grid);
    if (observer) observer(rec, state);

    const long steps = cfg.step_count();
    for (long j = 1; j <= steps; ++j) {
        FieldLevel next;
        ConstraintResiduals res;
        try {
            if (cfg.constrained) {
                auto out = constrained_step(state, p, grid);
                res = discrete_constraint_residuals(state.prev, state.curr, out.next, p, grid);
                next = std::move(out.next);
            } else {
                next = free_step(state, p, grid);
                res = discrete_constraint_residuals(state.prev, state.curr, next, p, grid);
            }
        } catch (const std::exception& e) {
            const auto predictor = free_predictor(state, p, grid);
            detail::abort_run(j, detail::first_nonfinite_field(predictor), e.what());
        }
        if (auto f = detail::first_nonfinite_field(next); !f.empty()) detail::abort_run(j, f, {});

        state = advance(state, std::move(next));
        rec = make_record(j, state, res, p, grid);
        if (observer) observer(rec, state);
    }
    return RunResult{steps, std::move(state), rec};
}

inline RunResult run(const RunConfig& cfg, const RunObserver& observer = {}, std::ostream* warnings = nullptr)
{
    return run(cfg, preset_initial_data(cfg), observer, warnings);
}

/// Runs a configuration and writes the diagnostics / snapshot files it names.
inline RunResult run_to_files(const RunConfig& cfg, std::ostream* warnings = nullptr)
{
    std::ofstream diag_file, snap_file;
    if (!cfg.diag_path.empty()) {
        diag_file.open(cfg.diag_path);
        if (!diag_file) throw usage_error("cannot write diagnostics file '" + cfg.diag_path + "'");
    }
    if (!cfg.snap_path.empty()) {
        snap_file.open(cfg.snap_path);
        if (!snap_file) throw usage_error("cannot write snapshot file '" + cfg.snap_path + "'");
    }
    std::optional<DiagnosticsWriter> diag;
    std::optional<SnapshotWriter> snap;
    if (diag_file.is_open()) diag.emplace(diag_file);
    if (snap_file.is_open()) snap.emplace(snap_file);

    const auto grid = cfg.grid();
    auto observer = [&](const DiagnosticsRecord& r, const StatePair& s) {
        if (diag) diag->write(r);
        if (snap && r.step % cfg.snap_every == 0) snap->write(r.step, r.t, s.prev, grid);
    };
    return run(cfg, observer, warnings);
}

struct ConvergenceRow {
    std::size_t n_nodes = 0;
    double h = 0.0;
    double error = 0.0;
    std::optional<double> order; ///< empty for the coarsest level
};

/**
 * Refinement study against the closed-form theta_wave solution. Each level
 * keeps h proportional to k^2 (the configured dt_factor, or the ratio implied
 * by an explicit dt on the configured mesh) and reports the max-norm theta
 * error at the last level on or after t_end.
 */
inline std::vector<ConvergenceRow> convergence(const RunConfig& cfg, const std::vector<std::size_t>& levels)
{
    if (!has_analytic_solution(cfg))
        throw usage_error("converge: needs preset 'theta_wave' with radius = 0 or constrained = false");
    if (levels.empty()) throw usage_error("converge: no refinement levels given");

    double factor = cfg.dt_factor;
    if (cfg.dt) {
        const double k = cfg.grid().spacing();
        factor = *cfg.dt / (k * k);
    }

    std::vector<ConvergenceRow> rows;
    for (std::size_t n : levels) {
        if (n < Grid::min_nodes) throw usage_error("converge: every level needs at least 5 nodes");
        RunConfig level = cfg;
        level.n_nodes = n;
        level.dt.reset();
        level.dt_factor = factor;
        level.diag_path.clear();
        level.snap_path.clear();

        const auto grid = level.grid();
        const auto result = run(level);
        const auto& final_level = result.final_state.prev;
        const double t = double(result.steps) * level.time_step();
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            err = std::max(err, std::abs(final_level.theta[i] - theta_wave_exact(grid.position(i), t, level.params)));

        ConvergenceRow row{n, level.time_step(), err, std::nullopt};
        if (!rows.empty()) {
            const auto& prev = rows.back();
            const double k_prev = level.params.length / double(prev.n_nodes - 1);
            row.order = std::log(prev.error / err) / std::log(k_prev / grid.spacing());
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_convergence_table(std::ostream& out, const std::vector<ConvergenceRow>& rows)
{
    out << "n_nodes,h,error,order\n" << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.n_nodes << ',' << r.h << ',' << r.error << ',';
        if (r.order) out << *r.order;
        out << '\n';
    }
}

} // namespace nhrod::sim
