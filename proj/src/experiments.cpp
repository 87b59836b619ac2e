#include "hhsim/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hhsim/emitters.hpp"
#include "hhsim/errors.hpp"
#include "hhsim/hh_dynamics.hpp"
#include "hhsim/parallel.hpp"
#include "hhsim/reference_model.hpp"
#include "hhsim/spike_statistics.hpp"

namespace hhsim {

namespace {

constexpr const char* kKindNames[] = {"DeterministicScan", "SingleNeuron", "QuietSweep", "RegularSweep",
                                      "Calibrate", "CircuitRun", "ReferenceRun"};
constexpr const char* kSubcommands[] = {"det-scan", "neuron", "quiet-sweep", "regular-sweep",
                                        "calibrate", "circuit", "reference"};

// ---- JSON reading with full problem collection ----------------------------

class Reader {
public:
    Reader(const Json& j, std::string ctx, std::vector<std::string>& problems)
        : j_(j), ctx_(std::move(ctx)), problems_(problems) {
        if (!j_.is_object()) problems_.push_back(ctx_ + ": expected an object");
    }

    void read(const char* key, double& out) {
        if (const Json* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else mismatch(key, "a number");
        }
    }
    void read(const char* key, int& out) {
        if (const Json* v = find(key)) {
            if (v->is_number_integer()) out = v->get<int>();
            else mismatch(key, "an integer");
        }
    }
    void read(const char* key, std::uint64_t& out) {
        if (const Json* v = find(key)) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0))
                out = v->get<std::uint64_t>();
            else mismatch(key, "a non-negative integer");
        }
    }
    void read(const char* key, std::string& out) {
        if (const Json* v = find(key)) {
            if (v->is_string()) out = v->get<std::string>();
            else mismatch(key, "a string");
        }
    }
    void read(const char* key, std::vector<double>& out) {
        if (const Json* v = find(key)) {
            bool ok = v->is_array();
            if (ok)
                for (const auto& e : *v) ok = ok && e.is_number();
            if (ok) out = v->get<std::vector<double>>();
            else mismatch(key, "an array of numbers");
        }
    }
    template <class Enum, std::size_t N>
    void read_enum(const char* key, Enum& out, const std::pair<const char*, Enum> (&names)[N]) {
        if (const Json* v = find(key)) {
            if (v->is_string())
                for (const auto& [name, value] : names)
                    if (*v == name) {
                        out = value;
                        return;
                    }
            std::string allowed;
            for (const auto& [name, value] : names) allowed += std::string(allowed.empty() ? "" : ", ") + name;
            mismatch(key, "one of " + allowed);
        }
    }
    const Json* child(const char* key) { return find(key); }
    std::string path(const char* key) const { return ctx_ + "." + key; }

    void finish() {
        if (!j_.is_object()) return;
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) problems_.push_back(ctx_ + "." + key + ": unknown key");
    }

private:
    const Json* find(const char* key) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return nullptr;
        return &j_.at(key);
    }
    void mismatch(const char* key, const std::string& what) { problems_.push_back(path(key) + ": expected " + what); }

    const Json& j_;
    std::string ctx_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

const std::pair<const char*, OuScheme> kOuNames[] = {{"euler-maruyama", OuScheme::EulerMaruyama},
                                                     {"exact", OuScheme::Exact}};
const std::pair<const char*, InitScenario> kInitNames[] = {{"zero", InitScenario::ZeroOutputs},
                                                           {"uniform", InitScenario::UniformOutputs}};

std::string ou_name(OuScheme s) { return s == OuScheme::Exact ? "exact" : "euler-maruyama"; }
std::string init_name(InitScenario s) { return s == InitScenario::UniformOutputs ? "uniform" : "zero"; }

void read_params(Reader& r, DetScanParams& p) {
    r.read("a_grid", p.a_grid);
    r.read("trials", p.trials);
    r.read("dt", p.dt);
    r.read("burn_in", p.burn_in);
    r.read("tail", p.tail);
    r.read("spike_threshold", p.spike_threshold);
    r.read("equilibrium_tolerance", p.equilibrium_tolerance);
}

void read_params(Reader& r, NeuronParams& p) {
    r.read("theta", p.theta);
    r.read("tau", p.tau);
    r.read("sigma", p.sigma);
    r.read("t_end", p.t_end);
    r.read("burn_in", p.burn_in);
    r.read("dt", p.dt);
    r.read("delta0", p.delta0);
    r.read("c1", p.c1);
    r.read_enum("ou", p.ou, kOuNames);
    r.read("runs", p.runs);
    r.read("record_every", p.record_every);
}

void read_quiet_test(Reader& r, QuietConfig& q) {
    r.read("t0", q.t0);
    r.read("k", q.k);
    r.read("lambda_c", q.lambda_c);
    r.read("alpha_c", q.alpha_c);
    r.read("i_end", q.i_end);
    r.read("c_df", q.c_df);
    r.read("c_lt", q.c_lt);
    r.read("count_level", q.count_level);
    r.read("rare_count", q.rare_count);
    r.read("rare_rate", q.rare_rate);
}

void read_params(Reader& r, QuietSweepParams& p, std::vector<std::string>& problems) {
    r.read("theta", p.theta);
    r.read("sigma", p.sigma);
    r.read("taus", p.taus);
    r.read("runs", p.runs);
    r.read("burn_in", p.burn_in);
    r.read("dt", p.dt);
    r.read("delta0", p.delta0);
    if (const Json* t = r.child("test")) {
        Reader sub(*t, r.path("test"), problems);
        read_quiet_test(sub, p.test);
        sub.finish();
    }
}

void read_params(Reader& r, RegularSweepParams& p) {
    r.read("theta", p.theta);
    r.read("sigmas", p.sigmas);
    r.read("taus", p.taus);
    r.read("runs", p.runs);
    r.read("burn_in", p.burn_in);
    r.read("t1", p.t1);
    r.read("c1", p.c1);
    r.read("dt", p.dt);
    r.read("delta0", p.delta0);
}

void read_params(Reader& r, CalibrateParams& p) {
    auto& c = p.calibration;
    r.read("lambda_c", c.lambda_c);
    r.read("t0", c.t0);
    r.read("k", c.k);
    r.read("i_end", c.i_end);
    r.read("alpha_c", c.alpha_c);
    r.read("replications", c.replications);
    r.read("calibration_seed", c.seed);
    r.read("cache", p.cache);
}

void read_params(Reader& r, CircuitParams& p, std::vector<std::string>& problems) {
    r.read("blocks", p.blocks);
    r.read("block_size", p.block_size);
    r.read("tau", p.tau);
    r.read("sigma", p.sigma);
    r.read("c1", p.c1);
    r.read("theta1", p.theta1);
    r.read("theta2", p.theta2);
    r.read("delta_star", p.delta_star);
    r.read("dt", p.dt);
    r.read("delta0", p.delta0);
    r.read_enum("init", p.init, kInitNames);
    r.read("t_end", p.t_end);
    r.read("runs", p.runs);
    r.read("window", p.window);
    r.read("record_every", p.record_every);
    if (const Json* t = r.child("rotation")) {
        Reader sub(*t, r.path("rotation"), problems);
        sub.read("burn_in", p.rotation.burn_in);
        sub.read("min_transitions", p.rotation.min_transitions);
        sub.read("min_cyclic_fraction", p.rotation.min_cyclic_fraction);
        sub.finish();
    }
}

void read_params(Reader& r, ReferenceParams& p) {
    r.read("blocks", p.blocks);
    r.read("block_size", p.block_size);
    r.read("c", p.c);
    r.read("dt", p.dt);
    r.read("t_end", p.t_end);
    r.read("runs", p.runs);
    r.read("record_every", p.record_every);
    r.read("min_peak", p.min_peak);
}

// ---- JSON writing ----------------------------------------------------------

Json params_json(const DetScanParams& p) {
    return {{"a_grid", p.a_grid},   {"trials", p.trials}, {"dt", p.dt},
            {"burn_in", p.burn_in}, {"tail", p.tail},     {"spike_threshold", p.spike_threshold},
            {"equilibrium_tolerance", p.equilibrium_tolerance}};
}

Json params_json(const NeuronParams& p) {
    return {{"theta", p.theta}, {"tau", p.tau},       {"sigma", p.sigma},     {"t_end", p.t_end},
            {"burn_in", p.burn_in}, {"dt", p.dt},     {"delta0", p.delta0},   {"c1", p.c1},
            {"ou", ou_name(p.ou)}, {"runs", p.runs}, {"record_every", p.record_every}};
}

Json params_json(const QuietSweepParams& p) {
    const auto& q = p.test;
    return {{"theta", p.theta}, {"sigma", p.sigma}, {"taus", p.taus},   {"runs", p.runs},
            {"burn_in", p.burn_in}, {"dt", p.dt},   {"delta0", p.delta0},
            {"test",
             {{"t0", q.t0}, {"k", q.k}, {"lambda_c", q.lambda_c}, {"alpha_c", q.alpha_c}, {"i_end", q.i_end},
              {"c_df", q.c_df}, {"c_lt", q.c_lt}, {"count_level", q.count_level}, {"rare_count", q.rare_count},
              {"rare_rate", q.rare_rate}}}};
}

Json params_json(const RegularSweepParams& p) {
    return {{"theta", p.theta}, {"sigmas", p.sigmas}, {"taus", p.taus}, {"runs", p.runs}, {"burn_in", p.burn_in},
            {"t1", p.t1},       {"c1", p.c1},         {"dt", p.dt},     {"delta0", p.delta0}};
}

Json params_json(const CalibrateParams& p) {
    const auto& c = p.calibration;
    return {{"lambda_c", c.lambda_c}, {"t0", c.t0}, {"k", c.k}, {"i_end", c.i_end}, {"alpha_c", c.alpha_c},
            {"replications", c.replications}, {"calibration_seed", c.seed}, {"cache", p.cache}};
}

Json params_json(const CircuitParams& p) {
    return {{"blocks", p.blocks}, {"block_size", p.block_size}, {"tau", p.tau}, {"sigma", p.sigma},
            {"c1", p.c1}, {"theta1", p.theta1}, {"theta2", p.theta2}, {"delta_star", p.delta_star},
            {"dt", p.dt}, {"delta0", p.delta0}, {"init", init_name(p.init)}, {"t_end", p.t_end},
            {"runs", p.runs}, {"window", p.window}, {"record_every", p.record_every},
            {"rotation",
             {{"burn_in", p.rotation.burn_in}, {"min_transitions", p.rotation.min_transitions},
              {"min_cyclic_fraction", p.rotation.min_cyclic_fraction}}}};
}

Json params_json(const ReferenceParams& p) {
    return {{"blocks", p.blocks}, {"block_size", p.block_size}, {"c", p.c}, {"dt", p.dt},
            {"t_end", p.t_end}, {"runs", p.runs}, {"record_every", p.record_every}, {"min_peak", p.min_peak}};
}

// ---- validation ------------------------------------------------------------

class Checker {
public:
    explicit Checker(std::vector<std::string>& problems) : problems_(problems) {}
    void require(bool ok, const std::string& what) {
        if (!ok) problems_.push_back(what);
    }
    void positive(double x, const std::string& name) { require(x > 0.0 && std::isfinite(x), name + " must be positive"); }
    void non_negative(double x, const std::string& name) {
        require(x >= 0.0 && std::isfinite(x), name + " must be non-negative");
    }
    void step(double dt, const std::string& name) { require(dt > 0.0 && dt <= 0.01, name + " must lie in (0, 0.01]"); }
    void open_unit(double x, const std::string& name) { require(x > 0.0 && x < 1.0, name + " must lie in (0, 1)"); }
    void at_least(long long x, long long lo, const std::string& name) {
        require(x >= lo, name + " must be at least " + std::to_string(lo));
    }
    void finite(double x, const std::string& name) { require(std::isfinite(x), name + " must be finite"); }
    void nonempty_positive(const std::vector<double>& xs, const std::string& name) {
        require(!xs.empty(), name + " must not be empty");
        for (double x : xs) positive(x, name + " entries");
    }
    void layout(int blocks, int block_size, int min_block_size, const std::string& ctx) {
        require(blocks >= 3 && blocks % 2 == 1, ctx + ".blocks must be odd and at least 3");
        at_least(block_size, min_block_size, ctx + ".block_size");
    }

private:
    std::vector<std::string>& problems_;
};

void check(Checker& c, const DetScanParams& p) {
    c.require(!p.a_grid.empty(), "params.a_grid must not be empty");
    for (double a : p.a_grid) c.require(a > 0.0 && a <= 20.0, "params.a_grid entries must lie in (0, 20]");
    c.at_least(p.trials, 10, "params.trials");
    c.step(p.dt, "params.dt");
    c.non_negative(p.burn_in, "params.burn_in");
    c.positive(p.tail, "params.tail");
    c.at_least(p.spike_threshold, 1, "params.spike_threshold");
    c.positive(p.equilibrium_tolerance, "params.equilibrium_tolerance");
}

void check(Checker& c, const NeuronParams& p) {
    c.finite(p.theta, "params.theta");
    c.positive(p.tau, "params.tau");
    c.non_negative(p.sigma, "params.sigma");
    c.positive(p.t_end, "params.t_end");
    c.non_negative(p.burn_in, "params.burn_in");
    c.step(p.dt, "params.dt");
    c.positive(p.delta0, "params.delta0");
    c.positive(p.c1, "params.c1");
    c.at_least(p.runs, 1, "params.runs");
    c.at_least(p.record_every, 0, "params.record_every");
}

void check(Checker& c, const QuietConfig& q) {
    c.positive(q.t0, "params.test.t0");
    c.at_least(q.k, 2, "params.test.k");
    c.positive(q.lambda_c, "params.test.lambda_c");
    c.open_unit(q.alpha_c, "params.test.alpha_c");
    c.positive(q.i_end, "params.test.i_end");
    c.positive(q.c_df, "params.test.c_df");
    c.positive(q.c_lt, "params.test.c_lt");
    c.open_unit(q.count_level, "params.test.count_level");
    c.at_least(q.rare_count, 0, "params.test.rare_count");
    c.non_negative(q.rare_rate, "params.test.rare_rate");
}

void check(Checker& c, const QuietSweepParams& p) {
    c.finite(p.theta, "params.theta");
    c.positive(p.sigma, "params.sigma");
    c.nonempty_positive(p.taus, "params.taus");
    c.at_least(p.runs, 1, "params.runs");
    c.non_negative(p.burn_in, "params.burn_in");
    c.step(p.dt, "params.dt");
    c.positive(p.delta0, "params.delta0");
    check(c, p.test);
}

void check(Checker& c, const RegularSweepParams& p) {
    c.finite(p.theta, "params.theta");
    c.nonempty_positive(p.sigmas, "params.sigmas");
    c.nonempty_positive(p.taus, "params.taus");
    c.at_least(p.runs, 1, "params.runs");
    c.non_negative(p.burn_in, "params.burn_in");
    c.positive(p.t1, "params.t1");
    c.positive(p.c1, "params.c1");
    c.step(p.dt, "params.dt");
    c.positive(p.delta0, "params.delta0");
}

void check(Checker& c, const CalibrateParams& p) {
    const auto& k = p.calibration;
    c.positive(k.lambda_c, "params.lambda_c");
    c.positive(k.t0, "params.t0");
    c.at_least(k.k, 2, "params.k");
    c.positive(k.i_end, "params.i_end");
    c.open_unit(k.alpha_c, "params.alpha_c");
    c.at_least(k.replications, 1, "params.replications");
}

void check(Checker& c, const CircuitParams& p) {
    c.layout(p.blocks, p.block_size, 4, "params");
    c.positive(p.tau, "params.tau");
    c.positive(p.sigma, "params.sigma");
    c.positive(p.c1, "params.c1");
    c.require(std::isfinite(p.theta1) && std::isfinite(p.theta2) && p.theta1 < p.theta2,
              "params.theta1 must be below params.theta2");
    c.positive(p.delta_star, "params.delta_star");
    c.step(p.dt, "params.dt");
    c.positive(p.delta0, "params.delta0");
    c.positive(p.t_end, "params.t_end");
    c.at_least(p.runs, 1, "params.runs");
    c.positive(p.window, "params.window");
    c.at_least(p.record_every, 0, "params.record_every");
    c.non_negative(p.rotation.burn_in, "params.rotation.burn_in");
    c.at_least(p.rotation.min_transitions, 1, "params.rotation.min_transitions");
    c.require(p.rotation.min_cyclic_fraction >= 0.0 && p.rotation.min_cyclic_fraction <= 1.0,
              "params.rotation.min_cyclic_fraction must lie in [0, 1]");
    if (p.delta_star > 0.0 && p.c1 > 0.0 && p.theta1 < p.theta2) {
        try {
            validate(TransmissionParams::from_benchmarks(p.theta1, p.theta2, p.delta_star, p.c1));
        } catch (const std::exception& e) {
            c.require(false, std::string("params: ") + e.what());
        }
    }
}

void check(Checker& c, const ReferenceParams& p) {
    c.layout(p.blocks, p.block_size, 1, "params");
    c.open_unit(p.c, "params.c");
    c.positive(p.dt, "params.dt");
    c.positive(p.t_end, "params.t_end");
    c.at_least(p.runs, 1, "params.runs");
    c.at_least(p.record_every, 1, "params.record_every");
    c.require(p.min_peak > -1.0 && p.min_peak <= 1.0, "params.min_peak must lie in (-1, 1]");
}

// ---- running ---------------------------------------------------------------

CircuitSpec circuit_spec(const CircuitParams& p, std::uint64_t seed) {
    CircuitSpec s;
    s.layout = {p.blocks, p.block_size};
    s.tau = p.tau;
    s.sigma = p.sigma;
    s.c1 = p.c1;
    s.transmission = TransmissionParams::from_benchmarks(p.theta1, p.theta2, p.delta_star, p.c1);
    s.dt = p.dt;
    s.delta0 = p.delta0;
    s.seed = seed;
    s.init = p.init;
    s.record_every = p.record_every;
    return s;
}

double median_isi(const SpikeTrain& train) {
    const auto isis = interspike_intervals(train);
    if (isis.empty()) return std::nan("");
    return empirical_quantile(EmpiricalDF(isis), 0.5);
}

class Clock {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Context {
    const ExperimentConfig& cfg;
    std::filesystem::path dir;
    bool write;
    std::vector<std::string> files;  // relative names, filled in run order
};

std::string run_file(std::size_t run, const std::string& suffix) {
    std::ostringstream name;
    name << "run_" << run << '_' << suffix;
    return name.str();
}

ExperimentResult run_det_scan(const DetScanParams& p, Context& ctx) {
    AttractorOptions opts;
    opts.dt = p.dt;
    opts.burn_in = p.burn_in;
    opts.tail = p.tail;
    opts.spike_threshold = p.spike_threshold;
    opts.equilibrium_tolerance = p.equilibrium_tolerance;
    const Clock clock;
    const auto fractions = bistability_scan(p.a_grid, p.trials, ctx.cfg.seed, opts, ctx.cfg.jobs);
    const double per_run = clock.seconds() / static_cast<double>(p.a_grid.size());

    ExperimentResult res;
    Json table = Json::array();
    for (std::size_t i = 0; i < p.a_grid.size(); ++i) {
        RunRecord r;
        r.run_id = i;
        r.seed = derive_seed(ctx.cfg.seed, i);
        r.parameters = {{"a", p.a_grid[i]}, {"trials", p.trials}};
        r.summary = {{"orbit_fraction", fractions[i]}};
        r.verdicts = {{"bistable", fractions[i] > 0.0 && fractions[i] < 1.0}};
        r.wall_time = per_run;
        res.records.push_back(std::move(r));
        table.push_back({{"a", p.a_grid[i]}, {"orbit_fraction", fractions[i]}});
    }
    res.table = {{"orbit_fraction_by_a", table}};
    return res;
}

ExperimentResult run_neuron(const NeuronParams& p, Context& ctx) {
    ExperimentResult res;
    res.records.resize(p.runs);
    parallel_for(p.runs, ctx.cfg.jobs, [&](std::size_t i) {
        const Clock clock;
        const std::uint64_t seed = derive_seed(ctx.cfg.seed, i);
        SimulationOptions opts;
        opts.t_end = p.t_end;
        opts.dt = p.dt;
        opts.burn_in = p.burn_in;
        opts.delta0 = p.delta0;
        opts.record_every = p.record_every;
        opts.ou = p.ou;
        const NeuronRun run = simulate_neuron({p.theta, p.tau, p.sigma}, opts, seed);
        const RegularVerdict reg = classify_regular(run.train, p.t_end, p.c1);
        if (ctx.write) {
            emit_spike_train_csv(run.train, ctx.dir / run_file(i, "spikes.csv"));
            if (p.record_every > 0)
                emit_trajectory_csv(run.trajectory, output_path(run.train, p.c1),
                                    ctx.dir / run_file(i, "trajectory.csv"));
        }
        RunRecord& r = res.records[i];
        r.run_id = i;
        r.seed = seed;
        r.parameters = {{"theta", p.theta}, {"tau", p.tau}, {"sigma", p.sigma}};
        r.summary = {{"spikes", run.train.size()},
                     {"rate", spike_rate(run.train, p.t_end)},
                     {"median_isi", median_isi(run.train)},
                     {"coverage", reg.coverage},
                     {"r05", reg.r05},
                     {"r10", reg.r10},
                     {"r25", reg.r25}};
        r.verdicts = {{"regular", reg.regular()}};
        r.wall_time = clock.seconds();
    });
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        ctx.files.push_back(run_file(i, "spikes.csv"));
        if (p.record_every > 0) ctx.files.push_back(run_file(i, "trajectory.csv"));
    }
    return res;
}

std::string branch_name(QuietVerdict::Branch b) {
    switch (b) {
        case QuietVerdict::Branch::ExtremelyRare: return "extremely-rare";
        case QuietVerdict::Branch::PoissonFit: return "poisson-fit";
        case QuietVerdict::Branch::Fail: break;
    }
    return "fail";
}

ExperimentResult run_quiet_sweep(const QuietSweepParams& p, Context& ctx) {
    const std::size_t runs = static_cast<std::size_t>(p.runs);
    ExperimentResult res;
    res.records.resize(p.taus.size() * runs);
    parallel_for(res.records.size(), ctx.cfg.jobs, [&](std::size_t i) {
        const Clock clock;
        const double tau = p.taus[i / runs];
        const std::uint64_t seed = derive_seed(ctx.cfg.seed, i);
        SimulationOptions opts;
        opts.t_end = p.test.t1();
        opts.dt = p.dt;
        opts.burn_in = p.burn_in;
        opts.delta0 = p.delta0;
        opts.record_every = 0;
        const NeuronRun run = simulate_neuron({p.theta, tau, p.sigma}, opts, seed);
        const QuietVerdict v = classify_quiet(run.train, p.test);
        RunRecord& r = res.records[i];
        r.run_id = i;
        r.seed = seed;
        r.parameters = {{"theta", p.theta}, {"tau", tau}, {"sigma", p.sigma}};
        r.summary = {{"n_t1", v.n_t1},         {"lambda_tilde", v.lambda_tilde}, {"quantile_bound", v.quantile_bound},
                     {"delta_df", v.delta_df}, {"delta_lt", v.delta_lt}};
        r.verdicts = {{"quiet", v.quiet()}, {"branch", branch_name(v.branch)}};
        r.wall_time = clock.seconds();
    });
    Json taus = Json::array(), percent = Json::array();
    for (std::size_t t = 0; t < p.taus.size(); ++t) {
        int quiet = 0;
        for (std::size_t k = 0; k < runs; ++k) quiet += res.records[t * runs + k].verdicts["quiet"].get<bool>();
        taus.push_back(p.taus[t]);
        percent.push_back(100.0 * quiet / static_cast<double>(runs));
    }
    res.table = {{"tau", taus}, {"percent_quiet", percent}};
    return res;
}

ExperimentResult run_regular_sweep(const RegularSweepParams& p, Context& ctx) {
    const std::size_t runs = static_cast<std::size_t>(p.runs);
    const std::size_t cells = p.sigmas.size() * p.taus.size();
    ExperimentResult res;
    res.records.resize(cells * runs);
    parallel_for(res.records.size(), ctx.cfg.jobs, [&](std::size_t i) {
        const Clock clock;
        const std::size_t cell = i / runs;
        const double sigma = p.sigmas[cell / p.taus.size()];
        const double tau = p.taus[cell % p.taus.size()];
        const std::uint64_t seed = derive_seed(ctx.cfg.seed, i);
        SimulationOptions opts;
        opts.t_end = p.t1;
        opts.dt = p.dt;
        opts.burn_in = p.burn_in;
        opts.delta0 = p.delta0;
        opts.record_every = 0;
        const NeuronRun run = simulate_neuron({p.theta, tau, sigma}, opts, seed);
        const RegularVerdict v = classify_regular(run.train, p.t1, p.c1);
        RunRecord& r = res.records[i];
        r.run_id = i;
        r.seed = seed;
        r.parameters = {{"theta", p.theta}, {"tau", tau}, {"sigma", sigma}};
        r.summary = {{"n_t1", v.n_t1}, {"median_isi", v.median}, {"coverage", v.coverage},
                     {"r05", v.r05},   {"r10", v.r10},           {"r25", v.r25},
                     {"u1", v.benchmarks.u1}, {"u2", v.benchmarks.u2}};
        r.verdicts = {{"regular", v.regular()}};
        r.wall_time = clock.seconds();
    });
    Json rows = Json::array(), medians = Json::array();
    for (std::size_t s = 0; s < p.sigmas.size(); ++s) {
        Json row = Json::array(), mrow = Json::array();
        for (std::size_t t = 0; t < p.taus.size(); ++t) {
            const std::size_t cell = s * p.taus.size() + t;
            int regular = 0;
            double median_sum = 0.0;
            for (std::size_t k = 0; k < runs; ++k) {
                const auto& rec = res.records[cell * runs + k];
                if (rec.verdicts["regular"].get<bool>()) {
                    ++regular;
                    median_sum += rec.summary["median_isi"].get<double>();
                }
            }
            row.push_back(100.0 * regular / static_cast<double>(runs));
            mrow.push_back(regular > 0 ? Json(median_sum / regular) : Json(nullptr));
        }
        rows.push_back(row);
        medians.push_back(mrow);
    }
    res.table = {{"sigma", p.sigmas}, {"tau", p.taus}, {"percent_regular", rows}, {"mean_median_isi_regular", medians}};
    return res;
}

ExperimentResult run_calibrate(const CalibrateParams& p, Context& ctx) {
    const Clock clock;
    const CriticalValues cv = p.cache.empty() ? calibrate_quantiles(p.calibration, ctx.cfg.jobs)
                                              : calibrate_cached(p.cache, p.calibration, ctx.cfg.jobs);
    ExperimentResult res;
    RunRecord r;
    r.seed = p.calibration.seed;
    r.parameters = {{"lambda_c", p.calibration.lambda_c}, {"t0", p.calibration.t0}, {"k", p.calibration.k},
                    {"i_end", p.calibration.i_end},       {"alpha_c", p.calibration.alpha_c},
                    {"replications", p.calibration.replications}};
    r.summary = {{"c_df", cv.c_df}, {"c_lt", cv.c_lt},
                 {"count_bound", poisson_upper_quantile(0.05, p.calibration.lambda_c * p.calibration.t0 * p.calibration.k)}};
    r.wall_time = clock.seconds();
    res.records.push_back(std::move(r));
    res.table = {{"c_df", cv.c_df}, {"c_lt", cv.c_lt}};
    return res;
}

ExperimentResult run_circuits(const CircuitParams& p, Context& ctx) {
    ExperimentResult res;
    res.records.resize(p.runs);
    parallel_for(p.runs, ctx.cfg.jobs, [&](std::size_t i) {
        const Clock clock;
        const std::uint64_t seed = derive_seed(ctx.cfg.seed, i);
        const Circuit circuit = build_circuit(circuit_spec(p, seed));
        const CircuitRun run = run_circuit(circuit, p.t_end);
        const ActivityMatrix activity = block_activity(run.trains, circuit.layout(), p.window, p.delta_star);
        const RotationVerdict rot = detect_rotation(activity, p.rotation);
        if (ctx.write) {
            emit_raster_svg(run.trains, circuit.layout(), ctx.dir / run_file(i, "raster.svg"));
            emit_circuit_spikes_csv(run.trains, ctx.dir / run_file(i, "spikes.csv"));
            if (p.record_every > 0) emit_circuit_inputs_csv(run, ctx.dir / run_file(i, "inputs.csv"));
            std::vector<std::string> header{"window_end"};
            for (int b = 0; b < p.blocks; ++b) header.push_back("block" + std::to_string(b + 1));
            std::vector<std::vector<std::string>> rows;
            for (std::size_t w = 0; w < activity.windows(); ++w) {
                std::vector<std::string> row{format_double(activity.window * static_cast<double>(w + 1))};
                for (int c : activity.counts[w]) row.push_back(std::to_string(c));
                rows.push_back(std::move(row));
            }
            emit_csv(ctx.dir / run_file(i, "activity.csv"), header, rows);
        }
        std::size_t spikes = 0;
        for (const auto& t : run.trains) spikes += t.size();
        Json sequence = Json::array();
        for (const auto& s : rot.sequence) {
            Json blocks = Json::array();
            for (int b : s) blocks.push_back(b + 1);
            sequence.push_back(blocks);
        }
        RunRecord& r = res.records[i];
        r.run_id = i;
        r.seed = seed;
        r.parameters = {{"init", init_name(p.init)}, {"tau", p.tau}, {"sigma", p.sigma}};
        r.summary = {{"spikes", spikes},
                     {"transitions", rot.transitions},
                     {"cyclic_transitions", rot.cyclic_transitions},
                     {"period_transitions", rot.period_transitions},
                     {"period_time", rot.period_time},
                     {"min_drive", run.min_drive},
                     {"max_drive", run.max_drive}};
        r.verdicts = {{"rotating", rot.rotating}, {"all_windows_mixed", rot.all_windows_mixed}};
        r.wall_time = clock.seconds();
    });
    int rotating = 0;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        rotating += res.records[i].verdicts["rotating"].get<bool>();
        for (const char* suffix : {"raster.svg", "spikes.csv", "inputs.csv", "activity.csv"})
            if (p.record_every > 0 || std::string(suffix) != "inputs.csv") ctx.files.push_back(run_file(i, suffix));
    }
    res.table = {{"rotating_runs", rotating}, {"runs", p.runs}};
    return res;
}

ExperimentResult run_references(const ReferenceParams& p, Context& ctx) {
    ExperimentResult res;
    res.records.resize(p.runs);
    parallel_for(p.runs, ctx.cfg.jobs, [&](std::size_t i) {
        const Clock clock;
        const std::uint64_t seed = derive_seed(ctx.cfg.seed, i);
        ReferenceSpec spec;
        spec.layout = {p.blocks, p.block_size};
        spec.c = p.c;
        spec.dt = p.dt;
        spec.t_end = p.t_end;
        spec.seed = seed;
        spec.record_every = p.record_every;
        const ReferenceRun run = run_reference(spec);
        const auto x = run.series(0);
        const std::span<const double> tail(x.data() + x.size() / 2, x.size() - x.size() / 2);
        const AutocorrelationPeak peak = autocorrelation_peak(tail);
        if (ctx.write) {
            std::vector<std::string> header{"t"};
            for (int k = 0; k < spec.layout.size(); ++k) header.push_back("x" + std::to_string(k + 1));
            std::vector<std::vector<std::string>> rows;
            rows.reserve(run.times.size());
            for (std::size_t k = 0; k < run.times.size(); ++k) {
                std::vector<std::string> row{format_double(run.times[k])};
                for (double v : run.states[k]) row.push_back(format_double(v));
                rows.push_back(std::move(row));
            }
            emit_csv(ctx.dir / run_file(i, "trajectory.csv"), header, rows);
        }
        const double sample_dt = p.dt * p.record_every;
        RunRecord& r = res.records[i];
        r.run_id = i;
        r.seed = seed;
        r.parameters = {{"c", p.c}, {"blocks", p.blocks}, {"block_size", p.block_size}};
        r.summary = {{"peak_lag_time", static_cast<double>(peak.lag) * sample_dt}, {"peak_value", peak.value}};
        r.verdicts = {{"periodic", peak.found && peak.value >= p.min_peak}};
        r.wall_time = clock.seconds();
    });
    int periodic = 0;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        periodic += res.records[i].verdicts["periodic"].get<bool>();
        ctx.files.push_back(run_file(i, "trajectory.csv"));
    }
    res.table = {{"periodic_runs", periodic}, {"runs", p.runs}};
    return res;
}

std::string cell_text(const Json& v) {
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg, const ExperimentResult& res,
                    const std::vector<std::string>& files, const std::string& error) {
    Json m = {{"kind", kind_name(cfg.kind())},
              {"complete", res.complete},
              {"runs", res.records.size()},
              {"config", to_json(cfg)},
              {"table", res.table},
              {"files", files}};
    if (!error.empty()) m["error"] = error;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << m.dump(2) << '\n';
}

}  // namespace

std::string kind_name(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }
std::string subcommand_name(ExperimentKind kind) { return kSubcommands[static_cast<int>(kind)]; }

std::vector<std::string> validation_problems(const ExperimentConfig& cfg) {
    std::vector<std::string> problems;
    Checker c(problems);
    c.at_least(cfg.jobs, 1, "jobs");
    c.require(!cfg.out_dir.empty(), "out_dir must not be empty");
    std::visit([&](const auto& p) { check(c, p); }, cfg.params);
    return problems;
}

ExperimentConfig parse_config(const Json& j) {
    std::vector<std::string> problems;
    ExperimentConfig cfg;
    Reader top(j, "config", problems);
    std::string kind;
    top.read("kind", kind);
    top.read("seed", cfg.seed);
    top.read("jobs", cfg.jobs);
    top.read("out_dir", cfg.out_dir);

    int index = -1;
    for (int k = 0; k < 7; ++k)
        if (kind == kKindNames[k]) index = k;
    if (index < 0) {
        problems.push_back("config.kind: expected one of DeterministicScan, SingleNeuron, QuietSweep, RegularSweep, "
                           "Calibrate, CircuitRun, ReferenceRun");
    } else {
        static const Json empty = Json::object();
        const Json* pj = top.child("params");
        Reader r(pj ? *pj : empty, "config.params", problems);
        switch (static_cast<ExperimentKind>(index)) {
            case ExperimentKind::DeterministicScan: { DetScanParams p; read_params(r, p); cfg.params = p; break; }
            case ExperimentKind::SingleNeuron: { NeuronParams p; read_params(r, p); cfg.params = p; break; }
            case ExperimentKind::QuietSweep: { QuietSweepParams p; read_params(r, p, problems); cfg.params = p; break; }
            case ExperimentKind::RegularSweep: { RegularSweepParams p; read_params(r, p); cfg.params = p; break; }
            case ExperimentKind::Calibrate: { CalibrateParams p; read_params(r, p); cfg.params = p; break; }
            case ExperimentKind::CircuitRun: { CircuitParams p; read_params(r, p, problems); cfg.params = p; break; }
            case ExperimentKind::ReferenceRun: { ReferenceParams p; read_params(r, p); cfg.params = p; break; }
        }
        r.finish();
    }
    top.finish();
    for (auto& p : validation_problems(cfg)) problems.push_back(std::move(p));
    if (!problems.empty()) throw ValidationError(problems);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"cannot read config file " + path.string()});
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError({"config is not valid JSON: " + std::string(e.what())});
    }
    return parse_config(j);
}

Json to_json(const ExperimentConfig& cfg) {
    return {{"kind", kind_name(cfg.kind())},
            {"seed", cfg.seed},
            {"jobs", cfg.jobs},
            {"out_dir", cfg.out_dir},
            {"params", std::visit([](const auto& p) { return params_json(p); }, cfg.params)}};
}

void emit_records_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
    std::vector<std::string> header{"run_id", "seed"};
    if (!records.empty()) {
        for (const Json* part : {&records[0].parameters, &records[0].summary, &records[0].verdicts})
            for (const auto& [key, value] : part->items()) header.push_back(key);
    }
    header.push_back("wall_time_s");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records) {
        std::vector<std::string> row{std::to_string(r.run_id), std::to_string(r.seed)};
        for (const Json* part : {&r.parameters, &r.summary, &r.verdicts})
            for (const auto& [key, value] : part->items()) row.push_back(cell_text(value));
        row.push_back(format_double(r.wall_time));
        rows.push_back(std::move(row));
    }
    emit_csv(path, header, rows);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
    if (auto problems = validation_problems(cfg); !problems.empty()) throw ValidationError(problems);
    Context ctx{cfg, cfg.out_dir, write_files, {}};
    if (write_files) std::filesystem::create_directories(ctx.dir);

    ExperimentResult res;
    try {
        res = std::visit(
            [&](const auto& p) -> ExperimentResult {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, DetScanParams>) return run_det_scan(p, ctx);
                else if constexpr (std::is_same_v<P, NeuronParams>) return run_neuron(p, ctx);
                else if constexpr (std::is_same_v<P, QuietSweepParams>) return run_quiet_sweep(p, ctx);
                else if constexpr (std::is_same_v<P, RegularSweepParams>) return run_regular_sweep(p, ctx);
                else if constexpr (std::is_same_v<P, CalibrateParams>) return run_calibrate(p, ctx);
                else if constexpr (std::is_same_v<P, CircuitParams>) return run_circuits(p, ctx);
                else return run_references(p, ctx);
            },
            cfg.params);
        if (write_files) {
            emit_records_csv(res.records, ctx.dir / "runs.csv");
            ctx.files.insert(ctx.files.begin(), "runs.csv");
        }
        res.complete = true;
    } catch (const std::exception& e) {
        if (write_files) {
            try {
                write_manifest(ctx.dir / "manifest.json", cfg, res, ctx.files, e.what());
            } catch (...) {
            }
        }
        throw;
    }
    if (write_files) write_manifest(ctx.dir / "manifest.json", cfg, res, ctx.files, "");
    return res;
}

}  // namespace hhsim
