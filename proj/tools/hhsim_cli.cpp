#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hhsim/errors.hpp"
#include "hhsim/experiments.hpp"

namespace {

constexpr const char* kOutDirEnv = "HHSIM_OUT_DIR";

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
};

hhsim::Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hhsim::ValidationError({"cannot read config file " + path});
    try {
        return hhsim::Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw hhsim::ValidationError({"config is not valid JSON: " + std::string(e.what())});
    }
}

int run(hhsim::ExperimentKind kind, const Overrides& o) {
    hhsim::Json j = o.config.empty() ? hhsim::Json::object() : read_json(o.config);
    if (!j.is_object()) throw hhsim::ValidationError({"config: expected an object"});
    const std::string kind_name = hhsim::kind_name(kind);
    if (!j.contains("kind")) j["kind"] = kind_name;
    else if (j["kind"] != kind_name)
        throw hhsim::ValidationError({"config.kind does not match subcommand " + hhsim::subcommand_name(kind) +
                                      " (expected " + kind_name + ")"});
    if (o.out) j["out_dir"] = *o.out;
    else if (!j.contains("out_dir"))
        if (const char* env = std::getenv(kOutDirEnv); env && *env) j["out_dir"] = env;
    if (o.seed) j["seed"] = *o.seed;
    if (o.jobs) j["jobs"] = *o.jobs;

    const hhsim::ExperimentConfig cfg = hhsim::parse_config(j);
    const hhsim::ExperimentResult res = hhsim::run_experiment(cfg);
    std::cout << res.table.dump(2) << '\n'
              << "wrote " << res.records.size() << " run record(s) to " << cfg.out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic Hodgkin-Huxley neurons, regime tests and block-ring circuits"};
    app.require_subcommand(1);

    using Kind = hhsim::ExperimentKind;
    const std::pair<Kind, const char*> commands[] = {
        {Kind::DeterministicScan, "Scan the deterministic model for bistability"},
        {Kind::SingleNeuron, "Simulate single stochastic neurons"},
        {Kind::QuietSweep, "Quiet-behaviour test over a tau grid"},
        {Kind::RegularSweep, "Regular-spiking test over a sigma x tau grid"},
        {Kind::Calibrate, "Monte-Carlo critical values of the goodness-of-fit statistics"},
        {Kind::CircuitRun, "Simulate block-ring circuits and detect rotating activity"},
        {Kind::ReferenceRun, "Simulate the deterministic reference ring"},
    };

    Overrides o;
    std::optional<Kind> chosen;
    for (const auto& [kind, help] : commands) {
        auto* sub = app.add_subcommand(hhsim::subcommand_name(kind), help);
        sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, std::string("Output directory (default: config, then $") + kOutDirEnv + ")");
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber);
        sub->callback([&chosen, kind = kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return run(*chosen, o);
    } catch (const hhsim::ValidationError& e) {
        std::cerr << "invalid configuration:\n";
        for (const auto& p : e.problems()) std::cerr << "  - " << p << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
