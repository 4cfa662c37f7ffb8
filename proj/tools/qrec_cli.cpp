#include "qrec/errors.hpp"
#include "qrec/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace qrec;
using nlohmann::json;

namespace {

// Small runnable defaults per subcommand; --config replaces them.
ExperimentConfig default_config(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::Simulate:
            c.target.word = {0, 1};
            c.target.periodic = true;
            c.schedule = Schedule::depth_log_floor(2.0);
            c.horizons = {1000, 10000, 100000};
            break;
        case Experiment::Classify:
            c.map.kind = "gauss";
            c.target.word = {1};
            c.target.periodic = true;
            c.schedule = Schedule::radii_power(2.0);
            break;
        case Experiment::Entropy:
            c.map.kind = "gauss";
            c.seed = 7;
            break;
        case Experiment::Bounds:
            c.target.value = Rational(1, 3);
            c.schedule = Schedule::radii_exp(std::log(2.0));
            c.bounds.kappas = {0.25, 0.5, 1.0, 2.0};
            break;
        case Experiment::Cantor:
            c.target.value = Rational(1, 3);
            c.schedule = Schedule::radii_exp(std::log(2.0));
            break;
        case Experiment::GridProbe: break;
    }
    return c;
}

std::vector<std::size_t> parse_horizons(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || item.empty()) throw InvalidArgument("--horizon: bad entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
    }
}

struct Flags {
    std::string config, out, horizon;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> precision;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> workers;
    std::vector<std::string> formats;
    bool quiet = false;
};

int run_experiment(Experiment e, const Flags& f) {
    ExperimentConfig c = f.config.empty() ? default_config(e) : config_from_json(read_json(f.config));
    c.experiment = e;
    if (f.seed) c.seed = *f.seed;
    if (f.precision) c.precision.bits = *f.precision;
    if (f.trials) c.trials = *f.trials;
    if (f.workers) c.workers = *f.workers;
    if (!f.horizon.empty()) c.horizons = parse_horizons(f.horizon);
    if (!f.out.empty()) c.output.dir = f.out;
    if (!f.formats.empty()) c.output.formats = f.formats;
    if (auto v = validate(c); !v.empty()) throw ValidationError(v);

    const ResultSet rs = run(c);
    for (const auto& fmt : c.output.formats) {
        const auto path = emit_report(rs, fmt, c.output.dir);
        if (!f.quiet) std::cerr << "wrote " << path.string() << '\n';
    }
    if (!f.quiet) std::cout << render(rs, "txt");
    return 0;
}

int run_report(const std::string& input, const Flags& f) {
    const ResultSet rs = result_set_from_json(read_json(input));
    const std::vector<std::string> formats = f.formats.empty() ? std::vector<std::string>{"txt"} : f.formats;
    for (const auto& fmt : formats) {
        if (f.out.empty()) {
            std::cout << render(rs, fmt);
        } else {
            const auto path = emit_report(rs, fmt, f.out);
            if (!f.quiet) std::cerr << "wrote " << path.string() << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qrec: quantitative recurrence experiments for expanding maps"};
    app.require_subcommand(1);
    Flags f;
    std::string input;

    const std::vector<std::pair<Experiment, std::string>> subs{
        {Experiment::Simulate, "metric or symbolic hit counts against a shrinking target"},
        {Experiment::Classify, "measure-zero / full-measure verdict from the target series"},
        {Experiment::Entropy, "entropy estimates (closed form, Birkhoff, SMB)"},
        {Experiment::Bounds, "dimension bounds for a target and schedule"},
        {Experiment::Cantor, "finite-depth Cantor stage with its mass distribution"},
        {Experiment::GridProbe, "grid regularity ratios"},
    };
    std::vector<std::pair<CLI::App*, Experiment>> commands;
    for (const auto& [e, help] : subs) {
        CLI::App* sc = app.add_subcommand(to_string(e), help);
        sc->add_option("--config", f.config, "experiment config (JSON)");
        sc->add_option("--seed", f.seed, "master seed");
        sc->add_option("--out", f.out, "output directory");
        sc->add_option("--precision", f.precision, "target resolution in bits (>= 53)");
        sc->add_option("--trials", f.trials, "number of trials");
        sc->add_option("--horizon", f.horizon, "horizon list, e.g. 10000,1000000");
        sc->add_option("--workers", f.workers, "worker threads (results do not depend on it)");
        sc->add_option("--format", f.formats, "report formats: csv json txt plot");
        sc->add_flag("--quiet", f.quiet, "no console output");
        commands.emplace_back(sc, e);
    }
    CLI::App* rep = app.add_subcommand("report", "re-emit a saved results.json");
    rep->add_option("input", input, "results.json from an earlier run")->required();
    rep->add_option("--out", f.out, "output directory (default: print to stdout)");
    rep->add_option("--format", f.formats, "csv json txt plot");
    rep->add_flag("--quiet", f.quiet, "no console output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (rep->parsed()) return run_report(input, f);
        for (const auto& [sc, e] : commands)
            if (sc->parsed()) return run_experiment(e, f);
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration:\n";
        for (const auto& v : e.violations()) std::cerr << "  - " << v << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const BoundaryError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
