#include "qrec/harness.hpp"

#include "qrec/errors.hpp"
#include "qrec/seeding.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace qrec {

using nlohmann::json;

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::Simulate: return "simulate";
        case Experiment::Classify: return "classify";
        case Experiment::Entropy: return "entropy";
        case Experiment::Bounds: return "bounds";
        case Experiment::Cantor: return "cantor";
        case Experiment::GridProbe: return "gridprobe";
    }
    return "simulate";
}

Experiment experiment_from_string(const std::string& s) {
    for (Experiment e : {Experiment::Simulate, Experiment::Classify, Experiment::Entropy, Experiment::Bounds,
                         Experiment::Cantor, Experiment::GridProbe})
        if (to_string(e) == s) return e;
    throw InvalidArgument("unknown experiment '" + s + "'");
}

MapModel build_map(const MapSpec& spec) {
    if (spec.kind == "dary") return MapModel::dary_shift(spec.digits);
    if (spec.kind == "markov") {
        if (spec.stationary.empty()) return MapModel::markov_linear(spec.matrix);
        return MapModel::markov_linear(spec.matrix, spec.stationary);
    }
    if (spec.kind == "bernoulli") return MapModel::bernoulli(spec.stationary);
    if (spec.kind == "gauss") return MapModel::gauss();
    if (spec.kind == "blaschke") return MapModel::blaschke(spec.zeros);
    throw InvalidArgument("unknown map kind '" + spec.kind + "'");
}

namespace {

const std::vector<std::string> kFormats{"csv", "json", "txt", "plot"};

json rational_json(const Rational& q) { return to_string(q); }

Rational rational_from(const json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.dump());
    if (j.is_number_float()) return from_double(j.get<double>());
    throw InvalidArgument("expected a rational (\"num/den\" string or number)");
}

json map_json(const MapSpec& m) {
    json j{{"kind", m.kind}};
    if (m.kind == "dary") j["digits"] = m.digits;
    if (m.kind == "markov") {
        json rows = json::array();
        for (const auto& r : m.matrix) {
            json row = json::array();
            for (const auto& q : r) row.push_back(rational_json(q));
            rows.push_back(row);
        }
        j["matrix"] = rows;
        if (!m.stationary.empty()) {
            json p = json::array();
            for (const auto& q : m.stationary) p.push_back(rational_json(q));
            j["stationary"] = p;
        }
    }
    if (m.kind == "bernoulli") {
        json p = json::array();
        for (const auto& q : m.stationary) p.push_back(rational_json(q));
        j["p"] = p;
    }
    if (m.kind == "blaschke") {
        json z = json::array();
        for (const auto& a : m.zeros) z.push_back({a.real(), a.imag()});
        j["zeros"] = z;
    }
    return j;
}

// Reads fields while collecting every problem instead of stopping at the first.
class Reader {
public:
    std::vector<std::string> errors;

    template <class F>
    void field(const json& obj, const std::string& path, const char* key, F&& f) {
        if (!obj.is_object() || !obj.contains(key)) return;
        try {
            f(obj.at(key));
        } catch (const std::exception& e) {
            errors.push_back(path + key + ": " + e.what());
        }
    }
};

std::size_t to_size(const json& v) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw InvalidArgument("expected a non-negative integer");
    return v.get<std::size_t>();
}

double to_real(const json& v) {
    if (!v.is_number()) throw InvalidArgument("expected a number");
    return v.get<double>();
}

Engine engine_from(const std::string& s) {
    if (s == "auto") return Engine::Auto;
    if (s == "symbolic") return Engine::Symbolic;
    if (s == "float") return Engine::Float;
    throw InvalidArgument("unknown engine '" + s + "'");
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    json target = json::object();
    if (c.target.value) target["value"] = rational_json(*c.target.value);
    if (!c.target.word.empty()) {
        target["word"] = c.target.word;
        target["periodic"] = c.target.periodic;
    }
    target["depth"] = c.target.depth;
    json bounds{{"kappas", c.bounds.kappas}};
    bounds["doubling_s"] = c.bounds.doubling_s ? json(*c.bounds.doubling_s) : json(nullptr);
    return {{"experiment", to_string(c.experiment)},
            {"map", map_json(c.map)},
            {"measure", c.measure},
            {"target", target},
            {"schedule", c.schedule ? c.schedule->to_json() : json(nullptr)},
            {"mode", c.mode},
            {"horizons", c.horizons},
            {"trials", c.trials},
            {"seed", c.seed},
            {"workers", c.workers},
            {"entropy", {{"method", c.entropy.method}, {"n_iter", c.entropy.n_iter}, {"point", rational_json(c.entropy.point)}}},
            {"cantor",
             {{"levels", c.cantor.levels},
              {"epsilon", c.cantor.epsilon},
              {"cap", c.cantor.cap},
              {"max_blocks", c.cantor.max_blocks}}},
            {"grid",
             {{"grid", c.grid.grid}, {"a", c.grid.a}, {"b", c.grid.b}, {"k_max", c.grid.k_max}, {"balls", c.grid.balls}}},
            {"bounds", bounds},
            {"precision",
             {{"bits", c.precision.bits}, {"engine", to_string(c.precision.engine)}, {"dither", c.precision.dither}}},
            {"output", {{"dir", c.output.dir}, {"formats", c.output.formats}}}};
}

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> v;
    std::optional<MapModel> map;
    try {
        map = build_map(c.map);
    } catch (const InvalidArgument& e) {
        v.push_back(std::string("map: ") + e.what());
    }  // NumericalError (non-primitive chain) propagates: it is not a config typo
    if (c.horizons.empty()) v.push_back("horizons: must not be empty");
    for (std::size_t h : c.horizons)
        if (h == 0) v.push_back("horizons: entries must be positive");
    if (!std::is_sorted(c.horizons.begin(), c.horizons.end()) ||
        std::adjacent_find(c.horizons.begin(), c.horizons.end()) != c.horizons.end())
        v.push_back("horizons: must be strictly increasing");
    if (c.trials == 0) v.push_back("trials: must be at least 1");

    const bool needs_target = c.experiment == Experiment::Simulate || c.experiment == Experiment::Classify ||
                              c.experiment == Experiment::Bounds || c.experiment == Experiment::Cantor;
    const bool needs_schedule = needs_target;
    if (c.target.value && !c.target.word.empty()) v.push_back("target: give either 'value' or 'word', not both");
    if (needs_target && !c.target.value && c.target.word.empty()) v.push_back("target: missing ('value' or 'word')");
    if (needs_schedule && !c.schedule) v.push_back("schedule: missing");

    static const std::vector<std::string> measures{"natural", "lebesgue", "gauss", "markov"};
    if (std::find(measures.begin(), measures.end(), c.measure) == measures.end())
        v.push_back("measure: unknown '" + c.measure + "'");
    else if (map) {
        if (c.measure == "gauss" && map->kind() != MapKind::Gauss) v.push_back("measure: 'gauss' needs the Gauss map");
        if (c.measure == "markov" && !map->is_linear()) v.push_back("measure: 'markov' needs a linear map");
        if (c.measure == "lebesgue" && map->kind() == MapKind::Gauss)
            v.push_back("measure: Lebesgue is not invariant for the Gauss map");
    }

    if (c.mode != "auto" && c.mode != "metric" && c.mode != "symbolic") v.push_back("mode: unknown '" + c.mode + "'");
    if (c.schedule && c.experiment == Experiment::Simulate) {
        if (c.mode == "metric" && !c.schedule->is_radii()) v.push_back("mode: metric hits need a radii schedule");
        if (c.mode == "symbolic" && c.schedule->is_radii()) v.push_back("mode: symbolic hits need a depth schedule");
    }
    if (map && c.experiment == Experiment::Simulate && c.schedule && !c.schedule->is_radii() && !map->exact())
        v.push_back("schedule: depth schedules need an exact map");

    if (c.entropy.method != "closed" && c.entropy.method != "birkhoff" && c.entropy.method != "smb")
        v.push_back("entropy.method: unknown '" + c.entropy.method + "'");
    if (c.entropy.n_iter == 0) v.push_back("entropy.n_iter: must be at least 1");

    if (c.cantor.levels.empty() || c.cantor.levels.size() > 3) v.push_back("cantor.levels: need 1 to 3 level sizes");
    for (std::size_t N : c.cantor.levels)
        if (N == 0) v.push_back("cantor.levels: sizes must be positive");
    if (!(c.cantor.epsilon > 0)) v.push_back("cantor.epsilon: must be positive");
    if (!(c.cantor.cap > 1)) v.push_back("cantor.cap: must exceed 1");
    if (map && c.experiment == Experiment::Cantor && !map->is_linear())
        v.push_back("map: Cantor stages need a DAryShift or MarkovLinear map");

    if (c.grid.grid != "map" && c.grid.grid != "rectangle") v.push_back("grid.grid: unknown '" + c.grid.grid + "'");
    if (c.grid.grid == "rectangle" && !(0.5 < c.grid.b && c.grid.b < c.grid.a && c.grid.a < 1))
        v.push_back("grid: rectangle grid needs 1/2 < b < a < 1");
    if (c.grid.grid == "map" && map && c.experiment == Experiment::GridProbe && !map->is_linear())
        v.push_back("map: grid probes need a DAryShift or MarkovLinear map");
    if (c.grid.k_max == 0 || c.grid.balls == 0) v.push_back("grid: k_max and balls must be positive");

    for (double k : c.bounds.kappas)
        if (!(k > 0)) v.push_back("bounds.kappas: entries must be positive");

    if (c.precision.bits != 0 && (c.precision.bits < 53 || c.precision.bits > 65536))
        v.push_back("precision.bits: must be 0 or within [53, 65536]");
    if (map && c.precision.engine == Engine::Symbolic && !map->is_linear())
        v.push_back("precision.engine: symbolic needs a linear map");

    if (c.output.dir.empty()) v.push_back("output.dir: must not be empty");
    for (const auto& f : c.output.formats)
        if (std::find(kFormats.begin(), kFormats.end(), f) == kFormats.end())
            v.push_back("output.formats: unknown format '" + f + "'");
    return v;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError({"config: expected a JSON object"});
    ExperimentConfig c;
    Reader r;
    static const std::vector<std::string> known{"experiment", "map",     "measure", "target", "schedule", "mode",
                                                "horizons",   "trials",  "seed",    "workers", "entropy", "cantor",
                                                "grid",       "bounds",  "precision", "output"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) r.errors.push_back(key + ": unknown field");

    r.field(j, "", "experiment", [&](const json& v) { c.experiment = experiment_from_string(v.get<std::string>()); });
    r.field(j, "", "map", [&](const json& m) {
        if (!m.is_object() || !m.contains("kind")) throw InvalidArgument("needs a 'kind'");
        c.map.kind = m.at("kind").get<std::string>();
        r.field(m, "map.", "digits", [&](const json& v) { c.map.digits = v.get<int>(); });
        r.field(m, "map.", "matrix", [&](const json& v) {
            c.map.matrix.clear();
            for (const auto& row : v) {
                std::vector<Rational> out;
                for (const auto& q : row) out.push_back(rational_from(q));
                c.map.matrix.push_back(std::move(out));
            }
        });
        auto read_vec = [&](const json& v) {
            c.map.stationary.clear();
            for (const auto& q : v) c.map.stationary.push_back(rational_from(q));
        };
        r.field(m, "map.", "stationary", read_vec);
        r.field(m, "map.", "p", read_vec);
        r.field(m, "map.", "zeros", [&](const json& v) {
            c.map.zeros.clear();
            for (const auto& z : v) {
                if (!z.is_array() || z.size() != 2) throw InvalidArgument("zeros are [re, im] pairs");
                c.map.zeros.emplace_back(z[0].get<double>(), z[1].get<double>());
            }
        });
    });
    r.field(j, "", "measure", [&](const json& v) { c.measure = v.get<std::string>(); });
    r.field(j, "", "target", [&](const json& t) {
        r.field(t, "target.", "value", [&](const json& v) {
            if (!v.is_null()) c.target.value = rational_from(v);
        });
        r.field(t, "target.", "word", [&](const json& v) { c.target.word = v.get<Word>(); });
        r.field(t, "target.", "periodic", [&](const json& v) { c.target.periodic = v.get<bool>(); });
        r.field(t, "target.", "depth", [&](const json& v) { c.target.depth = to_size(v); });
    });
    r.field(j, "", "schedule", [&](const json& v) {
        if (!v.is_null()) c.schedule = Schedule::from_json(v);
    });
    r.field(j, "", "mode", [&](const json& v) { c.mode = v.get<std::string>(); });
    r.field(j, "", "horizons", [&](const json& v) {
        c.horizons.clear();
        for (const auto& h : v) c.horizons.push_back(to_size(h));
    });
    r.field(j, "", "trials", [&](const json& v) { c.trials = to_size(v); });
    r.field(j, "", "seed", [&](const json& v) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw InvalidArgument("expected a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    });
    r.field(j, "", "workers", [&](const json& v) { c.workers = to_size(v); });
    r.field(j, "", "entropy", [&](const json& e) {
        r.field(e, "entropy.", "method", [&](const json& v) { c.entropy.method = v.get<std::string>(); });
        r.field(e, "entropy.", "n_iter", [&](const json& v) { c.entropy.n_iter = to_size(v); });
        r.field(e, "entropy.", "point", [&](const json& v) { c.entropy.point = rational_from(v); });
    });
    r.field(j, "", "cantor", [&](const json& e) {
        r.field(e, "cantor.", "levels", [&](const json& v) {
            c.cantor.levels.clear();
            for (const auto& n : v) c.cantor.levels.push_back(to_size(n));
        });
        r.field(e, "cantor.", "epsilon", [&](const json& v) { c.cantor.epsilon = to_real(v); });
        r.field(e, "cantor.", "cap", [&](const json& v) { c.cantor.cap = to_real(v); });
        r.field(e, "cantor.", "max_blocks", [&](const json& v) { c.cantor.max_blocks = to_size(v); });
    });
    r.field(j, "", "grid", [&](const json& e) {
        r.field(e, "grid.", "grid", [&](const json& v) { c.grid.grid = v.get<std::string>(); });
        r.field(e, "grid.", "a", [&](const json& v) { c.grid.a = to_real(v); });
        r.field(e, "grid.", "b", [&](const json& v) { c.grid.b = to_real(v); });
        r.field(e, "grid.", "k_max", [&](const json& v) { c.grid.k_max = to_size(v); });
        r.field(e, "grid.", "balls", [&](const json& v) { c.grid.balls = to_size(v); });
    });
    r.field(j, "", "bounds", [&](const json& e) {
        r.field(e, "bounds.", "kappas", [&](const json& v) { c.bounds.kappas = v.get<std::vector<double>>(); });
        r.field(e, "bounds.", "doubling_s", [&](const json& v) {
            if (!v.is_null()) c.bounds.doubling_s = to_real(v);
        });
    });
    r.field(j, "", "precision", [&](const json& e) {
        r.field(e, "precision.", "bits", [&](const json& v) { c.precision.bits = static_cast<unsigned>(to_size(v)); });
        r.field(e, "precision.", "engine", [&](const json& v) { c.precision.engine = engine_from(v.get<std::string>()); });
        r.field(e, "precision.", "dither", [&](const json& v) { c.precision.dither = to_real(v); });
    });
    r.field(j, "", "output", [&](const json& e) {
        r.field(e, "output.", "dir", [&](const json& v) { c.output.dir = v.get<std::string>(); });
        r.field(e, "output.", "formats", [&](const json& v) { c.output.formats = v.get<std::vector<std::string>>(); });
    });

    auto problems = r.errors;
    for (auto& v : validate(c)) problems.push_back(std::move(v));
    if (!problems.empty()) throw ValidationError(problems);
    return c;
}

TrialExecutor pool_executor(std::size_t workers) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers == 1) return sequential_executor;
    return [workers](std::size_t n, const std::function<void(std::size_t)>& body) {
        std::atomic<std::size_t> next{0};
        std::exception_ptr err;
        std::mutex mu;
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < std::min(workers, n); ++w)
                pool.emplace_back([&] {
                    for (;;) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= n) return;
                        try {
                            body(i);
                        } catch (...) {
                            std::lock_guard lock(mu);
                            if (!err) err = std::current_exception();
                            next.store(n);
                        }
                    }
                });
        }
        if (err) std::rethrow_exception(err);
    };
}

namespace {

InvariantMeasure make_measure(const MapModel& map, const std::string& name) {
    if (name == "lebesgue") return InvariantMeasure::lebesgue();
    if (name == "gauss") return InvariantMeasure::gauss();
    if (name == "markov") return InvariantMeasure::markov_stationary(map.transition(), map.stationary());
    return InvariantMeasure::natural_for(map);
}

TargetPoint make_target(const MapModel& map, const ExperimentConfig& c) {
    std::size_t depth = c.target.depth;
    if (depth == 0 && c.precision.bits != 0 && map.exact()) {
        // Enough digits to resolve the target to `bits` binary places.
        const double per_digit = std::max(std::log2(map.expansion_beta()), 0.25);
        depth = static_cast<std::size_t>(std::ceil(c.precision.bits / per_digit)) + 8;
    }
    if (c.target.value) return TargetPoint::from_rational(map, *c.target.value, depth);
    return TargetPoint::from_word(map, c.target.word, c.target.periodic, depth);
}

OrbitOptions orbit_options(const ExperimentConfig& c) {
    OrbitOptions o;
    o.engine = c.precision.engine;
    o.dither = c.precision.dither;
    return o;
}

std::string fmt(double x, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

void run_simulate(const ExperimentConfig& c, const MapModel& map, const InvariantMeasure& m, ResultSet& rs) {
    const TargetPoint x0 = make_target(map, c);
    const Schedule& sched = *c.schedule;
    const bool symbolic = c.mode == "symbolic" || (c.mode == "auto" && !sched.is_radii());
    HitOptions opts;
    opts.horizons = c.horizons;
    opts.orbit = orbit_options(c);
    opts.exec = pool_executor(c.workers);
    const std::size_t n = c.horizons.back();
    const HitSeries h = symbolic ? run_symbolic_hits(map, m, x0, sched, n, c.trials, c.seed, opts)
                                 : run_metric_hits(map, m, x0, sched, n, c.trials, c.seed, opts);
    rs.summary = to_json(h);
    rs.summary["target"] = to_json(x0);
    if (h.horizons.size() >= 2 && !h.trials.empty() && h.trials.front().liminf.size() >= 2) {
        std::size_t up = 0;
        for (const auto& t : h.trials)
            if (t.liminf.back() > t.liminf.front()) ++up;
        rs.summary["liminf_increase_fraction"] = static_cast<double>(up) / static_cast<double>(h.trials.size());
    }
    rs.columns = {"trial", "n", "hits", "normalizer", "ratio"};
    for (std::size_t t = 0; t < h.trials.size(); ++t)
        for (std::size_t k = 0; k < h.checkpoints.size(); ++k)
            rs.rows.push_back({t, h.checkpoints[k], h.trials[t].hits[k], h.normalizer[k], h.ratio(t, k)});
    rs.plot_x = "n";
    rs.plot_y = "mean_ratio";
    rs.table_header = {"n", "normalizer", "mean ratio", "ci95"};
    for (std::size_t k = 0; k < h.checkpoints.size(); ++k) {
        rs.plot.emplace_back(static_cast<double>(h.checkpoints[k]), h.mean_ratio[k]);
        rs.table.push_back({std::to_string(h.checkpoints[k]), fmt(h.normalizer[k]), fmt(h.mean_ratio[k]), fmt(h.ci95[k])});
    }
}

void run_classify(const ExperimentConfig& c, const MapModel& map, const InvariantMeasure& m, ResultSet& rs) {
    const TargetPoint x0 = make_target(map, c);
    const Classification cl = borel_cantelli_classify(map, m, x0, *c.schedule);
    rs.summary = to_json(cl);
    rs.columns = {"series", "n", "partial_sum"};
    rs.plot_x = "n";
    rs.plot_y = "partial_sum";
    auto add = [&](const SeriesReport& s, bool plot) {
        for (const auto& [n, v] : s.partial_sums) {
            rs.rows.push_back({s.name, n, v});
            if (plot) rs.plot.emplace_back(static_cast<double>(n), v);
        }
    };
    add(cl.series, true);
    if (cl.strengthened) add(*cl.strengthened, false);
    rs.table_header = {"series", "converges", "rule"};
    auto row = [&](const SeriesReport& s) {
        rs.table.push_back({s.name, s.converges ? (*s.converges ? "yes" : "no") : "undecided", s.rule});
    };
    row(cl.series);
    if (cl.strengthened) row(*cl.strengthened);
    rs.table.push_back({"verdict", to_string(cl.verdict), ""});
}

void run_entropy(const ExperimentConfig& c, const MapModel& map, const InvariantMeasure& m, ResultSet& rs) {
    EntropyEstimate e;
    if (c.entropy.method == "closed") e = entropy_closed_form(map, m);
    else if (c.entropy.method == "smb") e = entropy_smb(map, m, c.entropy.point, c.entropy.n_iter);
    else e = entropy_birkhoff(map, m, c.entropy.n_iter, c.trials, c.seed, pool_executor(c.workers));
    rs.summary = to_json(e);
    std::optional<double> ref;
    try {
        ref = entropy_closed_form(map, m).value;
        rs.summary["closed_form"] = *ref;
    } catch (const std::exception&) {
    }
    rs.columns = {"trial", "seed", "value"};
    rs.plot_x = "trial";
    rs.plot_y = "value";
    for (std::size_t t = 0; t < e.trial_values.size(); ++t) {
        rs.rows.push_back({t, trial_seed(c.seed, t), e.trial_values[t]});
        rs.plot.emplace_back(static_cast<double>(t), e.trial_values[t]);
    }
    rs.table_header = {"method", "value", "stderr", "closed form"};
    rs.table.push_back({to_string(e.method), fmt(e.value, 8), fmt(e.standard_error, 3), ref ? fmt(*ref, 8) : "-"});
}

void add_bound(ResultSet& rs, const std::string& label, const DimensionBound& b) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    auto txt = [](const std::optional<double>& v) { return v ? fmt(*v, 10) : std::string("-"); };
    rs.rows.push_back({label, b.formula, opt(b.grid_lower), opt(b.hausdorff_lower), opt(b.upper)});
    rs.table.push_back({label, b.formula, txt(b.grid_lower), txt(b.hausdorff_lower), txt(b.upper)});
    json entry = to_json(b);
    entry["label"] = label;
    rs.summary["bounds"].push_back(entry);
}

void run_bounds(const ExperimentConfig& c, const MapModel& map, const InvariantMeasure& m, ResultSet& rs) {
    const TargetPoint x0 = make_target(map, c);
    const Schedule& sched = *c.schedule;
    const double h = entropy_closed_form(map, m).value;
    const double log_beta = std::log(map.expansion_beta());
    rs.columns = {"label", "formula", "grid_lower", "hausdorff_lower", "upper"};
    rs.table_header = rs.columns;
    rs.summary = {{"entropy", h}, {"log_beta", log_beta}, {"target", to_json(x0)}, {"bounds", json::array()}};
    const auto D = map.branch_count();
    if (sched.is_radii()) {
        const Rates ell = sched.radius_rates();
        add_bound(rs, "radii", bound_radii_lower(h, x0.delta_upper, ell.upper, x0.tau_upper, log_beta));
        if (c.bounds.doubling_s)
            add_bound(rs, "doubling", bound_doubling(x0.delta_upper, ell.upper, *c.bounds.doubling_s, log_beta));
        if (D) add_bound(rs, "upper", bound_upper_radii(static_cast<int>(*D), h, x0.delta_lower, ell.lower));
    } else {
        const Rates L = depth_mass_rates(x0, sched);
        const Rates w = sched.depth_rates();
        add_bound(rs, "code", bound_code_lower(h, L.upper));
        add_bound(rs, "code_w", bound_code_w(w.upper));
        if (D) add_bound(rs, "upper", bound_upper_code(static_cast<int>(*D), h, L.lower));
        if (map.is_linear()) {
            bool bernoulli = true;
            for (const auto& row : map.transition()) bernoulli = bernoulli && row == map.stationary();
            if (bernoulli) {
                std::vector<double> p;
                for (const auto& q : map.stationary()) p.push_back(q.get_d());
                add_bound(rs, "hoeffding", bound_hoeffding(p, L.lower));
            }
        }
    }
    rs.plot_x = "kappa";
    rs.plot_y = "grid_lower";
    for (double kappa : c.bounds.kappas) {
        const DimensionBound b = bound_radii_lower(h, x0.delta_upper, kappa, x0.tau_upper, log_beta);
        add_bound(rs, "kappa=" + fmt(kappa), b);
        rs.plot.emplace_back(kappa, *b.grid_lower);
    }
}

void run_cantor(const ExperimentConfig& c, const MapModel& map, ResultSet& rs) {
    const TargetPoint x0 = make_target(map, c);
    StageOptions so;
    so.epsilon = c.cantor.epsilon;
    const CantorStage st = build_cantor_stage(map, x0, *c.schedule, c.cantor.levels, so);
    const StageCheck chk = check_stage(map, st);
    rs.summary = {{"stage", to_json(st, c.cantor.max_blocks)},
                  {"check",
                   {{"nesting_violations", chk.nesting_violations},
                    {"ratio_violations", chk.ratio_violations},
                    {"sums_exact_one", chk.sums_exact_one}}},
                  {"cantor_lambda", stage_cantor_lambda(st)}};
    json sums = json::array();
    for (const auto& s : chk.level_sums) sums.push_back(to_string(s));
    rs.summary["check"]["level_sums"] = sums;
    if (st.depth() >= 2) rs.summary["frostman"] = to_json(frostman_exponent(st, c.cantor.cap));
    rs.columns = {"j", "N", "k", "d", "count", "alpha", "beta", "gamma", "delta"};
    rs.table_header = rs.columns;
    for (std::size_t j = 1; j <= st.depth(); ++j) {
        const StageLevel& lv = st.levels[j];
        rs.rows.push_back({j, lv.N, lv.k, lv.d, lv.count, lv.alpha, lv.beta, lv.gamma, lv.delta});
        rs.table.push_back({std::to_string(j), std::to_string(lv.N), std::to_string(lv.k), std::to_string(lv.d),
                            std::to_string(lv.count), fmt(lv.alpha), fmt(lv.beta), fmt(lv.gamma), fmt(lv.delta)});
    }
    rs.plot_x = "-log lambda";
    rs.plot_y = "-log nu";
    for (std::size_t j = 0; j <= st.depth(); ++j) {
        std::size_t taken = 0;
        for (std::size_t bi : st.j_index[j]) {
            if (taken++ >= c.cantor.max_blocks) break;
            rs.plot.emplace_back(-log_of(st.blocks[bi].lambda()), -log_of(st.blocks[bi].nu));
        }
    }
}

void run_gridprobe(const ExperimentConfig& c, const MapModel& map, ResultSet& rs) {
    const std::vector<ProbeRow> rows = c.grid.grid == "rectangle"
                                           ? rectangle_grid_probe(c.grid.a, c.grid.b, c.grid.k_max)
                                           : grid_regularity_probe(map, default_balls(c.grid.balls, c.seed));
    double worst = 0;
    for (const auto& r : rows) worst = std::max(worst, r.ratio);
    rs.summary = {{"grid", c.grid.grid}, {"rows", to_json(rows)}, {"max_ratio", worst}};
    rs.columns = {"k", "n", "ball", "cover", "ratio"};
    rs.table_header = rs.columns;
    rs.plot_x = "k";
    rs.plot_y = "ratio";
    for (const auto& r : rows) {
        rs.rows.push_back({r.k, r.level, r.ball, r.cover, r.ratio});
        rs.table.push_back({std::to_string(r.k), std::to_string(r.level), fmt(r.ball), fmt(r.cover), fmt(r.ratio)});
        rs.plot.emplace_back(static_cast<double>(r.k), r.ratio);
    }
}

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ResultSet run(const ExperimentConfig& config) {
    if (auto v = validate(config); !v.empty()) throw ValidationError(v);
    const MapModel map = build_map(config.map);
    const InvariantMeasure m = make_measure(map, config.measure);
    ResultSet rs;
    rs.config = to_json(config);
    switch (config.experiment) {
        case Experiment::Simulate: run_simulate(config, map, m, rs); break;
        case Experiment::Classify: run_classify(config, map, m, rs); break;
        case Experiment::Entropy: run_entropy(config, map, m, rs); break;
        case Experiment::Bounds: run_bounds(config, map, m, rs); break;
        case Experiment::Cantor: run_cantor(config, map, rs); break;
        case Experiment::GridProbe: run_gridprobe(config, map, rs); break;
    }
    rs.provenance = {{"tool", "qrec"},
                     {"version", kToolVersion},
                     {"experiment", to_string(config.experiment)},
                     {"seed", config.seed},
                     {"seed_rule", "trial_seed(master, i) = mix64(master ^ mix64(i)), mix64 = SplitMix64 finaliser"},
                     {"timestamp", utc_timestamp()}};
    return rs;
}

}  // namespace qrec
