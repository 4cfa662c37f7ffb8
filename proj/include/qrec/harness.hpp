#pragma once

#include "qrec/dimension.hpp"
#include "qrec/maps.hpp"
#include "qrec/measures.hpp"
#include "qrec/orbits.hpp"
#include "qrec/recurrence.hpp"
#include "qrec/schedule.hpp"

#include "json.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qrec {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Experiment { Simulate, Classify, Entropy, Bounds, Cantor, GridProbe };
std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct MapSpec {
    std::string kind = "dary";  // dary | markov | bernoulli | gauss | blaschke
    int digits = 2;
    Matrix matrix;                    // markov
    std::vector<Rational> stationary;  // markov (optional) or bernoulli weights
    std::vector<std::complex<double>> zeros;  // blaschke

    bool operator==(const MapSpec&) const = default;
};
MapModel build_map(const MapSpec& spec);

struct TargetSpec {
    std::optional<Rational> value;
    Word word;
    bool periodic = false;
    std::size_t depth = 0;  // 0: derived from precision.bits, else the library default

    bool operator==(const TargetSpec&) const = default;
};

struct EntropySpec {
    std::string method = "birkhoff";  // closed | birkhoff | smb
    std::size_t n_iter = 100000;
    Rational point = Rational(1, 3);  // smb only

    bool operator==(const EntropySpec&) const = default;
};

struct CantorSpec {
    std::vector<std::size_t> levels{8, 12};
    double epsilon = 0.3;
    double cap = 1e3;
    std::size_t max_blocks = 2000;  // blocks written to the JSON dump

    bool operator==(const CantorSpec&) const = default;
};

struct GridSpec {
    std::string grid = "map";  // map | rectangle
    double a = 0.7;
    double b = 0.6;
    std::size_t k_max = 40;
    std::size_t balls = 30;

    bool operator==(const GridSpec&) const = default;
};

struct BoundsSpec {
    std::vector<double> kappas;    // extra table: RadiiExp rates
    std::optional<double> doubling_s;

    bool operator==(const BoundsSpec&) const = default;
};

struct PrecisionSpec {
    unsigned bits = 0;  // 0: library defaults
    Engine engine = Engine::Auto;
    double dither = -1.0;

    bool operator==(const PrecisionSpec&) const = default;
};

struct OutputSpec {
    std::string dir = "qrec-out";
    std::vector<std::string> formats{"csv", "json", "txt", "plot"};

    bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::Simulate;
    MapSpec map;
    std::string measure = "natural";  // natural | lebesgue | gauss | markov
    TargetSpec target;
    std::optional<Schedule> schedule;
    std::string mode = "auto";  // simulate: auto | metric | symbolic
    std::vector<std::size_t> horizons{10000};
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    std::size_t workers = 0;  // 0: hardware concurrency; never affects results
    EntropySpec entropy;
    CantorSpec cantor;
    GridSpec grid;
    BoundsSpec bounds;
    PrecisionSpec precision;
    OutputSpec output;

    bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Throws ValidationError listing every problem found.
ExperimentConfig config_from_json(const nlohmann::json& j);
std::vector<std::string> validate(const ExperimentConfig& c);

struct ResultSet {
    nlohmann::json config;
    nlohmann::json summary;
    std::vector<std::string> columns;  // long-format per-trial table
    std::vector<std::vector<nlohmann::json>> rows;
    std::string plot_x, plot_y;
    std::vector<std::pair<double, double>> plot;
    std::vector<std::string> table_header;
    std::vector<std::vector<std::string>> table;
    nlohmann::json provenance;  // tool, version, seed, timestamp
};

nlohmann::json to_json(const ResultSet& rs);
ResultSet result_set_from_json(const nlohmann::json& j);

// Parallel trial executor over a fixed worker count (1 = sequential).
TrialExecutor pool_executor(std::size_t workers);

ResultSet run(const ExperimentConfig& config);

// Writes one artifact; returns its path.  format: csv | json | txt | plot.
std::filesystem::path emit_report(const ResultSet& rs, const std::string& format, const std::filesystem::path& dir);
std::string render(const ResultSet& rs, const std::string& format);

}  // namespace qrec
