#pragma once

#include "qrec/maps.hpp"
#include "qrec/measures.hpp"

#include <cstdint>
#include <vector>

namespace qrec {

enum class Engine {
    Auto,      // symbolic for linear maps, float otherwise
    Symbolic,  // digits drawn from the chain, positions by backward contraction
    Float,     // direct double-precision iteration
};

std::string to_string(Engine e);
Engine resolve_engine(const MapModel& map, Engine e);

struct OrbitOptions {
    Engine engine = Engine::Auto;
    // Uniform noise of this half-width added after each float step; 0 disables.
    // Negative selects the default (1e-13 for Blaschke products and D-ary float
    // orbits, 0 otherwise).
    double dither = -1.0;
    std::size_t max_resample = 1000;
    bool need_positions = true;
};

struct Orbit {
    Word digits;            // i_0 .. i_{n + lookahead}
    std::vector<double> x;  // x_0 .. x_n (empty if positions were not requested)
    std::size_t resampled = 0;
};

// A pseudo-orbit of length n started from a point distributed by `start`.
Orbit sample_orbit(const MapModel& map, const InvariantMeasure& start, std::size_t n, std::size_t lookahead,
                   std::uint64_t seed, const OrbitOptions& opts = {});

}  // namespace qrec
