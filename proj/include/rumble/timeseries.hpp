#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rumble/errors.hpp"

namespace rumble {

/// Physical unit carried by a sampled signal.
enum class Unit {
    GroundVelocity, ///< m/s, vertical component
    Volts,
    AdcCode,
    Dimensionless,
};

std::string unit_name(Unit u);

/// Uniformly sampled signal with a sample rate and a unit tag.
struct TimeSeries {
    std::vector<double> samples;
    double sample_rate = 0.0; ///< Hz
    Unit unit = Unit::Dimensionless;

    std::size_t size() const { return samples.size(); }
    double duration() const { return sample_rate > 0 ? samples.size() / sample_rate : 0.0; }

    /// Throws unless sample_rate > 0 and every sample is finite.
    void validate() const;
};

inline std::string unit_name(Unit u) {
    switch (u) {
    case Unit::GroundVelocity: return "ground_velocity_m_per_s";
    case Unit::Volts: return "volts";
    case Unit::AdcCode: return "adc_code";
    case Unit::Dimensionless: return "dimensionless";
    }
    return "unknown";
}

inline void TimeSeries::validate() const {
    if (sample_rate <= 0.0)
        throw ConfigError("TimeSeries sample_rate must be positive");
    for (double v : samples)
        if (!std::isfinite(v))
            throw RangeError("TimeSeries contains non-finite samples");
}

} // namespace rumble
