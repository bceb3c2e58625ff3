#pragma once

namespace gridtwin {

inline constexpr double faraday = 96485.33212;        // C/mol
inline constexpr double gas_constant = 8.314462618;   // J/(mol K)
inline constexpr double electrons_per_reaction = 1.0; // n
inline constexpr double zero_celsius = 273.15;

inline constexpr double celsius_to_kelvin(double c) { return c + zero_celsius; }
inline constexpr double kelvin_to_celsius(double k) { return k - zero_celsius; }

enum class Electrode { negative = 0, positive = 1 };

inline const char* electrode_name(Electrode e) {
    return e == Electrode::negative ? "anode" : "cathode";
}

} // namespace gridtwin
