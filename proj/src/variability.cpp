#include "gridtwin/variability.hpp"

#include <cmath>
#include <random>

#include "gridtwin/errors.hpp"

namespace gridtwin {

namespace {

constexpr double truncation = 4.0;

enum Channel : std::uint32_t { capacity = 1, resistance = 2, sei_pair = 3, crack = 4 };

std::mt19937_64 stream(std::uint64_t seed, Channel channel) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(channel)};
    return std::mt19937_64(seq);
}

double truncated_normal(std::mt19937_64& rng, std::normal_distribution<double>& dist) {
    for (;;) {
        double z = dist(rng);
        if (std::abs(z) <= truncation) return z;
    }
}

} // namespace

void VariationSpec::validate() const {
    if (sd_capacity < 0.0 || sd_resistance < 0.0 || sd_degradation < 0.0)
        throw ConfigError("variation standard deviations must be non-negative");
    if (rho < -1.0 || rho > 1.0) throw ConfigError("variation correlation must lie in [-1, 1]");
    if (truncation * std::max({sd_capacity, sd_resistance, sd_degradation}) >= 1.0)
        throw ConfigError("variation standard deviations must stay below 25 %");
}

std::vector<CellFactors> sample_factors(const VariationSpec& spec, std::size_t n) {
    spec.validate();
    std::vector<CellFactors> out(n);
    std::normal_distribution<double> dist(0.0, 1.0);

    auto cap = stream(spec.seed, capacity);
    for (auto& f : out) f.capacity = 1.0 + spec.sd_capacity * truncated_normal(cap, dist);

    auto res = stream(spec.seed, resistance);
    for (auto& f : out) f.resistance = 1.0 + spec.sd_resistance * truncated_normal(res, dist);

    auto pair = stream(spec.seed, sei_pair);
    const double mix = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
    for (auto& f : out) {
        for (;;) {
            const double z1 = dist(pair);
            const double z2 = dist(pair);
            const double a = z1;
            const double b = spec.rho * z1 + mix * z2;
            if (std::abs(a) > truncation || std::abs(b) > truncation) continue;
            f.D_sei = 1.0 + spec.sd_degradation * a;
            f.k_sei = 1.0 + spec.sd_degradation * b;
            break;
        }
    }

    auto beta = stream(spec.seed, crack);
    for (auto& f : out) f.beta_2 = 1.0 + spec.sd_degradation * truncated_normal(beta, dist);
    return out;
}

CellParams apply_factors(const CellParams& base, const CellFactors& f) {
    CellParams p = base;
    p.A_n *= f.capacity;
    p.A_p *= f.capacity;
    p.r_dc_n *= f.resistance;
    p.r_dc_p *= f.resistance;
    p.sei.D_sei_ref *= f.D_sei;
    p.sei.k_sei_ref *= f.k_sei;
    p.stress.beta_2 *= f.beta_2;
    return p;
}

std::vector<CellParams> sample_population(const CellParams& base, const VariationSpec& spec, std::size_t n) {
    if (n == 0) throw DomainError("population needs at least one cell");
    const auto factors = sample_factors(spec, n);
    std::vector<CellParams> out;
    out.reserve(n);
    for (const auto& f : factors) out.push_back(apply_factors(base, f));
    return out;
}

} // namespace gridtwin
