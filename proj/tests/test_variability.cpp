#include <doctest.h>

#include <cmath>
#include <vector>

#include "gridtwin/errors.hpp"
#include "gridtwin/variability.hpp"
#include "support.hpp"

using namespace gridtwin;

namespace {

struct Moments {
    double mean = 0.0, sd = 0.0;
};

template <class F>
Moments moments(const std::vector<CellFactors>& v, F get) {
    Moments m;
    for (const auto& f : v) m.mean += get(f);
    m.mean /= static_cast<double>(v.size());
    for (const auto& f : v) m.sd += (get(f) - m.mean) * (get(f) - m.mean);
    m.sd = std::sqrt(m.sd / static_cast<double>(v.size() - 1));
    return m;
}

template <class F, class G>
double correlation(const std::vector<CellFactors>& v, F a, G b) {
    const Moments ma = moments(v, a), mb = moments(v, b);
    double s = 0.0;
    for (const auto& f : v) s += (a(f) - ma.mean) * (b(f) - mb.mean);
    return s / static_cast<double>(v.size() - 1) / (ma.sd * mb.sd);
}

auto cap = [](const CellFactors& f) { return f.capacity; };
auto res = [](const CellFactors& f) { return f.resistance; };
auto dsei = [](const CellFactors& f) { return f.D_sei; };
auto ksei = [](const CellFactors& f) { return f.k_sei; };
auto beta = [](const CellFactors& f) { return f.beta_2; };

} // namespace

TEST_SUITE("variability") {

TEST_CASE("zero spreads give identical copies") {
    VariationSpec s;
    s.sd_capacity = s.sd_resistance = s.sd_degradation = 0.0;
    const auto pop = sample_population(shipped().cell, s, 7);
    for (const CellParams& p : pop) {
        CHECK(p.A_n == shipped().cell.A_n);
        CHECK(p.r_dc_p == shipped().cell.r_dc_p);
        CHECK(p.sei.k_sei_ref == shipped().cell.sei.k_sei_ref);
        CHECK(p.stress.beta_2 == shipped().cell.stress.beta_2);
    }
    CHECK_THROWS_AS(sample_population(shipped().cell, s, 0), DomainError);
}

TEST_CASE("container-sized population statistics") {
    const VariationSpec s;
    const auto f = sample_factors(s, 18900);
    const double se = 1.0 / std::sqrt(18900.0);
    const Moments c = moments(f, cap);
    CHECK(c.sd >= 0.0035);
    CHECK(c.sd <= 0.0045);
    CHECK(std::abs(c.mean - 1.0) < 3.0 * s.sd_capacity * se);
    CHECK(std::abs(moments(f, res).mean - 1.0) < 3.0 * s.sd_resistance * se);
    CHECK(std::abs(moments(f, dsei).mean - 1.0) < 3.0 * s.sd_degradation * se);
    CHECK(std::abs(moments(f, ksei).mean - 1.0) < 3.0 * s.sd_degradation * se);
    CHECK(std::abs(moments(f, beta).mean - 1.0) < 3.0 * s.sd_degradation * se);

    CHECK(std::abs(correlation(f, cap, dsei)) < 0.05);
    CHECK(std::abs(correlation(f, cap, beta)) < 0.05);
    CHECK(std::abs(correlation(f, res, ksei)) < 0.05);
    CHECK(std::abs(correlation(f, dsei, beta)) < 0.05);
    CHECK(correlation(f, dsei, ksei) == doctest::Approx(s.rho).epsilon(0.05));

    for (const CellFactors& x : f) {
        CHECK(std::abs(x.capacity - 1.0) <= 4.0 * s.sd_capacity + 1e-15);
        CHECK(std::abs(x.beta_2 - 1.0) <= 4.0 * s.sd_degradation + 1e-15);
    }
}

TEST_CASE("same seed, same population; channels are separable") {
    VariationSpec s;
    s.seed = 42;
    const auto a = sample_factors(s, 500), b = sample_factors(s, 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].capacity == b[i].capacity);
        CHECK(a[i].k_sei == b[i].k_sei);
    }
    VariationSpec only_degradation = s;
    only_degradation.sd_capacity = 0.0;
    only_degradation.sd_resistance = 0.0;
    const auto c = sample_factors(only_degradation, 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(c[i].capacity == 1.0);
        CHECK(c[i].D_sei == a[i].D_sei);
        CHECK(c[i].beta_2 == a[i].beta_2);
    }
    VariationSpec other = s;
    other.seed = 43;
    CHECK(sample_factors(other, 1)[0].capacity != a[0].capacity);
}

TEST_CASE("factors land on the documented parameters") {
    CellFactors f;
    f.capacity = 1.1;
    f.resistance = 0.9;
    f.D_sei = 1.2;
    f.k_sei = 0.8;
    f.beta_2 = 1.3;
    const CellParams& b = shipped().cell;
    const CellParams p = apply_factors(b, f);
    CHECK(p.A_n == doctest::Approx(1.1 * b.A_n));
    CHECK(p.A_p == doctest::Approx(1.1 * b.A_p));
    CHECK(p.r_dc_n == doctest::Approx(0.9 * b.r_dc_n));
    CHECK(p.sei.D_sei_ref == doctest::Approx(1.2 * b.sei.D_sei_ref));
    CHECK(p.sei.k_sei_ref == doctest::Approx(0.8 * b.sei.k_sei_ref));
    CHECK(p.stress.beta_2 == doctest::Approx(1.3 * b.stress.beta_2));
    CHECK(p.stress.m == b.stress.m);
}

TEST_CASE("invalid specs are rejected") {
    VariationSpec s;
    s.rho = 1.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    VariationSpec t;
    t.sd_capacity = -0.1;
    CHECK_THROWS_AS(t.validate(), ConfigError);
}

} // TEST_SUITE
