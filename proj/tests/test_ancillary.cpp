#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gridtwin/ancillary.hpp"
#include "gridtwin/errors.hpp"

using namespace gridtwin;

TEST_SUITE("ancillary") {

TEST_CASE("fan convection coefficient") {
    CHECK(fan_convection(0.0) == doctest::Approx(12.12).epsilon(1e-14));
    CHECK(fan_convection(1.0) == doctest::Approx(22.56).epsilon(1e-14));
    double prev = fan_convection(0.0);
    for (double v = 0.05; v <= 25.0; v += 0.05) {
        const double h = fan_convection(v);
        CHECK(h > prev);
        prev = h;
    }
    CHECK_THROWS_AS(fan_convection(-0.1), DomainError);
}

TEST_CASE("fan power follows the cubic law") {
    FanParams p;
    CHECK(fan_power(0.0, p) == 0.0);
    CHECK(fan_power(4.0, p) == doctest::Approx(8.0 * fan_power(2.0, p)).epsilon(1e-12));
    FanParams capped = p;
    capped.P_nom = 1e-3;
    CHECK(fan_power(20.0, capped) == 1e-3);
    CHECK_THROWS_AS(fan_power(-1.0, p), DomainError);

    // 0.3 m fan moving 65 m^3/min, rated 550 W.
    FanParams ref;
    ref.A_fan = std::numbers::pi * 0.15 * 0.15;
    ref.flow_nom = 65.0 / 60.0;
    const double P = fan_power(ref.v_nom(), ref);
    CHECK(std::abs(P - 550.0) / 550.0 < 0.2);
}

TEST_CASE("cooling per watt falls with air speed") {
    FanParams p;
    double prev = INFINITY;
    for (double v = 0.5; v <= 25.0; v += 0.5) {
        const double ratio = fan_convection(v) * 0.0365 / fan_power(v, p);
        CHECK(ratio < prev);
        prev = ratio;
    }
}

TEST_CASE("fan scaling keeps the air speed") {
    const FanParams one;
    const FanParams many = scale_fan(one, 140.0);
    CHECK(many.v_nom() == doctest::Approx(one.v_nom()).epsilon(1e-14));
    CHECK(many.P_nom == doctest::Approx(140.0 * fan_power(one.v_nom(), one)).epsilon(1e-12));
    CHECK(fan_speed_for_command(1.0, many) == doctest::Approx(many.v_nom()));
    CHECK(fan_speed_for_command(0.0, many) == 0.0);
    CHECK(fan_power(fan_speed_for_command(0.5, many), many) == doctest::Approx(0.5 * many.P_nom).epsilon(1e-12));
}

TEST_CASE("air conditioning power") {
    const AcParams ac;
    const FanParams fan = scale_fan(FanParams{}, 1000.0);
    Environment chiller{298.15, AcMode::chiller};
    Environment direct{288.15, AcMode::direct_air};
    CHECK(ac_power(0.0, 300.0, 290.0, chiller, ac, fan).electrical == 0.0);
    CHECK(ac_power(3000.0, 300.0, 290.0, chiller, ac, fan).electrical == doctest::Approx(1000.0));
    // Halving the temperature lift doubles mass flow, so fan power rises eightfold.
    const double wide = ac_power(200.0, 310.0, 290.0, direct, ac, fan).electrical;
    const double narrow = ac_power(200.0, 300.0, 290.0, direct, ac, fan).electrical;
    CHECK(narrow == doctest::Approx(8.0 * wide).epsilon(1e-12));
    const AcPower none = ac_power(100.0, 290.0, 295.0, direct, ac, fan);
    CHECK_FALSE(none.capable);
    CHECK_THROWS_AS(ac_power(-1.0, 300.0, 290.0, direct, ac, fan), DomainError);
}

TEST_CASE("converter losses") {
    ConverterParams p;
    p.V_sc = 1.0;
    p.f_sw = 1e4;
    p.E_on = 1e-3;
    p.E_off = 2e-3;
    p.V_bus = 200.0;
    p.D2 = 0.0;
    p.rating = 1e5;
    const ConverterLosses idle = converter_losses(0.0, 100.0, 0.0, p);
    CHECK(idle.total() == 0.0);
    const ConverterLosses l = converter_losses(100.0, 100.0, 1e4, p);
    CHECK(l.conduction == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(l.switching == doctest::Approx(2.0 * 1e4 * 3e-3).epsilon(1e-14));
    CHECK(l.passive == 0.0);
    p.R_dcdc = 1e-3;
    const ConverterLosses r = converter_losses(-100.0, 100.0, -1e4, p);
    CHECK(r.passive == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(r.conduction >= 0.0);
    CHECK_THROWS_AS(converter_losses(2000.0, 100.0, 2e5, p), RatingExceeded);
}

TEST_CASE("converter rescaling is linear in power") {
    const ConverterReference ref;
    const ConverterParams full = scale_converter(ref, ref.rating_ref, ref.V_bus_ref);
    const ConverterParams half = scale_converter(ref, 0.5 * ref.rating_ref, ref.V_bus_ref);
    CHECK(half.E_on == doctest::Approx(0.5 * full.E_on));
    CHECK(half.R_dcdc == doctest::Approx(2.0 * full.R_dcdc));
    // Same per-unit loss at the same per-unit operating point.
    const ConverterLosses a = converter_losses(500.0, 800.0, 4e5, full);
    const ConverterLosses b = converter_losses(250.0, 800.0, 2e5, half);
    CHECK(b.total() == doctest::Approx(0.5 * a.total()).epsilon(1e-12));
}

} // TEST_SUITE
