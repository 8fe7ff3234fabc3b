#include <doctest.h>

#include <stdexcept>

#include "irsmec/config.hpp"

using namespace irsmec;

TEST_CASE("config parse, resolve and hash roundtrip") {
    RunConfig cfg = parse_config_text("m_antennas = 4\nn_users=3\n# comment\n\nk_irs=8\n");
    CHECK(cfg.sys.m_antennas == 4);
    CHECK(cfg.sys.n_users == 3);
    CHECK(cfg.sys.k_irs == 8);

    // Canonical text reparses to the same hash.
    const std::string text = resolved_config_text(cfg);
    RunConfig cfg2 = parse_config_text(text);
    CHECK(config_hash(cfg) == config_hash(cfg2));
    CHECK(resolved_config_text(cfg2) == text);
}

TEST_CASE("config errors carry line numbers") {
    try {
        parse_config_text("m_antennas=4\nnot a line\n");
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    try {
        parse_config_text("\n\nbogus_key=1\n");
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
}

TEST_CASE("system config invariants are enforced") {
    RunConfig cfg;
    cfg.sys.n_users = 8;  // order enumeration bound
    CHECK_THROWS_AS(cfg.sys.validate(), std::invalid_argument);
    cfg.sys.n_users = 3;
    cfg.sys.gu_ring_radii = {5.0, 2.0};
    CHECK_THROWS_AS(cfg.sys.validate(), std::invalid_argument);
    cfg.sys.gu_ring_radii = {2.0, 5.0};
    cfg.sys.task_bits_range = {1600.0, 400.0};
    CHECK_THROWS_AS(cfg.sys.validate(), std::invalid_argument);
    cfg.sys.task_bits_range = {400.0, 1600.0};
    CHECK_NOTHROW(cfg.sys.validate());
}

TEST_CASE("antenna separation defaults to half a wavelength") {
    SystemConfig sys;
    sys.carrier_freq = 2.4e9;
    sys.antenna_sep = 0.0;
    CHECK(sys.antenna_sep_m() == doctest::Approx(299792458.0 / 2.4e9 / 2.0).epsilon(1e-12));
    sys.antenna_sep = 0.03;
    CHECK(sys.antenna_sep_m() == 0.03);
}

TEST_CASE("action dimension bookkeeping") {
    SystemConfig sys;
    sys.m_antennas = 4;
    sys.n_users = 3;
    sys.k_irs = 8;
    CHECK(sys.cont_action_dim(false) == 3 * 3 + 8 + 2 * 4 * 3);
    CHECK(sys.cont_action_dim(true) == 3 * 3 + 8 + 2 * 4 * 3 + 3);
}
