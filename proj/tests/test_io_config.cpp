#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "hrrp/config.hpp"
#include "hrrp/io.hpp"
#include "oracles.hpp"

using namespace hrrp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hrrp_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string payload_of(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string s = ss.str();
    return s.substr(s.find("\ndata\n"));
}

}  // namespace

TEST_CASE("sensing dictionary file round trip is exact") {
    const auto blocks = build_dictionary(oracle::small_scenario(), select_pulses(8, 40, 1)).blocks();
    SdOptions o;
    o.max_iterations = 30;
    const auto sd = design_sd(blocks, 0.5, o);
    const fs::path p = scratch("sd.txt");
    write_sensing_dictionary(p, sd);
    const auto back = read_sensing_dictionary(p);
    CHECK((back.w - sd.w).norm() == 0.0);
    CHECK(back.b1 == sd.b1);
    CHECK(back.b2 == sd.b2);
    CHECK(back.gamma == sd.gamma);
    CHECK(back.design_inputs_digest == sd.design_inputs_digest);
    CHECK(back.trace.converged == sd.trace.converged);
    CHECK(back.trace.iterations == sd.trace.iterations);

    const fs::path q = scratch("sd2.txt");
    write_sensing_dictionary(q, design_sd(blocks, 0.5, o));
    CHECK(payload_of(p) == payload_of(q));
}

TEST_CASE("measurement file round trip and length errors") {
    Measurement m;
    m.retained_pulses = {1, 4, 9};
    m.samples = ComplexVector(3);
    m.samples << Complex(1.5, -2.0), Complex(0.1, 1e-17), Complex(-3.0, 0.0);
    m.snr_db = 12.5;
    m.noise_seed = 0xfeedfacecafebeefull;
    std::stringstream ss;
    write_measurement(ss, m);
    const Measurement back = read_measurement(ss);
    CHECK(back.retained_pulses == m.retained_pulses);
    CHECK((back.samples - m.samples).norm() == 0.0);
    CHECK(back.snr_db == 12.5);
    CHECK(back.noise_seed == m.noise_seed);

    std::stringstream noiseless;
    m.snr_db = kNoiseless;
    write_measurement(noiseless, m);
    CHECK(std::isinf(read_measurement(noiseless).snr_db));

    std::string text = noiseless.str();
    text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);  // drop the last sample
    std::stringstream shortened(text);
    try {
        read_measurement(shortened);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("expected 3") != std::string::npos);
        CHECK(std::string(e.what()).find("found 2") != std::string::npos);
    }
    std::stringstream extra(noiseless.str() + "1 2\n");
    CHECK_THROWS_WITH(read_measurement(extra), Catch::Matchers::ContainsSubstring("found 4"));
    std::stringstream bad("hrrp-measurement 2\n");
    CHECK_THROWS_AS(read_measurement(bad), FormatError);
}

TEST_CASE("trials CSV round trip") {
    std::vector<TrialResult> rows(2);
    rows[0].trial = 0;
    rows[0].algorithm = Algorithm::omp_sd;
    rows[0].snr_db = kNoiseless;
    rows[0].success = true;
    rows[0].exact_support = true;
    rows[0].relative_l2_error = 1.0 / 3.0;
    rows[0].correlation_count = 525;
    rows[0].wall_time = 1.2345678901234567e-5;
    rows[0].iterations = 5;
    rows[0].config_digest = 0x0123456789abcdefull;
    rows[1] = rows[0];
    rows[1].trial = 1;
    rows[1].snr_db = -2.5;
    rows[1].stop_reason = StopReason::stagnation;
    const fs::path p = scratch("trials.csv");
    write_trials_csv(p, rows);
    const auto back = read_trials_csv(p);
    REQUIRE(back.size() == 2);
    CHECK(back[0].relative_l2_error == rows[0].relative_l2_error);
    CHECK(back[0].wall_time == rows[0].wall_time);
    CHECK(std::isinf(back[0].snr_db));
    CHECK(back[1].snr_db == -2.5);
    CHECK(back[1].stop_reason == StopReason::stagnation);
    CHECK(back[1].config_digest == rows[1].config_digest);
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    CHECK(first == "#schema,hrrp-trials,1");
}

TEST_CASE("config defaults, comments and overrides") {
    const RunConfig empty = parse_config("{}");
    CHECK(empty.experiment.digest() == ExperimentConfig{}.digest());

    const RunConfig rc = parse_config(R"(
        // comment
        {
          "scenario": {"amplitudes": "unit"},
          "target": {"scatterers": [{"range_m": 0.85, "mechanism": 1}, {"cell": 3}]},
          "pulses": {"count": 20, "scheme": "equispaced"},
          "experiment": {"snr_db": [10, "noiseless"], "trials": 7, "algorithms": ["omp"], "success": "range-cells"},
          "sd": {"gamma": 0.25, "method": "subgradient", "path": "w.txt"},
          "recover": {"algorithm": "a-omp", "epsilon": 0.1}
        })",
                                      "/base");
    const auto& c = rc.experiment;
    CHECK(c.scenario.amplitude(3) == Complex(1.0, 0.0));
    REQUIRE(c.target.fixed.scatterers.size() == 2);
    CHECK(c.target.fixed.scatterers[0].cell == 17);
    CHECK(c.pulse_count == 20);
    CHECK(c.pulse_scheme == PulseScheme::equispaced);
    CHECK(c.snr_db.size() == 2);
    CHECK(std::isinf(c.snr_db[1]));
    CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::omp});
    CHECK(c.success_mode == SuccessMode::range_cells);
    CHECK(c.sd_gamma == 0.25);
    CHECK(c.sd_options.method == SdMethod::subgradient);
    CHECK(*c.sd_path == "/base/w.txt");
    CHECK(rc.recover.algorithm == Algorithm::a_omp);
    CHECK(*rc.recover.epsilon == 0.1);

    const RunConfig again = parse_config(dump_config(rc));
    CHECK(again.experiment.digest() == c.digest());
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"target_length_m": 5.01}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"trials": "many"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"snr_db": ["loud"]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"pulses": {"scheme": "sparse"}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"reference.json", "toy_orthonormal.json", "smoke.json"}) {
        INFO(name);
        CHECK_NOTHROW(load_config(fs::path(HRRP_CONFIG_DIR) / name));
    }
    const auto reference = load_config(fs::path(HRRP_CONFIG_DIR) / "reference.json").experiment;
    ExperimentConfig defaults;
    defaults.snr_db = {5, 10, 15, 20, kNoiseless};
    defaults.target.fixed = reference_target(defaults.scenario);
    defaults.a_omp_mechanism = 2;
    CHECK(reference.digest() == defaults.digest());
}
