#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "arband/bands.hpp"
#include "arband/io.hpp"

using nlohmann::json;

namespace {

struct cli_result {
    int exit_code = -1;
    std::string out;
};

cli_result run_cli(const std::string& args) {
    const std::string cmd = std::string(ARBAND_CLI_PATH) + " " + args + " 2>/dev/null";
    cli_result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string temp_path(const std::string& name) {
    return std::string("cli_test_") + name;
}

}  // namespace

TEST_CASE("read_series_csv") {
    const std::string path = temp_path("series.csv");
    {
        std::ofstream f(path);
        f << "1.0\n2.0\n3.0\n";
    }
    const auto s = arband::read_series_csv(path);
    REQUIRE(s.n() == 3);
    CHECK(s.values[0] == 1.0);
    CHECK(s.values[2] == 3.0);

    {
        std::ofstream f(path);
        f << "value\n0.5\n";
    }
    const auto h = arband::read_series_csv(path);
    REQUIRE(h.n() == 1);
    CHECK(h.values[0] == 0.5);

    {
        std::ofstream f(path);
        f << "1.0\n2.0\nabc\n";
    }
    try {
        arband::read_series_csv(path);
        FAIL("expected parse_error");
    } catch (const arband::parse_error& e) {
        CHECK(e.line == 3);
    }

    {
        std::ofstream f(path);
        f << "1.0\nnan\n";
    }
    CHECK_THROWS_AS(arband::read_series_csv(path), arband::parse_error);

    {
        std::ofstream f(path);
        f << "value\n";
    }
    CHECK_THROWS_AS(arband::read_series_csv(path), arband::empty_series);
    CHECK_THROWS_AS(arband::read_series_csv("does_not_exist.csv"), arband::io_error);

    // --center equivalent
    {
        std::ofstream f(path);
        f << "1.0\n2.0\n3.0\n";
    }
    const auto centered = arband::read_series_csv(path, true);
    CHECK(centered.values[0] == Approx(-1.0));
    CHECK(centered.values[1] == Approx(0.0));
    std::remove(path.c_str());
}

TEST_CASE("simulate subcommand is deterministic") {
    const std::string out1 = temp_path("s1.csv"), out2 = temp_path("s2.csv");
    const std::string flags =
        "simulate --order 1 --theta 0.5 --sigma2 1 --n 100 --seed 7 --out ";
    CHECK(run_cli(flags + out1).exit_code == 0);
    CHECK(run_cli(flags + out2).exit_code == 0);
    const std::string a = slurp(out1), b = slurp(out2);
    CHECK(!a.empty());
    CHECK(a == b);
    const auto series = arband::read_series_csv(out1);
    CHECK(series.n() == 100);
    std::remove(out1.c_str());
    std::remove(out2.c_str());
}

TEST_CASE("select on a long AR(0) series reports small orders") {
    const std::string data = temp_path("ar0.csv");
    REQUIRE(run_cli("simulate --n 4000 --sigma2 1 --seed 11 --out " + data).exit_code == 0);

    const auto plain = run_cli("select --input " + data + " --dn 12 --threshold 3.0");
    CHECK(plain.exit_code == 0);

    const auto js = run_cli("--json select --input " + data + " --dn 12 --threshold 3.0");
    REQUIRE(js.exit_code == 0);
    const json parsed = json::parse(js.out);
    CHECK(parsed.at("threshold") == 3.0);
    REQUIRE(parsed.at("selections").is_array());
    CHECK(parsed.at("selections").size() >= 10);
    for (const auto& sel : parsed.at("selections")) {
        INFO(sel.at("name").get<std::string>());
        CHECK(sel.at("chosen").get<int>() <= 2);
        // every chosen order printed by the human format appears in the JSON
        const std::string needle = sel.at("name").get<std::string>() + ": " +
                                   std::to_string(sel.at("chosen").get<int>());
        CHECK(plain.out.find(needle) != std::string::npos);
    }
    std::remove(data.c_str());
}

TEST_CASE("bands and test-order subcommands") {
    const std::string data = temp_path("ar2.csv");
    REQUIRE(run_cli("simulate --theta 0.5,-0.25 --sigma2 1 --n 2000 --seed 3 --out " + data)
                .exit_code == 0);

    const auto bands = run_cli("--json bands --input " + data + " --dn 12 --level 0.95");
    REQUIRE(bands.exit_code == 0);
    const json jb = json::parse(bands.out);
    CHECK(jb.at("mode") == "iid_exact");
    CHECK(jb.at("threshold").get<double>() > 2.5);
    CHECK(jb.at("center").size() == 12);
    CHECK(jb.at("half_width").size() == 12);

    const auto tst = run_cli("--json test-order --input " + data + " --q0 2 --dn 12");
    REQUIRE(tst.exit_code == 0);
    const json jt = json::parse(tst.out);
    CHECK(jt.at("q0") == 2);
    CHECK_FALSE(jt.at("reject").get<bool>());  // true order is 2

    const auto tst1 = run_cli("--json test-order --input " + data + " --q0 0 --dn 12");
    REQUIRE(tst1.exit_code == 0);
    CHECK(json::parse(tst1.out).at("reject").get<bool>());  // theta_1 = 0.5 is highly visible

    // the b_n variant shifts the statistic but not the studentized max
    const auto t_lp =
        run_cli("--json test-order --input " + data + " --q0 2 --dn 12 --bn-variant log-pi");
    const auto t_4p =
        run_cli("--json test-order --input " + data + " --q0 2 --dn 12 --bn-variant 4pi-4");
    REQUIRE(t_lp.exit_code == 0);
    REQUIRE(t_4p.exit_code == 0);
    const double s_lp = json::parse(t_lp.out).at("statistic").get<double>();
    const double s_4p = json::parse(t_4p.out).at("statistic").get<double>();
    CHECK(s_lp < s_4p);  // larger centering constant lowers the z-scale statistic
    const arband::gumbel_constants c_lp = arband::norm_constants(12, arband::bn_variant::log_pi);
    const arband::gumbel_constants c_4p = arband::norm_constants(12);
    CHECK(c_lp.a_n * s_lp + c_lp.b_n == Approx(c_4p.a_n * s_4p + c_4p.b_n).epsilon(1e-9));

    std::remove(data.c_str());
}

TEST_CASE("exit codes") {
    // usage error
    CHECK(run_cli("select --dn 12").exit_code == 1);
    CHECK(run_cli("no-such-command").exit_code == 1);
    // data error: missing file
    CHECK(run_cli("fit --input missing.csv --dn 5").exit_code == 2);
    // data error: unparseable line
    const std::string bad = temp_path("bad.csv");
    {
        std::ofstream f(bad);
        f << "1.0\n2.0\nabc\n";
    }
    CHECK(run_cli("fit --input " + bad + " --dn 2").exit_code == 2);
    std::remove(bad.c_str());
    // numerical error: non-causal model
    CHECK(run_cli("simulate --theta 1.0 --n 10 --out /dev/null").exit_code == 3);
    // data error: d_n >= n
    const std::string tiny = temp_path("tiny.csv");
    {
        std::ofstream f(tiny);
        f << "1.0\n-1.0\n0.5\n";
    }
    CHECK(run_cli("fit --input " + tiny + " --dn 3").exit_code == 2);
    std::remove(tiny.c_str());
}

TEST_CASE("experiment subcommand") {
    const std::string cfg_path = temp_path("cfg.json");
    {
        std::ofstream f(cfg_path);
        f << R"({
            "model": {"coeffs": [0.5], "sigma2": 1.0},
            "n": [125],
            "dn": {"rule": "fixed", "value": 8},
            "repetitions": 12,
            "master_seed": 5,
            "estimators": ["aic", "bic"]
        })";
    }
    const std::string out1 = temp_path("t1.csv"), out2 = temp_path("t2.csv");
    REQUIRE(run_cli("experiment --config " + cfg_path + " --workers 1 --out " + out1).exit_code ==
            0);
    REQUIRE(run_cli("experiment --config " + cfg_path + " --workers 2 --out " + out2).exit_code ==
            0);
    const std::string csv1 = slurp(out1);
    CHECK(csv1 == slurp(out2));  // workers must not change results
    CHECK(csv1.rfind("n,dn,bucket,aic,bic\n", 0) == 0);

    // the ARBAND_WORKERS environment variable must not change results either
    const std::string out_env = temp_path("t_env.csv");
    {
        const std::string cmd = "ARBAND_WORKERS=3 " + std::string(ARBAND_CLI_PATH) +
                                " experiment --config " + cfg_path + " --out " + out_env +
                                " 2>/dev/null";
        REQUIRE(std::system(cmd.c_str()) == 0);
    }
    CHECK(slurp(out_env) == csv1);
    std::remove(out_env.c_str());

    // reps override shows up in the JSON report
    const std::string outj = temp_path("t.json");
    REQUIRE(run_cli("experiment --config " + cfg_path + " --reps 3 --out " + outj).exit_code == 0);
    const json jr = json::parse(slurp(outj));
    CHECK(jr.at("config").at("repetitions") == 3);
    CHECK(jr.at("version").is_string());
    CHECK(jr.at("config_hash").is_string());
    std::uint64_t total = 0;
    for (const auto& cell : jr.at("cells"))
        if (cell.at("estimator") == "aic")
            for (const auto& c : cell.at("counts")) total += c.get<std::uint64_t>();
    CHECK(total == 3);

    // bad config -> data error
    const std::string bad_cfg = temp_path("bad_cfg.json");
    {
        std::ofstream f(bad_cfg);
        f << R"({"model": {"coeffs": [2.0]}, "n": [125], "dn": {"rule": "fixed", "value": 8}})";
    }
    CHECK(run_cli("experiment --config " + bad_cfg).exit_code == 2);

    for (const auto& p : {cfg_path, out1, out2, outj, bad_cfg}) std::remove(p.c_str());
}
