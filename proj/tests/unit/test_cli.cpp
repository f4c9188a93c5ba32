#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mcmrecon/app.hpp"
#include "mcmrecon/csv_io.hpp"
#include "oracles.hpp"

using namespace mcmrecon;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kGene = oracle::models_dir() + "/gene_expression_set2.rn";

}  // namespace

TEST_CASE("solve reports equation counts") {
    const auto dir = oracle::temp_dir("cli_solve").string();
    const auto r = run({"solve", "--model", kGene, "--method", "mm", "--M", "4", "--t", "10", "--out", dir});
    REQUIRE(r.code == 0);
    const auto line = nlohmann::json::parse(r.out);
    CHECK(line["eq_count"] == 69);
    CHECK(fs::exists(fs::path(dir) / "mm_M4_t10_moments.csv"));
    const auto m = run({"solve", "--model", kGene, "--method", "mcm", "--M", "7", "--t", "10", "--out", dir});
    REQUIRE(m.code == 0);
    CHECK(nlohmann::json::parse(m.out)["M"] == 7);
}

TEST_CASE("user errors exit with 1 and a JSON object") {
    const auto dir = oracle::temp_dir("cli_err").string();
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"reconstruct", "--model", kGene, "--method", "ssa", "--t", "10", "--out", dir},
             {"solve", "--model", kGene, "--method", "mm", "--t", "10", "--out", dir},
             {"solve", "--model", kGene, "--method", "mm", "--M", "1", "--t", "10", "--out", dir},
             {"solve", "--model", kGene, "--method", "cme", "--t", "10", "--param", "k_r", "--out", dir},
             {"solve", "--bogus"},
             {"compare", "--model", kGene, "--t", "10", "--out", dir},
             {"solve", "--model", "/no/such.rn", "--method", "cme", "--t", "1", "--out", dir}}) {
        const auto r = run(args);
        CHECK(r.code == 1);
        const auto e = nlohmann::json::parse(r.err);
        CHECK(e.contains("error"));
        CHECK(e.contains("message"));
    }
    const auto missing = run({"compare", "--model", kGene, "--t", "10", "--out", dir});
    CHECK(missing.err.find("missing oracle run") != std::string::npos);
}

TEST_CASE("numerical failures exit with 2") {
    const auto dir = oracle::temp_dir("cli_num");
    {
        std::ofstream f(dir / "blowup.rn");
        f << "species: A\nreaction: 2A -> 3A @ 1\ninit: (5) 1\n";
    }
    const auto r = run({"solve", "--model", (dir / "blowup.rn").string(), "--method", "mm", "--M", "2", "--t", "50",
                        "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"] == "integration_error");
    CHECK_FALSE(fs::exists(dir / "mm_M2_t50_moments.csv"));
}

TEST_CASE("full pipeline is byte-for-byte deterministic") {
    std::vector<std::map<std::string, std::string>> outputs;
    for (int rep = 0; rep < 2; ++rep) {
        const auto dir = oracle::temp_dir("cli_det" + std::to_string(rep)).string();
        REQUIRE(run({"solve", "--model", kGene, "--method", "cme,mm,mcm", "--M", "4", "--t", "10", "--out", dir}).code == 0);
        REQUIRE(run({"reconstruct", "--model", kGene, "--M", "3", "--t", "10", "--species", "P", "--out", dir,
                     "--emit-plot-data"})
                    .code == 0);
        REQUIRE(run({"compare", "--model", kGene, "--t", "10", "--out", dir}).code == 0);
        REQUIRE(run({"report", "--t", "10", "--out", dir}).code == 0);
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".csv") files[e.path().filename().string()] = read_file(e.path());
        outputs.push_back(files);
    }
    CHECK(outputs[0].size() >= 10);
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0].count("recon_wsMCM_P_M3_t10.csv") == 1);
    CHECK(outputs[0].count("report_t10.csv") == 1);
    const auto& report = outputs[0]["report_t10.csv"];
    CHECK(report.rfind("species,M,mode(0-1),mode(1-0),wsMCM,jMCM,MM\n", 0) == 0);
}

TEST_CASE("output directory defaults from the environment") {
    const auto dir = oracle::temp_dir("cli_env");
    setenv("MCMRECON_OUT", dir.c_str(), 1);
    const auto r = run({"solve", "--model", kGene, "--method", "mcm", "--M", "2", "--t", "1"});
    unsetenv("MCMRECON_OUT");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "mcm_M2_t1_cond.csv"));
}
