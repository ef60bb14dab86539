#include "blockboot/config.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;
    Workspace() {
        std::string tmpl = (fs::temp_directory_path() / "blockboot_cli_XXXXXX").string();
        dir = mkdtemp(tmpl.data());
    }
    ~Workspace() { fs::remove_all(dir); }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return dir / name;
    }
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args, const fs::path& stderr_path) {
    const std::string cmd = std::string(BLOCKBOOT_CLI_PATH) + " " + args + " 2>" + stderr_path.string() + " >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> config_lines(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("# config: ", 0) == 0) out.push_back(line.substr(10));
    return out;
}

const char* kGenerate = "command = generate\nseed = 5\n[generator]\nfamily = garch11\nn = 500\n"
                        "alpha0 = 0.1\nalpha1 = 0.1\nalpha2 = 0.8\n";
const char* kBootstrap = "command = bootstrap\nseed = 6\n[generator]\nfamily = doubling_map\nn = 300\n"
                         "[bootstrap]\nstatistic = gini\nB = 400\n";
const char* kExperiment = "command = experiment\nseed = 7\n[generator]\nfamily = ar1\nphi = 0.5\n"
                          "[bootstrap]\nB = 100\n[experiment]\nn_grid = 32, 64, 128\nM = 100\nR = 8\n";

}  // namespace

TEST_CASE("repeated runs are byte-identical") {
    Workspace ws;
    for (const char* text : {kGenerate, kBootstrap, kExperiment}) {
        const auto cfg = ws.write("run.ini", text);
        const std::string base = "--config " + cfg.string() + " --no-timestamp --out " + (ws.dir / "out.csv").string();
        REQUIRE(run_cli(base, ws.dir / "err") == 0);
        const auto a = slurp(ws.dir / "out.csv");
        REQUIRE(run_cli(base, ws.dir / "err") == 0);
        const auto b = slurp(ws.dir / "out.csv");
        REQUIRE(run_cli(base + " --threads 8", ws.dir / "err") == 0);
        const auto c = slurp(ws.dir / "out.csv");
        CHECK_FALSE(a.empty());
        CHECK(a == b);
        CHECK(a == c);
    }
}

TEST_CASE("seed override changes the output") {
    Workspace ws;
    const auto cfg = ws.write("run.ini", kGenerate);
    const std::string base = "--config " + cfg.string() + " --no-timestamp --out ";
    REQUIRE(run_cli(base + (ws.dir / "a.csv").string(), ws.dir / "err") == 0);
    REQUIRE(run_cli(base + (ws.dir / "b.csv").string() + " --seed 99", ws.dir / "err") == 0);
    CHECK(slurp(ws.dir / "a.csv") != slurp(ws.dir / "b.csv"));
    CHECK(slurp(ws.dir / "b.csv").find("# master_seed=99") != std::string::npos);
}

TEST_CASE("experiment CSV has one row per n and an echo that parses back") {
    Workspace ws;
    const auto cfg = ws.write("run.ini", kExperiment);
    REQUIRE(run_cli("--config " + cfg.string() + " --out " + (ws.dir / "r.csv").string(), ws.dir / "err") == 0);
    const auto csv = slurp(ws.dir / "r.csv");
    std::istringstream in(csv);
    std::vector<std::string> rows;
    bool header = false;
    for (std::string line; std::getline(in, line);) {
        if (line == "process,statistic,n,p,k,B,M,ks_distance,boot_var_mean,target_sigma2,wall_time") header = true;
        else if (header) rows.push_back(line);
    }
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rfind("ar1,mean,32,", 0) == 0);
    CHECK(rows[2].rfind("ar1,mean,128,", 0) == 0);

    std::string echoed;
    for (const auto& line : config_lines(csv)) echoed += line + "\n";
    auto expected = blockboot::parse_config(kExperiment);
    expected.output = (ws.dir / "r.csv").string();
    CHECK(blockboot::parse_config(echoed) == expected);
}

TEST_CASE("exit codes") {
    Workspace ws;
    SUBCASE("short series") {
        const auto cfg = ws.write("run.ini", "command = bootstrap\n[generator]\nfamily = iid_gaussian\nn = 4\n[bootstrap]\np = 8\n");
        CHECK(run_cli("--config " + cfg.string(), ws.dir / "err") == 1);
        CHECK(slurp(ws.dir / "err").find("partition") != std::string::npos);
    }
    SUBCASE("bad config") {
        const auto cfg = ws.write("run.ini", "command = generate\n[generator]\nfamily = ar1\nn = 10\nphi = 1.5\n");
        CHECK(run_cli("--config " + cfg.string(), ws.dir / "err") == 1);
        CHECK(slurp(ws.dir / "err").find("line 5") != std::string::npos);
    }
    SUBCASE("missing --config") { CHECK(run_cli("", ws.dir / "err") == 1); }
    SUBCASE("over budget") {
        const auto cfg = ws.write("run.ini", "command = experiment\n[generator]\nfamily = iid_gaussian\n"
                                             "[experiment]\nn_grid = 4096\nbudget = 1000\n");
        CHECK(run_cli("--config " + cfg.string(), ws.dir / "err") == 2);
        CHECK(slurp(ws.dir / "err").find("capacity") != std::string::npos);
    }
    SUBCASE("version") { CHECK(run_cli("--version", ws.dir / "err") == 0); }
}

TEST_CASE("generate writes one value per line after the header") {
    Workspace ws;
    const auto cfg = ws.write("run.ini", kGenerate);
    REQUIRE(run_cli("--config " + cfg.string() + " --out " + (ws.dir / "g.csv").string(), ws.dir / "err") == 0);
    std::istringstream in(slurp(ws.dir / "g.csv"));
    std::size_t values = 0;
    for (std::string line; std::getline(in, line);) values += !line.empty() && line[0] != '#' && line.find('=') == std::string::npos;
    CHECK(values == 500);
}
