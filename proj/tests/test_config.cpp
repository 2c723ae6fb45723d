#include "doctest.h"

#include "pdmp/config.hpp"
#include "pdmp/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdmp;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[experiment]
kind = simulate

[model]
kind = toy
)";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("pdmp_test_" + name);
    fs::remove_all(dir);
    return dir;
}

int line_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
    const auto c = parse_config(kMinimal);
    CHECK(c.kind == ExperimentKind::simulate);
    CHECK(c.model == ModelKind::toy);
    CHECK(c.replicas == 100);
    CHECK(c.toy.alpha == 1.0);
    CHECK(c.toy.rates == "constant");
    CHECK(c.build_model().modes() == 2);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[experiment]\nreplicas = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\nkind = toy\n"), ConfigError);
    CHECK(line_of("[experiment]\nkind = simulate\nflavour = 3\n[model]\nkind = toy\n") == 3);
    CHECK(line_of("[experiment]\nkind = simulate\n[model]\nkind = toy\n[extras]\n") == 5);
    CHECK(line_of("[experiment]\nkind = simulate\nkind = couple\n[model]\nkind = toy\n") == 3);
    CHECK(line_of("[experiment]\nkind = simulate\nreplicas = many\n[model]\nkind = toy\n") == 3);
    CHECK(line_of("[experiment]\nkind = simulate\nhorizon = -1\n[model]\nkind = toy\n") >= 0);
}

TEST_CASE("config round trip") {
    const std::string text = R"(
[experiment]
kind = full-check
replicas = 37
horizon = 12.5
sample_dt = 0.1
master_seed = 18446744073709551557
output_dir = "out/rt"
record_jumps = false

[model]
kind = custom
sampler = inversion

[custom]
field0_matrix = [[-1, 0.5], [0, -2]]
field0_offset = [0.25, 0]
field1_matrix = [[-3, 0], [0, -1]]
field1_offset = [1, 1e-3]
generator = [[-1, 1], [0.3, -0.3]]
alpha = [1, 0.1]

[initial]
x = [0.1, 0.2]
mode = 1
x_tilde = [-0.3, 0.7]
mode_tilde = 0

[distance]
p = 1
q = 1.25
slack = 0.05
moment_bound = 2.5
bootstrap = 50

[grid]
points = 7
t_max = 3.3
)";
    const auto a = parse_config(text);
    CHECK(a.master_seed == 18446744073709551557ULL);
    CHECK(a.custom.matrices.size() == 2);
    CHECK(a.custom.offsets[1](1) == 1e-3);
    const auto once = serialize_config(a);
    const auto b = parse_config(once);
    CHECK(serialize_config(b) == once);
    CHECK(b.replicas == a.replicas);
    CHECK(b.horizon == a.horizon);
    CHECK(b.custom.generator == a.custom.generator);
    CHECK(b.custom.matrices[0] == a.custom.matrices[0]);
    CHECK(b.x0_tilde == a.x0_tilde);
    CHECK(b.q == a.q);
    CHECK(b.grid() == a.grid());
    CHECK(b.record_jumps == false);

    const auto ml = load_config(PDMP_SOURCE_DIR "/configs/morris_lecar.cfg");
    CHECK(serialize_config(parse_config(serialize_config(ml))) == serialize_config(ml));
}

TEST_CASE("format_double") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("single replica writes one replica") {
    auto c = parse_config(kMinimal);
    c.replicas = 1;
    c.horizon = 2.0;
    c.output_dir = scratch("single").string();
    const auto result = run_experiment(c, 2);
    CHECK(result.pass);
    std::istringstream csv(read_file(fs::path(c.output_dir) / "trajectories.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("t,", 0) == 0);
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        CHECK(line.substr(line.rfind(',') + 1) == "0");
    }
    CHECK(rows > 20);
    CHECK(fs::exists(fs::path(c.output_dir) / "manifest.json"));
}

TEST_CASE("outputs do not depend on worker count") {
    auto c = parse_config(kMinimal);
    c.kind = ExperimentKind::full_check;
    c.toy.rates = "state-dependent";
    c.toy.a = Vec::Ones(1);
    c.x0 = Vec::Constant(1, -1.0);
    c.x0_tilde = Vec::Constant(1, 1.0);
    c.replicas = 60;
    c.horizon = 6.0;
    c.bootstrap = 20;
    c.output_dir = scratch("w1").string();
    const auto r1 = run_experiment(c, 1);
    c.output_dir = scratch("w4").string();
    const auto r4 = run_experiment(c, 4);
    REQUIRE(r1.files.size() == r4.files.size());
    for (std::size_t k = 0; k < r1.files.size(); ++k) {
        CHECK(r1.files[k].file == r4.files[k].file);
        if (r1.files[k].file.ends_with(".csv")) CHECK(r1.files[k].sha256 == r4.files[k].sha256);
    }
    CHECK(read_file(fs::temp_directory_path() / "pdmp_test_w1" / "coupled.csv") ==
          read_file(fs::path(c.output_dir) / "coupled.csv"));
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
