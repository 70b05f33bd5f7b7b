#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int status;
    std::string output;  // stdout and stderr
};

Result run(const std::string& args) {
    const std::string cmd = std::string(BBARENA_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("bbarena_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("missing config exits with status 2 and says why") {
    const fs::path dir = scratch_dir("missing");
    const Result r = run("sweep --config " + (dir / "missing.cfg").string() + " --out " +
                         (dir / "out.csv").string());
    CHECK(r.status == 2);
    CHECK(r.output.find("file not found") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out.csv"));
}

TEST_CASE("usage errors exit with status 1") {
    CHECK(run("").status == 1);
    CHECK(run("frobnicate").status == 1);
    CHECK(run("attack --model only").status == 1);
}

TEST_CASE("blobs, train and attack pipeline") {
    const fs::path dir = scratch_dir("pipeline");
    const std::string data = (dir / "blobs.csv").string(), model = (dir / "m.model").string();
    Result r = run("blobs --out " + data + " --d 8 --k 3 --n 300 --separation 0.5 --spread 0.05 --seed 2");
    REQUIRE(r.status == 0);
    r = run("train --data " + data + " --out " + model + " --hidden 16 --epochs 10 --seed 2");
    REQUIRE(r.status == 0);
    CHECK(r.output.find("train accuracy") != std::string::npos);
    const std::string trace = (dir / "trace.jsonl").string();
    r = run("attack --model " + model + " --data " + data +
            " --attack SIGNHUNTER --radius 0.3 --budget 500 --nu 0 --trace " + trace);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("\"success\"") != std::string::npos);
    CHECK(r.output.find("\"queries_used\"") != std::string::npos);
    CHECK(slurp(trace).find("\"final\":true") != std::string::npos);
    r = run("attack --model " + model + " --data " + data + " --attack SIMBA --norm linf");
    CHECK(r.status == 2);
    CHECK(r.output.find("L2") != std::string::npos);
}

TEST_CASE("sweep output is byte-identical across runs") {
    const fs::path dir = scratch_dir("sweep");
    REQUIRE(run("blobs --out " + (dir / "blobs.csv").string() +
                " --d 8 --k 3 --n 300 --separation 0.5 --spread 0.05 --seed 3")
                .status == 0);
    REQUIRE(run("train --data " + (dir / "blobs.csv").string() + " --out " + (dir / "m.model").string() +
                " --hidden 16 --epochs 5 --seed 3")
                .status == 0);
    std::ofstream(dir / "s.cfg") << "[data]\ndataset = blobs.csv\nsample_count = 10\n[model]\npath = m.model\n"
                                    "[defense]\nnu_ratio = 0, 10\n[attack]\nattacks = NES, SQUARE\n"
                                    "norm = linf\nradius = 0.1\nmu = 0.01\neta = 0.01\n"
                                    "[sweep]\nbudget = 200\nseeds = 0, 1\n";
    const std::string cfg = (dir / "s.cfg").string();
    REQUIRE(run("sweep --config " + cfg + " --out " + (dir / "a.csv").string() + " --summary " +
                (dir / "a.txt").string())
                .status == 0);
    REQUIRE(run("sweep --config " + cfg + " --out " + (dir / "b.csv").string()).status == 0);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a.rfind("attack,norm,mu,nu,M,budget,failure_rate,true_failure_rate,mean_q,median_q,clean_acc,"
                  "n_samples,n_seeds\n",
                  0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 5);
    CHECK(slurp(dir / "a.txt").find("nu/mu") != std::string::npos);
    const Result rep = run("report " + (dir / "a.csv").string());
    CHECK(rep.status == 0);
    CHECK(rep.output.find("SQUARE") != std::string::npos);
}

TEST_CASE("theory flip-rate csv") {
    const fs::path dir = scratch_dir("flip");
    const std::string out = (dir / "flip.csv").string();
    const Result r = run("theory flip-rate --affine --d 8,16 --mu 1e-3 --nu 0,1e-3 --trials 2000 --out " + out);
    REQUIRE(r.status == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("mu,nu,d,h,empirical_p,exact_p,bound,trials\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(run("theory flip-rate --d 8").status == 1);
}

TEST_CASE("theory convergence and smoothing commands run") {
    const fs::path dir = scratch_dir("theory");
    Result r = run("theory convergence --d 2 --alpha 0,1 --q 5 --trials 2 --samples 100 --step-rule constant "
                   "--eta 0.01 --out " + (dir / "c.csv").string());
    CHECK(r.status == 0);
    CHECK(slurp(dir / "c.csv").rfind("alpha,trial,step,grad_norm_sq\n", 0) == 0);
    r = run("theory smoothing --d 3 --k 4 --nu 0.1 --points 5 --samples 500");
    CHECK(r.status == 0);
    r = run("theory eot --d 2 --alpha 1 --m 1,2 --q 5 --trials 2 --samples 50 --variance-samples 100 "
            "--step-rule constant --eta 0.01 --offset 0.1 --out " + (dir / "e.csv").string() + " --summary " +
            (dir / "es.csv").string());
    CHECK(r.status == 0);
    const std::string eot = slurp(dir / "e.csv");
    CHECK(eot.rfind("alpha,M,trial,step,grad_norm_sq\n", 0) == 0);
    CHECK(std::count(eot.begin(), eot.end(), '\n') == 1 + 2 * 2 * 6);
    const std::string summary = slurp(dir / "es.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);
    r = run("theory convergence --d 2 --mu 10 --q 5");
    CHECK(r.status == 2);
    CHECK(r.output.find("mu_hat") != std::string::npos);
}
