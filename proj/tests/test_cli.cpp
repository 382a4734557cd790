/*
 * Copyright 2026 The cmpswhe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cmpswhe/bench.hpp"
#include "cmpswhe/cipher.hpp"
#include "cmpswhe/eval.hpp"
#include "test_util.hpp"

using namespace cmpswhe;

namespace {

struct CliResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(CLI_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[512];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) output.append(buf, n);
    int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/cmpswhe_cli_XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~TempDir() {
        int rc = std::system(("rm -rf " + path).c_str());
        (void)rc;
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

}  // namespace

TEST_CASE("keygen is reproducible and validates its input") {
    TempDir dir;
    std::string flags = "keygen --user-key 00112233445566778899aabbccddeeff "
                        "--timestamp 1700000000 -o ";
    CliResult first = run_cli(flags + dir.file("a"));
    CHECK(first.exit_code == 0);
    CliResult second = run_cli(flags + dir.file("b"));
    CHECK(second.exit_code == 0);
    CHECK(slurp(dir.file("a.pub")) == slurp(dir.file("b.pub")));
    CHECK(slurp(dir.file("a.key")) == slurp(dir.file("b.key")));
    CHECK(slurp(dir.file("a.key")).find("timestamp=1700000000") != std::string::npos);

    CliResult bad = run_cli("keygen --user-key nothex -o " + dir.file("c"));
    CHECK(bad.exit_code != 0);
}

TEST_CASE("omitted timestamp is recorded in the private file") {
    TempDir dir;
    CliResult r = run_cli("keygen --user-key ffeeddccbbaa99887766554433221100 -o " +
                          dir.file("k"));
    CHECK(r.exit_code == 0);
    CHECK(slurp(dir.file("k.key")).find("timestamp=") != std::string::npos);
    CHECK(slurp(dir.file("k.pub")).find("timestamp=") == std::string::npos);
}

TEST_CASE("worked-example fixtures evaluate to 146 through the CLI") {
    TempDir dir;
    // Fixture ciphertexts with the pinned noise values, written by the library.
    PrivateKey sk = cmpswhe::testing::worked_example_key();
    cmpswhe::testing::ScriptedRandom rx({Int(10)}, 1);
    cmpswhe::testing::ScriptedRandom ry({Int(7)}, 2);
    {
        std::ofstream xf(dir.file("x.ct")), yf(dir.file("y.ct")), kf(dir.file("toy.key")),
            pf(dir.file("toy.pub"));
        write_ciphertext(xf, encrypt_private(68, sk, rx));
        write_ciphertext(yf, encrypt_private(78, sk, ry));
        write_private_key(kf, sk);
        write_public_key(pf, sk.public_key());
    }
    CliResult ev = run_cli("eval --public-key " + dir.file("toy.pub") +
                           " --expr x+y --bind x=" + dir.file("x.ct") +
                           " --bind y=" + dir.file("y.ct") + " -o " + dir.file("sum.ct"));
    CHECK(ev.exit_code == 0);
    CliResult dec = run_cli("decrypt --key " + dir.file("toy.key") + " --in " +
                            dir.file("sum.ct") + " --round floor");
    CHECK(dec.exit_code == 0);
    CHECK(dec.output.find("146") == 0);

    SUBCASE("unbound variables are named in the error") {
        CliResult bad = run_cli("eval --public-key " + dir.file("toy.pub") +
                                " --expr x+q --bind x=" + dir.file("x.ct") + " -o " +
                                dir.file("no.ct"));
        CHECK(bad.exit_code != 0);
        CHECK(bad.output.find("q") != std::string::npos);
    }
    SUBCASE("capacity overflow reports the required modulus product") {
        CliResult bad = run_cli("eval --public-key " + dir.file("toy.pub") +
                                " --expr x*x*x --bind x=" + dir.file("x.ct") + " -o " +
                                dir.file("no.ct"));
        CHECK(bad.exit_code != 0);
        CHECK(bad.output.find("modulus product") != std::string::npos);
    }
    SUBCASE("a public key cannot decrypt") {
        CliResult bad = run_cli("decrypt --key " + dir.file("toy.pub") + " --in " +
                                dir.file("x.ct"));
        CHECK(bad.exit_code != 0);
        CHECK(bad.output.find("private") != std::string::npos);
    }
}

TEST_CASE("encrypt/decrypt roundtrip through files") {
    TempDir dir;
    REQUIRE(run_cli("keygen --user-key 00112233445566778899aabbccddeeff --timestamp 4 -o " +
                    dir.file("k"))
                .exit_code == 0);
    CHECK(run_cli("encrypt --key " + dir.file("k.key") + " --value 31415 --seed 5 -o " +
                  dir.file("v.ct"))
              .exit_code == 0);
    CliResult dec = run_cli("decrypt --key " + dir.file("k.key") + " --in " + dir.file("v.ct"));
    CHECK(dec.exit_code == 0);
    CHECK(dec.output.find("31415") == 0);

    // server-side public encryption decrypts exactly
    CHECK(run_cli("encrypt --public-key " + dir.file("k.pub") + " --value -250 -o " +
                  dir.file("n.ct"))
              .exit_code == 0);
    CliResult dec2 = run_cli("decrypt --key " + dir.file("k.key") + " --in " + dir.file("n.ct") +
                             " --round floor");
    CHECK(dec2.output.find("-250") == 0);
}

TEST_CASE("bench report emits parseable CSV") {
    TempDir dir;
    CliResult r = run_cli("bench --batches 1,4 --frame 16 --runs 1 --seed 3 -o " +
                          dir.file("bench.csv"));
    CHECK(r.exit_code == 0);
    std::ifstream in(dir.file("bench.csv"));
    bench::BenchReport report = bench::parse_csv(in);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].batch_size == 1);
    CHECK(report.rows[1].batch_size == 4);
    CHECK(report.pixels == 256);
    // per-element cost may not rise as the batch grows (modest tolerance)
    CHECK(report.rows[1].per_element_us <= report.rows[0].per_element_us * 1.5);
}

TEST_CASE("errorlab exits zero with monotone trends") {
    CliResult r = run_cli("errorlab --seed 1");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("overflow") != std::string::npos);
    CHECK(r.output.find("monotone=true") != std::string::npos);
    CHECK(r.output.find("monotone=false") == std::string::npos);
}

TEST_CASE("unknown inputs produce nonzero exits") {
    CHECK(run_cli("decrypt --in /nonexistent.ct").exit_code != 0);
    CHECK(run_cli("demo nosuchpipeline").exit_code != 0);
    CHECK(run_cli("nonsense").exit_code != 0);
}
