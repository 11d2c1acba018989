// Copyright 2026 The tailscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct Invocation {
  int status = -1;
  std::string out;
};

Invocation run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + TAILSCOPE_CLI_PATH + " " + args + " 2>&1";
  Invocation r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("tailscope_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::filesystem::path dir_;
};

const char* kBoundary =
    "[model]\nbatch = 1\ndim = 1\n"
    "[schedule]\nvariants = constant\neta_hat = 0.6666666666666666\n";

TEST_F(Cli, TailIndexPrintsCsv) {
  const auto cfg = write("a.ini", std::string(kBoundary) + "[compute]\nseed = 1\n");
  const Invocation r = run("tail-index --config " + cfg);
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("schedule,value,route,alpha,stderr,rho,c_value,censored,runtime_ms\n"
                       "constant,0.6666666666666666,kernel,2"),
            std::string::npos)
      << r.out;
}

TEST_F(Cli, SeedRequiredUnlessGivenOnCommandLine) {
  const auto cfg = write("b.ini", kBoundary);
  const Invocation missing = run("tail-index --config " + cfg);
  EXPECT_EQ(missing.status, 2) << missing.out;
  EXPECT_NE(missing.out.find("seed"), std::string::npos);
  EXPECT_EQ(run("tail-index --config " + cfg + " --seed 5").status, 0);
}

TEST_F(Cli, ParseErrorReportsLine) {
  const auto cfg = write("c.ini", "[model]\nbatch = 1\nbogus = 3\n");
  const Invocation r = run("tail-index --config " + cfg + " --seed 1");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("c.ini:3:"), std::string::npos) << r.out;
}

TEST_F(Cli, RefusalExitCode) {
  const auto cfg = write("d.ini",
                         "[model]\nbatch = 1\ndim = 1\n[schedule]\neta_hat = 50\n"
                         "[compute]\nseed = 1\n");
  const Invocation r = run("tail-index --config " + cfg);
  EXPECT_EQ(r.status, 3) << r.out;
  EXPECT_NE(r.out.find("refused_rho_nonnegative"), std::string::npos);
  EXPECT_EQ(run("tail-index --config " + cfg + " --allow-refusals").status, 0);
}

TEST_F(Cli, SweepWritesFiles) {
  const auto csv = (dir_ / "s.csv").string();
  const auto svg = (dir_ / "s.svg").string();
  const auto cfg = write("e.ini",
                         "[schedule]\nvariants = constant, cyclic\nrange = 0.05\npoints = 4\n"
                         "[sweep]\nparameter = eta_hat\nvalues = 0.4, 0.5\n"
                         "[compute]\nseed = 3\n[output]\ncsv = " + csv + "\nsvg = " + svg + "\n");
  const Invocation r = run("sweep --config " + cfg + " --workers 2");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(csv));
  EXPECT_TRUE(std::filesystem::exists(svg));
}

TEST_F(Cli, UnknownSubcommandIsConfigError) {
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("tail-index").status, 2);
}

TEST_F(Cli, ValidateListsCriteria) {
  const Invocation r = run("validate --list");
  EXPECT_EQ(r.status, 0);
  for (const char* name : {"boundary_calibration", "route_agreement", "determinism"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  }
}

TEST_F(Cli, ValidateRecordsToleranceOverride) {
  const Invocation r = run("validate --criterion 3", "TAILSCOPE_TOL=0.002");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("# tol=0.002 (TAILSCOPE_TOL)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("criterion=3 name=cyclic_markov_collapse status=pass"),
            std::string::npos);
}

}  // namespace
