#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrnp/dataset.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lrnp_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Result run(const std::string& args, const std::string& env = "") const {
    const auto out = path("stdout.txt");
    const std::string cmd =
        env + " " + LRNP_CLI_PATH + " " + args + " > " + out + " 2> " + path("stderr.txt");
    const int raw = std::system(cmd.c_str());
    Result r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream is(out);
    std::stringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateTrainPredictEval) {
  ASSERT_EQ(run("gen-data --d 8 --k 3 --r 2 --n 200 --seed 4 --out " + path("train.csv")).status,
            0);
  const auto data = lrnp::load_dataset(fs::path(path("train.csv")));
  EXPECT_EQ(data.size(), 200u);
  EXPECT_EQ(data.num_labels(), 3);

  ASSERT_EQ(
      run("train --data " + path("train.csv") + " --learner tree --model " + path("m.txt")).status,
      0);
  const auto pred = run("predict --model " + path("m.txt") + " --data " + path("train.csv"));
  ASSERT_EQ(pred.status, 0);
  EXPECT_EQ(pred.out.substr(0, pred.out.find('\n')), "rank_1,rank_2,rank_3");

  const auto ev = run("eval --model " + path("m.txt") + " --data " + path("train.csv"));
  ASSERT_EQ(ev.status, 0);
  EXPECT_NE(ev.out.find("n,mean_kt\n200,1"), std::string::npos) << ev.out;
}

TEST_F(Cli, SeedFromEnvironmentAndFlag) {
  const auto a = run("gen-data --d 5 --k 3 --r 2 --n 20", "LRNP_SEED=7");
  const auto b = run("gen-data --d 5 --k 3 --r 2 --n 20 --seed 7");
  const auto c = run("gen-data --d 5 --k 3 --r 2 --n 20 --seed 8");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(run("gen-data --n 5", "LRNP_SEED=abc").status, 2);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  write("gen.cfg",
        "# generator settings\nd = 6\nk=4\nr=2\nn=30\nlabels=incomplete\nsurvival=0.5\n");
  const auto r = run("gen-data --config " + path("gen.cfg") + " --n 10 --seed 1");
  ASSERT_EQ(r.status, 0);
  std::istringstream is(r.out);
  const auto data = lrnp::load_dataset(is);
  EXPECT_EQ(data.size(), 10u);
  EXPECT_EQ(data.num_labels(), 4);
  EXPECT_EQ(data.dimension(), 6u);

  write("bad.cfg", "d 6\n");
  EXPECT_EQ(run("gen-data --config " + path("bad.cfg")).status, 2);
}

TEST_F(Cli, CrossValidationAndIncompleteData) {
  ASSERT_EQ(run("gen-data --d 8 --k 3 --r 2 --n 100 --labels incomplete --survival 0.7 --out " +
                path("inc.csv"))
                .status,
            0);
  const auto cv = run("cv --data " + path("inc.csv") + " --repetitions 2 --folds 5");
  ASSERT_EQ(cv.status, 0);
  EXPECT_EQ(cv.out.rfind("repetition,fold,n_train,n_test,mean_kt\n", 0), 0u);
  // The labelwise method needs complete rankings.
  EXPECT_EQ(run("train --data " + path("inc.csv") + " --method labelwise").status, 2);
}

TEST_F(Cli, ValidationErrorsExitWithTwo) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("train").status, 2);
  EXPECT_EQ(run("train --data " + path("missing.csv")).status, 2);
  EXPECT_EQ(run("gen-data --noise loud").status, 2);
  EXPECT_EQ(run("gen-data --r 40 --d 10").status, 2);
  write("bad.csv", "f1,rank_1,rank_2\n0,1,1\n");
  EXPECT_EQ(run("train --data " + path("bad.csv")).status, 2);
  write("model.txt", "garbage\n");
  write("x.csv", "f1\n0\n");
  EXPECT_EQ(run("predict --model " + path("model.txt") + " --data " + path("x.csv")).status, 2);
}

TEST_F(Cli, Sweeps) {
  const auto ns =
      run("noise-sweep --d 8 --k 3 --r 2 --n-train 200 --n-test 50 --trees 5 --stddevs 0,0.1");
  ASSERT_EQ(ns.status, 0);
  EXPECT_EQ(ns.out.rfind("noise,alpha,beta,learner,kt,kt_over_beta\n", 0), 0u) << ns.out;
  const auto ms = run("mallows-sweep --d 8 --k 4 --r 2 --n-train 200 --n-test 50 --thetas 3");
  ASSERT_EQ(ms.status, 0);
  EXPECT_NE(ms.out.find("theta"), std::string::npos);
}

TEST_F(Cli, Selftest) {
  const auto r = run("selftest");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
