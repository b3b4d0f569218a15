#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(BRIDGELAB_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("bridgelab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::filesystem::path dir_;
};

}  // namespace

TEST_F(Cli, GamesList) {
  const auto r = cli("games list");
  EXPECT_EQ(r.code, 0);
  for (const char* g : {"synthetic", "tictactoe", "nim", "breakthrough"}) EXPECT_NE(r.out.find(g), std::string::npos);
}

TEST_F(Cli, PredictExample) {
  std::ofstream(path("m.txt")) << "target=r\nfeatures=d,t\ncoef.d=-0.946\ncoef.t=-0.492\nintercept=6.291\n";
  const auto r = cli("predict --model " + path("m.txt") + " --d 100 --t 0.001");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ln(r)=5.333"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("207"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("bench --game tictactoe --no-such-flag").code, 1);
  EXPECT_EQ(cli("bench --game tictactoe --backend carrier-pigeon").code, 1);
}

TEST_F(Cli, EmbeddedWithoutGuestExitsTwo) {
  const auto r = cli("bench --game tictactoe --backend embedded --budget-ms 10 --trials 1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("guest-agent"), std::string::npos) << r.out;
}

TEST_F(Cli, RuntimeErrorsExitTwo) {
  EXPECT_EQ(cli("fit --data " + path("missing.csv")).code, 2);
  EXPECT_EQ(cli("bench --game chess --budget-ms 10 --trials 1").code, 2);
}

TEST_F(Cli, OutputsEmbedTheInvocation) {
  const auto csv = path("b.csv");
  const auto r = cli("bench --game nim{3,4,5} --agent uct --budget-ms 10 --trials 2 --profile --out " + csv);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto text = slurp(csv);
  EXPECT_EQ(text.rfind("# ", 0), 0u);
  EXPECT_NE(text.substr(0, text.find('\n')).find("bench --game nim{3,4,5}"), std::string::npos);

  const auto table = path("scores.txt");
  const auto m = cli("match --game nim{1,2} --p1 minimax --p2 uct:iterations=5 --games 2 --budget-ms 5 --out " + table);
  ASSERT_EQ(m.code, 0) << m.out;
  EXPECT_NE(slurp(table).find("match --game nim{1,2}"), std::string::npos);
  EXPECT_NE(slurp(path("scores.csv")).find("Highest scoring player"), std::string::npos);
}

TEST_F(Cli, SelfcheckPasses) {
  const auto r = cli("selfcheck");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, ServeAndGuestAgree) {
  const int port = 20000 + (::getpid() % 20000);
  const std::string serve_cmd = std::string(BRIDGELAB_CLI) + " serve --port " + std::to_string(port) +
                                " --games tictactoe --iterations 100 --wait-ms 20000 2>&1";
  FILE* serve = ::popen(serve_cmd.c_str(), "r");
  ASSERT_NE(serve, nullptr);
  ::usleep(300000);  // let serve bind before the guest connects
  const auto g = cli("guest --host 127.0.0.1 --port " + std::to_string(port));
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), serve)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(serve);
  EXPECT_EQ(g.code, 0) << g.out;
  EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0) << out;
  EXPECT_EQ(out.find("DIFF"), std::string::npos) << out;
  EXPECT_NE(out.find("same"), std::string::npos) << out;
}

TEST_F(Cli, GuestWithNoHostIsUnreachable) {
  EXPECT_EQ(cli("guest --host 127.0.0.1 --port 1").code, 2);
}
