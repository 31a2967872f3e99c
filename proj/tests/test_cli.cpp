#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "k3arith/cli.hpp"

using namespace k3arith;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), in, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, ModelPipedIntoNewton) {
  const auto model = call({"crystal", "k3-model", "--h", "3", "--p", "5", "--json"});
  ASSERT_EQ(model.code, 0) << model.err;
  const auto newton = call({"crystal", "newton"}, model.out);
  ASSERT_EQ(newton.code, 0) << newton.err;
  EXPECT_EQ(newton.out.substr(0, newton.out.find('\n')), "{2/3:3, 1:16, 4/3:3}");
  const auto nj = json::parse(call({"crystal", "newton", "--json"}, model.out).out);
  EXPECT_EQ(nj["slopes"][0], (json{{"num", 2}, {"den", 3}, {"mult", 3}}));
  EXPECT_EQ(nj["vertices"].back(), json::array({22, "22"}));
}

TEST(Cli, EmbedReport) {
  const auto r = call({"lattice", "embed", "--d", "1", "--p", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("det 7"), std::string::npos);
  EXPECT_NE(r.out.find("signature (20,2)"), std::string::npos);
  EXPECT_NE(r.out.find("primitive=true"), std::string::npos);
  const auto j = json::parse(call({"lattice", "embed", "--d", "1", "--p", "2", "--json"}).out);
  EXPECT_EQ(j["det"], 7);
  EXPECT_EQ(j["signature"], json::array({20, 2}));
  EXPECT_EQ(j["primitive"], true);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(call({"frobnicate"}).code, 64);
  EXPECT_EQ(call({}).code, 64);
  EXPECT_EQ(call({"lattice"}).code, 64);
  EXPECT_EQ(call({"lattice", "embed", "--d", "1"}).code, 64);
  EXPECT_EQ(call({"lattice", "embed", "--d", "0", "--p", "2"}).code, 2);
  EXPECT_EQ(call({"lattice", "embed", "--d", "1", "--p", "4"}).code, 2);
  EXPECT_EQ(call({"crystal", "newton"}, "not json").code, 2);
  EXPECT_EQ(call({"crystal", "newton"}, "").code, 2);
  const auto coarse = call({"crystal", "k3-model", "--h", "3", "--p", "5", "--precision", "1", "--json"});
  ASSERT_EQ(coarse.code, 0);
  EXPECT_EQ(call({"crystal", "newton"}, coarse.out).code, 3);
  EXPECT_EQ(call({"fgl", "height"},
                 call({"fgl", "build", "--p", "5", "--law", "multiplicative", "--trunc", "5", "--json"}).out)
                .code,
            2);
  EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Cli, LatticeRoundTrips) {
  const auto k3 = call({"lattice", "build", "--name", "K3", "--json"});
  const auto disc = json::parse(call({"lattice", "disc", "--json"}, k3.out).out);
  EXPECT_EQ(disc["det"], -1);
  EXPECT_TRUE(disc["discriminant_group"].empty());
  const auto sig = json::parse(call({"lattice", "signature", "--json"}, k3.out).out);
  EXPECT_EQ(sig["positive"], 19);
  EXPECT_EQ(sig["negative"], 3);
  const auto embed = call({"lattice", "embed", "--d", "2", "--p", "3", "--json"});
  const auto comp = call({"lattice", "complement", "--json"}, embed.out);
  ASSERT_EQ(comp.code, 0) << comp.err;
  const auto cj = json::parse(comp.out);
  EXPECT_EQ(cj["lattice"]["rank"], 1);
  const auto back = json::parse(call({"lattice", "complement", "--json"}, comp.out).out);
  // the embedding is primitive, so the double complement has the same determinant
  const auto det_back = json::parse(call({"lattice", "disc", "--json"}, back["lattice"].dump()).out);
  const auto det_orig =
      json::parse(call({"lattice", "disc", "--json"}, json::parse(embed.out)["lattice"].dump()).out);
  EXPECT_EQ(det_back["det"], det_orig["det"]);
  EXPECT_EQ(back["lattice"]["rank"], 21);
  EXPECT_EQ(call({"lattice", "signature", "--json"}, embed.out).code, 0);
}

TEST(Cli, CrystalConsumers) {
  const auto naive = call({"crystal", "k3-model", "--h", "2", "--p", "3", "--naive", "--json"});
  const auto verdict = json::parse(call({"crystal", "k3-check", "--json"}, naive.out).out);
  EXPECT_EQ(verdict["verdict"], "not-k3");
  const auto model = call({"crystal", "k3-model", "--h", "2", "--p", "3", "--json"});
  const auto ok = json::parse(call({"crystal", "k3-check", "--json"}, model.out).out);
  EXPECT_EQ(ok["verdict"], "finite-height");
  EXPECT_EQ(ok["height"], 2);
  EXPECT_EQ(json::parse(call({"crystal", "katz", "--json"}, model.out).out)["passed"], true);
  const auto dec = call({"crystal", "decompose", "--json"}, model.out);
  ASSERT_EQ(dec.code, 0) << dec.err;
  const auto dj = json::parse(dec.out);
  const auto sub_newton = json::parse(call({"crystal", "newton", "--json"}, dj["sub"].dump()).out);
  EXPECT_EQ(sub_newton["slopes"], json::array({json{{"num", 1}, {"den", 2}, {"mult", 2}}}));
  const auto ss = call({"crystal", "k3-model", "--supersingular", "--p", "2", "--json"});
  EXPECT_EQ(json::parse(call({"crystal", "k3-check", "--json"}, ss.out).out)["verdict"], "supersingular");
}

TEST(Cli, FormalGroups) {
  const auto law = call({"fgl", "build", "--p", "2", "--law", "multiplicative", "--trunc", "6", "--json"});
  ASSERT_EQ(law.code, 0);
  const auto lj = json::parse(law.out);
  EXPECT_EQ(lj["F"], (json{{"0,1", "1"}, {"1,0", "1"}, {"1,1", "1"}}));
  const auto ps = json::parse(call({"fgl", "p-series", "--json"}, law.out).out);
  EXPECT_EQ(ps["phi"], (json{{"1", "2"}, {"2", "1"}}));
  EXPECT_EQ(json::parse(call({"fgl", "height", "--json"}, law.out).out)["height"], 1);
  const auto honda = call({"fgl", "build", "--p", "3", "--h", "2", "--trunc", "82", "--json"});
  EXPECT_EQ(call({"fgl", "height"}, honda.out).out, "height 2\n");
  const auto add = call({"fgl", "build", "--p", "3", "--law", "additive", "--trunc", "10", "--json"});
  EXPECT_EQ(json::parse(call({"fgl", "height", "--json"}, add.out).out)["text"], ">= 3");
  const auto lift = call({"fgl", "lift-check", "--p", "2", "--precision", "6", "--trials", "3", "--json"});
  EXPECT_EQ(lift.code, 0);
  EXPECT_EQ(json::parse(lift.out)["passed"], true);
}

TEST(Cli, Clifford) {
  const auto pi = json::parse(call({"clifford", "pi-check", "--lattice", "U+U", "--json", "--trials", "2"}).out);
  EXPECT_EQ(pi["passed"], true);
  EXPECT_EQ(pi["hyperbolic_agrees"], true);
  const auto fil = json::parse(call({"clifford", "filtration", "--lattice", "U+U", "--json"}).out);
  EXPECT_EQ(fil["image_dimension"], 8);
  EXPECT_EQ(fil["passed"], true);
  EXPECT_EQ(json::parse(call({"clifford", "filtration", "--lattice", "K3", "--json"}).out)["structural_dimension"],
            1u << 21);
  const json odd{{"lattice", json::parse(call({"lattice", "build", "--name", "U+U", "--json"}).out)},
                 {"element", {{"coeffs", {{"1", "1"}}}}}};
  const auto g = json::parse(call({"clifford", "gspin", "--json"}, odd.dump()).out);
  EXPECT_EQ(g["member"], false);
  EXPECT_EQ(g["reason"], "element is not even");
  json even = odd;
  even["element"]["coeffs"] = {{"0", "1"}, {"3", "1/2"}};
  EXPECT_EQ(call({"clifford", "gspin", "--json"}, even.dump()).code, 0);
}

TEST(Cli, SelftestAndStableOutput) {
  const auto a = call({"selftest", "--json", "--seed", "3", "--trials", "3"});
  const auto b = call({"selftest", "--json", "--seed", "3", "--trials", "3"});
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  const auto m1 = call({"crystal", "k3-model", "--h", "4", "--p", "2", "--json"});
  const auto m2 = call({"crystal", "k3-model", "--h", "4", "--p", "2", "--json"});
  EXPECT_EQ(m1.out, m2.out);
}
