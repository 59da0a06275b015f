/*
   Copyright 2026 The Chainfab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chainfab/api_server.hpp"
#include "chainfab/cli.hpp"
#include "chainfab/keyfile.hpp"
#include "chainfab/sim_network.hpp"
#include "test_support.hpp"

namespace chainfab {
namespace {

using namespace chainfab::testing;
namespace fs = std::filesystem;

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::dispatch(std::move(args), out, err);
    std::string o = out.str();
    if (!o.empty() && o.back() == '\n') o.pop_back();
    return {code, o, err.str()};
}

class CliTest : public ::testing::Test {
  protected:
    CliTest() {
        dir_ = fs::temp_directory_path() / ("chainfab-cli-" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~CliTest() override { fs::remove_all(dir_); }
    std::string path(const std::string& leaf) const { return (dir_ / leaf).string(); }

    fs::path dir_;
};

TEST_F(CliTest, KeygenWritesMatchingKeyfile) {
    auto r = run({"keygen", "--out", path("alice.key")});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    auto key = read_keyfile(path("alice.key"));
    EXPECT_EQ(r.out, derive_address(key.public_key).to_string());

    EXPECT_EQ(run({"keygen", "--out", path("alice.key")}).code, cli::kExitIo);
    auto seeded = run({"--json", "keygen", "--out", path("alice.key"), "--force", "--seed", key_for("alice").seed.hex()});
    ASSERT_EQ(seeded.code, cli::kExitOk);
    auto info = canonical_decode(seeded.out);
    EXPECT_EQ(info.at("address"), addr_of("alice").to_string());
    EXPECT_EQ(run({"keygen", "--out", path("b.key"), "--seed", "zz"}).code, cli::kExitUsage);
}

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    auto missing = run({"request", "submit", "--spec", "x"});
    EXPECT_EQ(missing.code, cli::kExitUsage);
    EXPECT_NE(missing.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, UnreachableNodeExitsTwo) {
    auto r = run({"--node", "http://127.0.0.1:1", "status"});
    EXPECT_EQ(r.code, cli::kExitIo);
    EXPECT_NE(r.err.find("cannot reach"), std::string::npos);
}

TEST_F(CliTest, SimulateCaseStudy) {
    auto r = run({"simulate", CHAINFAB_SOURCE_DIR "/scenarios/case_study.json", "--out", path("report.json")});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    std::ifstream in(path("report.json"));
    std::string text((std::istreambuf_iterator<char>(in)), {});
    auto report = canonical_decode(text.substr(0, text.size() - 1));
    EXPECT_TRUE(report.at("convergence").get<bool>());
    EXPECT_EQ(report.at("requests").at("r1").at("status"), "FULFILLED");
    EXPECT_EQ(report.at("balances").at("customer"), 40);
}

TEST_F(CliTest, SimulateRejectsInvalidScenario) {
    std::ofstream(path("bad.json")) << R"({"seed": 1, "duration_s": 10, "nodes": []})";
    auto r = run({"simulate", path("bad.json")});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("roster is empty"), std::string::npos);
    EXPECT_EQ(run({"simulate", path("missing.json")}).code, cli::kExitIo);
}

TEST_F(CliTest, GenesisFileLoads) {
    auto r = run({"genesis", "--out", path("g.json"), "--network-id", "t", "--time", "1700000000", "--pow-bits", "4",
                  "--alloc", addr_of("customer").to_string() + "=100"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    std::ifstream in(path("g.json"));
    auto g = GenesisConfig::from_json(Json::parse(in));
    EXPECT_EQ(g.allocations.at(addr_of("customer")), 100);
    EXPECT_EQ(r.out, genesis_block(g).id().hex());
    EXPECT_EQ(run({"genesis", "--out", path("g2.json"), "--alloc", "nonsense"}).code, cli::kExitUsage);
}

class CliLiveTest : public CliTest {
  protected:
    CliLiveTest()
        : net_(SimNetConfig{1}),
          transport_(net_.add_endpoint("self")),
          node_(options(), transport_, journal_),
          runner_(node_, RunnerTiming{500, 1'000'000}, [] { return (kGenesisTime + 100) * 1000; }),
          api_(runner_) {
        runner_.start();
        url_ = "http://127.0.0.1:" + std::to_string(api_.start("127.0.0.1", 0));
        write_keyfile(path("customer.key"), key_for("customer"));
        write_keyfile(path("provider.key"), key_for("provider"));
    }
    ~CliLiveTest() override {
        api_.stop();
        runner_.stop();
    }

    static NodeOptions options() {
        NodeOptions o;
        o.key = key_for("miner");
        o.genesis = pow_genesis(2);
        o.listen = "self";
        return o;
    }

    CliRun as(const std::string& who, std::vector<std::string> args) {
        args.insert(args.begin(), {"--node", url_, "--key", path(who + ".key")});
        return run(std::move(args));
    }
    void produce() {
        runner_.call([](Node& n, Millis now) { return n.try_produce(now); });
    }

    SimNetwork net_;
    SimTransport& transport_;
    MemoryJournal journal_;
    Node node_;
    NodeRunner runner_;
    ApiServer api_;
    std::string url_;
};

TEST_F(CliLiveTest, WritesMatchDirectSigning) {
    const UnixSeconds due = kGenesisTime + 7 * kDay;
    auto r = as("customer", {"request", "submit", "--spec", "ellipse pocket in the middle of a cube", "--tag", "cnc-milling",
                             "--due", std::to_string(due), "--max-price", "100"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    auto direct = make_signed(key_for("customer"), case_study_request(due, 100));
    EXPECT_EQ(r.out, direct.id().hex());

    produce();
    auto offer = as("provider", {"offer", "submit", "--request", r.out, "--price", "60", "--due", std::to_string(due - kDay)});
    ASSERT_EQ(offer.code, cli::kExitOk) << offer.err;
    EXPECT_EQ(offer.out, make_signed(key_for("provider"), ServiceOfferPayload{direct.id(), 60, due - kDay}).id().hex());
    produce();

    // No --offer: takes the top-ranked one.
    auto accept = as("customer", {"accept", "--request", r.out});
    ASSERT_EQ(accept.code, cli::kExitOk) << accept.err;
    auto offer_id = Digest256::from_hex(offer.out);
    EXPECT_EQ(accept.out, make_signed(key_for("customer"), OfferAcceptancePayload{direct.id(), offer_id}).id().hex());
    produce();
    ASSERT_EQ(as("customer", {"confirm", "--request", r.out}).code, cli::kExitOk);
    produce();

    auto show = as("customer", {"--json", "request", "show", r.out});
    ASSERT_EQ(show.code, cli::kExitOk);
    EXPECT_EQ(canonical_decode(show.out).at("status"), "FULFILLED");
    EXPECT_EQ(as("customer", {"balance"}).out, "40");
    EXPECT_EQ(as("provider", {"balance"}).out, "60");

    auto chain = as("customer", {"chain", "show"});
    EXPECT_NE(chain.out.find(direct.id().hex()), std::string::npos);

    auto dup = as("customer", {"confirm", "--request", r.out});
    EXPECT_EQ(dup.code, cli::kExitUsage);
}

TEST_F(CliLiveTest, JsonOutputIsCanonical) {
    for (std::vector<std::string> cmd : {std::vector<std::string>{"status"}, {"chain", "show"}, {"balance"}}) {
        cmd.insert(cmd.begin(), "--json");
        auto r = as("customer", cmd);
        ASSERT_EQ(r.code, cli::kExitOk) << r.err;
        EXPECT_EQ(canonical_encode(canonical_decode(r.out)), r.out);
    }
}

TEST_F(CliLiveTest, RejectedTransferExitsOne) {
    auto r = as("provider", {"transfer", "--to", addr_of("customer").to_string(), "--amount", "5"});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("InsufficientFunds"), std::string::npos);
    EXPECT_EQ(as("provider", {"transfer", "--to", "nobody", "--amount", "5"}).code, cli::kExitUsage);
}

}  // namespace
}  // namespace chainfab
