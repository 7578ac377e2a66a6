#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "relprobe/encoders/ingest.hpp"
#include "relprobe/encoders/lstm.hpp"
#include "relprobe/encoders/rphs.hpp"
#include "relprobe/encoders/toy_encoder.hpp"
#include "support/oracles.hpp"
#include "support/tmpdir.hpp"

using namespace relprobe;

namespace {

// Little-endian RPHS image written byte by byte, independent of the library writer.
std::string rphs_bytes(std::uint32_t version, std::uint32_t len, std::uint32_t d, std::uint32_t input_len,
                       std::uint8_t ctx, const std::vector<float>& payload) {
  std::string out = "RPHS";
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
  };
  u32(version);
  u32(len);
  u32(d);
  u32(input_len);
  out.push_back(char(ctx));
  out.append(3, '\0');
  for (float f : payload) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    u32(bits);
  }
  return out;
}

std::size_t error_offset(const std::string& bytes) {
  try {
    enc::parse_rphs(bytes, "mem");
  } catch (const enc::RphsFormatError& e) {
    return e.offset();
  }
  return std::numeric_limits<std::size_t>::max();
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
}

}  // namespace

TEST_CASE("toy encoder shapes and input validation") {
  enc::ToyEncoder<double> e({10, 6, 4}, 3);
  const std::vector<int> tokens{1, 2, 3};
  const auto h = e.encode(tokens);
  CHECK(h.states.shape() == ad::Shape{3, 4});
  CHECK(h.input_len == 3);
  CHECK(h.context == enc::ContextMode::InputOnly);
  CHECK_THROWS_AS(e.encode(std::vector<int>{1, 10}), std::out_of_range);
  CHECK_THROWS_AS(e.encode(std::vector<int>{-1}), std::out_of_range);
  CHECK_THROWS_AS(e.encode(std::vector<int>(7, 1)), std::invalid_argument);
  CHECK_THROWS_AS(e.encode(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("toy encoder is position sensitive and seed deterministic") {
  enc::ToyEncoder<double> a({20, 8, 6}, 11), b({20, 8, 6}, 11);
  const std::vector<int> t1{4, 9, 2, 7}, t2{9, 4, 2, 7};
  const auto h1 = oracle::vec(a.encode(t1).states.value());
  const auto h2 = oracle::vec(a.encode(t2).states.value());
  bool differs = false;
  for (std::size_t i = 0; i < h1.size(); ++i) differs = differs || h1[i] != h2[i];
  CHECK(differs);
  const auto again = oracle::vec(b.encode(t1).states.value());
  CHECK(std::equal(h1.begin(), h1.end(), again.begin()));
}

TEST_CASE("input-only context ignores generated rows") {
  oracle::Gen g(4);
  auto base = g.normals(5 * 3);
  auto perturbed = base;
  for (std::size_t i = 3 * 3; i < perturbed.size(); ++i) perturbed[i] += 10.0;
  enc::HiddenStates<double> h1{ad::Tensor<double>::constant({5, 3}, base), 3, enc::ContextMode::InputPlusGen};
  enc::HiddenStates<double> h2{ad::Tensor<double>::constant({5, 3}, perturbed), 3,
                               enc::ContextMode::InputPlusGen};
  const auto io1 = enc::select_context(h1, enc::ContextMode::InputOnly);
  const auto io2 = enc::select_context(h2, enc::ContextMode::InputOnly);
  CHECK(io1.shape() == ad::Shape{3, 3});
  CHECK(std::equal(io1.value().begin(), io1.value().end(), io2.value().begin()));
  CHECK(enc::select_context(h1, enc::ContextMode::InputPlusGen).rows() == 5);

  enc::HiddenStates<double> io_only{ad::Tensor<double>::constant({3, 3}, g.normals(9)), 3,
                                    enc::ContextMode::InputOnly};
  CHECK_THROWS_AS(enc::select_context(io_only, enc::ContextMode::InputPlusGen), std::invalid_argument);
  CHECK(enc::context_from_string("ig") == enc::ContextMode::InputPlusGen);
  CHECK_THROWS(enc::context_from_string("both"));
}

TEST_CASE("LSTM on an all-zero window with zero biases outputs zeros") {
  enc::Lstm<double> lstm({3, 4}, 9);
  enc::MarketWindow w{4, 3, std::vector<double>(12, 0.0)};
  const auto h = lstm.encode(w);
  CHECK(h.shape() == ad::Shape{1, 4});
  for (double v : h.value()) CHECK(v == 0.0);
}

TEST_CASE("LSTM single step matches the gate equations") {
  enc::Lstm<double> lstm({3, 5}, 12);
  oracle::Gen g(8);
  for (auto& gate : lstm.gates()) {
    auto b = gate.b.data();
    for (auto& x : b) x = g.normal(0.5);
  }
  const auto x = g.normals(3);
  const auto h = oracle::vec(lstm.encode(enc::MarketWindow{1, 3, x}).value());
  auto pre = [&](std::size_t k, std::size_t j) {
    const auto& gate = lstm.gates()[k];
    double s = gate.b.value()[j];
    for (std::size_t f = 0; f < 3; ++f) s += x[f] * gate.wx.value()[f * 5 + j];
    return s;
  };
  for (std::size_t j = 0; j < 5; ++j) {
    const double c = oracle::sigmoid(pre(0, j)) * std::tanh(pre(2, j));
    const double want = oracle::sigmoid(pre(3, j)) * std::tanh(c);
    CHECK(h[j] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("LSTM rejects bad windows") {
  enc::Lstm<double> lstm({2, 3}, 1);
  enc::MarketWindow w{3, 2, {0, 0, 0, std::numeric_limits<double>::quiet_NaN(), 0, 0}};
  try {
    lstm.encode(w);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
  CHECK_THROWS_AS(lstm.encode(enc::MarketWindow{2, 3, std::vector<double>(6, 0)}), std::invalid_argument);
  std::vector<enc::MarketWindow> mixed{{2, 2, std::vector<double>(4, 0)}, {3, 2, std::vector<double>(6, 0)}};
  CHECK_THROWS_AS(lstm.encode(mixed), std::invalid_argument);
}

TEST_CASE("RPHS round trip through the library writer") {
  testutil::TempDir dir;
  enc::RphsRecord rec;
  rec.length = 4;
  rec.dim = 2;
  rec.input_len = 3;
  rec.context = enc::ContextMode::InputPlusGen;
  rec.states = {0.5f, -1.25f, 3.0f, 1e-7f, -0.0f, 7.0f, 2.5f, -8.0f};
  const auto path = dir.path() / "a.rphs";
  enc::write_rphs(path, rec);
  CHECK(std::filesystem::file_size(path) == enc::kRphsHeaderBytes + 8 * 4);
  const auto back = enc::read_rphs(path);
  CHECK(back.length == 4);
  CHECK(back.dim == 2);
  CHECK(back.input_len == 3);
  CHECK(back.context == enc::ContextMode::InputPlusGen);
  CHECK(back.states == rec.states);
  const auto h = enc::load_hidden_states<double>(path);
  CHECK(h.states.shape() == ad::Shape{4, 2});
  CHECK(h.states.at(1, 1) == double(1e-7f));
}

TEST_CASE("RPHS reader matches a hand-built image") {
  const std::vector<float> payload{1, 2, 3, 4, 5, 6};
  const auto rec = enc::parse_rphs(rphs_bytes(1, 3, 2, 3, 0, payload), "mem");
  CHECK(rec.length == 3);
  CHECK(rec.dim == 2);
  CHECK(rec.states == payload);
}

TEST_CASE("RPHS errors carry the byte offset of the problem") {
  const std::vector<float> p6(6, 1.0f);
  CHECK(error_offset("XPHS" + rphs_bytes(1, 3, 2, 3, 0, p6).substr(4)) == 0);
  CHECK(error_offset("RP") == 0);
  CHECK(error_offset(rphs_bytes(1, 3, 2, 3, 0, p6).substr(0, 10)) == 4);
  CHECK(error_offset(rphs_bytes(2, 3, 2, 3, 0, p6)) == 4);
  CHECK(error_offset(rphs_bytes(1, 3, 2, 3, 7, p6)) == 20);
  CHECK(error_offset(rphs_bytes(1, 0, 2, 0, 0, {})) == 8);
  CHECK(error_offset(rphs_bytes(1, 3, 2, 4, 1, p6)) == 16);
  CHECK(error_offset(rphs_bytes(1, 3, 2, 2, 0, p6)) == 16);
  CHECK(error_offset(rphs_bytes(1, 3, 2, 3, 0, std::vector<float>(5, 1.0f))) == enc::kRphsHeaderBytes);
}

TEST_CASE("hidden-state index resolves files next to the index") {
  testutil::TempDir dir;
  std::vector<enc::HiddenStateIndexEntry> entries{
      {"a1", "2024-03-01", {"AAA", "BBB"}, dir.path() / "a1.rphs"},
      {"a2", "2024-03-02", {}, dir.path() / "other.rphs"}};
  enc::write_hidden_state_index(dir.path() / "index.jsonl", entries);
  const auto back = enc::read_hidden_state_index(dir.path() / "index.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].article_id == "a1");
  CHECK(back[0].tickers == std::vector<std::string>{"AAA", "BBB"});
  CHECK(back[1].file == dir.path() / "other.rphs");

  write_text(dir.path() / "short.jsonl", R"({"article_id":"x","date":"2024-01-02","tickers":[]})" "\n");
  CHECK(enc::read_hidden_state_index(dir.path() / "short.jsonl")[0].file == dir.path() / "x.rphs");
  write_text(dir.path() / "bad.jsonl", "\n" R"({"article_id":"x","date":"Jan 2","tickers":[]})" "\n");
  try {
    enc::read_hidden_state_index(dir.path() / "bad.jsonl");
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("price CSV aligns calendars and forward-fills gaps") {
  testutil::TempDir dir;
  write_text(dir.path() / "p.csv",
             "date,ticker,open,high,low,close,volume\n"
             "2024-01-01,BBB,1,1,1,1,100\n"
             "2024-01-02,AAA,10,11,9,10,1000\n"
             "2024-01-02,BBB,2,2,2,2,200\n"
             "2024-01-03,AAA,10,12,9,11,1100\n"
             "2024-01-04,AAA,11,12,10,12,900\n"
             "2024-01-04,BBB,3,3,3,3,300\n");
  const auto t = enc::read_prices_csv(dir.path() / "p.csv");
  CHECK(t.tickers == std::vector<std::string>{"AAA", "BBB"});
  CHECK(t.dates == std::vector<std::string>{"2024-01-02", "2024-01-03", "2024-01-04"});
  CHECK(t.bars[1][1].close == 2.0);  // forward-filled
  CHECK(t.find_ticker("BBB") == 1u);
  CHECK_FALSE(t.find_date("2024-01-01").has_value());

  const auto r = enc::close_returns(t);
  CHECK(std::isnan(r[0][0]));
  CHECK(r[0][1] == doctest::Approx(0.1));
  CHECK(r[1][2] == doctest::Approx(0.5));
  const auto f = enc::market_features(t);
  CHECK(f[0][1][1] == doctest::Approx(12.0 / 11.0 - 1.0));
  CHECK(f[0][2][4] == doctest::Approx(std::log(900.0 / 1100.0)));

  enc::write_prices_csv(dir.path() / "q.csv", t);
  const auto again = enc::read_prices_csv(dir.path() / "q.csv");
  CHECK(again.dates == t.dates);
  CHECK(again.bars[0][2].volume == t.bars[0][2].volume);
}

TEST_CASE("price CSV errors name the problem") {
  testutil::TempDir dir;
  write_text(dir.path() / "h.csv", "date,sym,open,high,low,close,volume\n");
  CHECK_THROWS_AS(enc::read_prices_csv(dir.path() / "h.csv"), std::runtime_error);
  write_text(dir.path() / "n.csv", "date,ticker,open,high,low,close,volume\n2024-01-02,A,1,1,x,1,1\n");
  CHECK_THROWS_AS(enc::read_prices_csv(dir.path() / "n.csv"), std::runtime_error);
  write_text(dir.path() / "d.csv", "date,ticker,open,high,low,close,volume\n02/01/2024,A,1,1,1,1,1\n");
  CHECK_THROWS_AS(enc::read_prices_csv(dir.path() / "d.csv"), std::runtime_error);
}

TEST_CASE("tokenizer splits on whitespace and punctuation") {
  CHECK(enc::tokenize_text("Acme, Inc. buys  Beta!") ==
        std::vector<std::string>{"acme", ",", "inc", ".", "buys", "beta", "!"});
  CHECK(enc::tokenize_text("   ").empty());
}

TEST_CASE("vocabulary ranks by frequency with lexical ties") {
  const auto v = enc::Vocabulary::build({{"b", "a", "c", "a"}, {"c", "d"}}, 3);
  CHECK(v.size() == 3);
  CHECK(v.id("a") == 1);
  CHECK(v.id("c") == 2);
  CHECK(v.id("b") == 0);
  CHECK(v.id("zzz") == 0);
}

TEST_CASE("news JSONL accepts token ids or text and drops unknown tickers") {
  testutil::TempDir dir;
  write_text(dir.path() / "n.jsonl",
             R"({"id":"x1","date":"2024-01-02","tokens":[3,1,4],"tickers":["BBB","ZZZ","AAA","BBB"]})" "\n"
             "\n"
             R"({"id":"x2","date":"2024-01-03","text":"up up down","tickers":[]})" "\n");
  const auto arts = enc::read_news_jsonl(dir.path() / "n.jsonl", {"AAA", "BBB"}, 50);
  REQUIRE(arts.size() == 2);
  CHECK(arts[0].tokens == std::vector<int>{3, 1, 4});
  CHECK(arts[0].tickers == std::vector<std::size_t>{0, 1});
  CHECK(arts[1].tokens == std::vector<int>{1, 1, 2});

  enc::write_news_jsonl(dir.path() / "o.jsonl", arts, {"AAA", "BBB"});
  const auto back = enc::read_news_jsonl(dir.path() / "o.jsonl", {"AAA", "BBB"}, 50);
  CHECK(back[1].tokens == arts[1].tokens);
  CHECK(back[0].tickers == arts[0].tickers);

  write_text(dir.path() / "bad.jsonl", R"({"id":"x","date":"2024-01-02","tickers":[]})" "\n");
  CHECK_THROWS_AS(enc::read_news_jsonl(dir.path() / "bad.jsonl", {"AAA"}, 10), std::runtime_error);
}
