#include "fixtures.hpp"

#include "lobflow/error.hpp"
#include "lobflow/message.hpp"

#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

using namespace lobflow;
using namespace lobflow::testing;

namespace {

Shares executed_volume(const std::vector<Message>& msgs) {
    Shares total = 0;
    for (const auto& m : msgs)
        if (m.kind == MessageKind::execute) total += m.size;
    return total;
}

// Time-sorted stream of executes and adds with frequent ts ties.
std::vector<Message> random_stream(std::mt19937_64& rng, std::size_t n, bool hidden_allowed) {
    std::uniform_int_distribution<int> kind(0, 3), side(0, 1), size(1, 5), step(0, 2);
    std::bernoulli_distribution hid(0.2);
    std::vector<Message> out;
    Timestamp ts = 36'000 * kNanosPerSecond - 5;
    for (std::size_t i = 0; i < n; ++i) {
        ts += step(rng);
        const Side s = side(rng) ? Side::bid : Side::ask;
        if (kind(rng) == 0) out.push_back(add(i + 1, s, 100, 100 * size(rng), ts));
        else out.push_back(execute(s, 100 * size(rng), ts, i + 1, hidden_allowed && hid(rng)));
    }
    return out;
}

}  // namespace

TEST_CASE("ndjson record maps field by field") {
    const auto m = parse_ndjson_line(R"({"ts":36000000000000,"kind":"ADD","order_id":1,"side":"B","price":2629,"size":100})");
    CHECK(m.ts == 36'000'000'000'000);
    CHECK(m.kind == MessageKind::add);
    CHECK(m.order_id == 1);
    CHECK(m.side == Side::bid);
    CHECK(m.price == 2629);
    CHECK(m.size == 100);
    CHECK_FALSE(m.hidden);
}

TEST_CASE("zero size is a malformed record") {
    try {
        parse_ndjson_line(R"({"ts":1,"kind":"ADD","order_id":1,"side":"B","price":2629,"size":0})", 7);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
        CHECK(e.code() == ErrorCode::non_positive_size);
    }
}

TEST_CASE("unknown kind and missing fields are rejected") {
    CHECK_THROWS_AS(parse_ndjson_line(R"({"ts":1,"kind":"REPLACE","order_id":1})"), ParseError);
    try {
        parse_ndjson_line(R"({"ts":1,"kind":"REPLACE","order_id":1})");
    } catch (const ParseError& e) {
        CHECK(e.code() == ErrorCode::unknown_kind);
    }
    CHECK_THROWS_AS(parse_ndjson_line(R"({"ts":1,"kind":"ADD","order_id":1,"side":"B","size":5})"), ParseError);
    CHECK_THROWS_AS(parse_ndjson_line(R"({"ts":1,"kind":"MODIFY","order_id":1,"old_size":5})"), ParseError);
    CHECK_THROWS_AS(parse_ndjson_line("not json"), ParseError);
    CHECK_THROWS_AS(parse_ndjson_line(R"({"ts":1,"kind":"ADD","order_id":1,"side":"B","price":5,"size":5,"hidden":true})"),
                    ParseError);
}

TEST_CASE("lenient parse skips the malformed middle line") {
    const std::string text =
        "{\"ts\":1,\"kind\":\"ADD\",\"order_id\":1,\"side\":\"B\",\"price\":2629,\"size\":100}\n"
        "{\"ts\":2,\"kind\":\"ADD\",\"order_id\":2,\"side\":\"A\",\"price\":2630,\"size\":0}\n"
        "{\"ts\":3,\"kind\":\"EXECUTE\",\"order_id\":3,\"side\":\"A\",\"size\":50}\n";
    const auto res = parse_stream(text, StreamFormat::ndjson);
    REQUIRE(res.messages.size() == 2);
    REQUIRE(res.diagnostics.size() == 1);
    CHECK(res.diagnostics[0].line == 2);
    CHECK(res.messages[1].kind == MessageKind::execute);

    CHECK_THROWS_AS(parse_stream(text, StreamFormat::ndjson, true), ParseError);
}

TEST_CASE("csv with empty cells for inapplicable fields") {
    const std::string text =
        "ts,kind,order_id,side,price,size,hidden,old_size,new_size\n"
        "5,ADD,1,B,2629,100,,,\n"
        "6,MODIFY,1,B,2629,,,100,40\n"
        "7,EXECUTE,9,A,,40,true,,\n"
        "8,DELETE,1,,,,,,\n";
    const auto res = parse_stream(text, StreamFormat::csv, true);
    REQUIRE(res.messages.size() == 4);
    CHECK(res.messages[1].old_size == 100);
    CHECK(res.messages[1].new_size == 40);
    CHECK(res.messages[2].hidden);
    CHECK(res.messages[3].kind == MessageKind::del);
}

TEST_CASE("written streams parse back unchanged in both formats") {
    std::mt19937_64 rng(11);
    auto msgs = random_stream(rng, 200, true);
    msgs.push_back(modify(3, 200, 100, msgs.back().ts));
    msgs.push_back(del(3, msgs.back().ts));
    msgs.push_back(cancel(5, 100, msgs.back().ts));
    for (auto fmt : {StreamFormat::ndjson, StreamFormat::csv}) {
        std::ostringstream out;
        write_stream(out, msgs, fmt);
        const auto back = parse_stream(out.str(), fmt, true);
        CHECK(back.messages == msgs);
    }
}

TEST_CASE("filter_session drops hidden executions and honours the closed window") {
    SessionConfig cfg;
    const Timestamp s = cfg.session_start;
    std::vector<Message> msgs;
    for (int i = 0; i < 4; ++i) msgs.push_back(add(i + 1, Side::bid, 2600 + i, 100, s - 1000 + i));
    msgs.push_back(add(10, Side::ask, 2700, 100, s));  // exactly at the start
    for (int i = 0; i < 5; ++i) msgs.push_back(add(20 + i, Side::ask, 2701 + i, 100, s + 1 + i));
    msgs.push_back(execute(Side::bid, 50, s + 10, 99, true));
    msgs.push_back(add(30, Side::ask, 2710, 100, cfg.session_end + 1));

    const auto out = filter_session(msgs, cfg);
    const auto in_window = std::count_if(out.begin(), out.end(), [&](const Message& m) { return m.ts >= s; });
    const auto seeding = std::count_if(out.begin(), out.end(), [&](const Message& m) { return m.ts < s; });
    CHECK(in_window == 6);
    CHECK(seeding == 4);
    CHECK(std::none_of(out.begin(), out.end(), [](const Message& m) { return m.hidden; }));
    CHECK(out[4].ts == s);
}

TEST_CASE("recombination of split market orders") {
    SUBCASE("adjacent same-side same-ts executes merge") {
        const std::vector<Message> in{execute(Side::bid, 100, 7, 1), execute(Side::bid, 200, 7, 2)};
        const auto out = recombine_market_orders(in);
        REQUIRE(out.size() == 1);
        CHECK(out[0].size == 300);
        CHECK(out[0].order_id == 1);
    }
    SUBCASE("opposite directions stay apart") {
        const std::vector<Message> in{execute(Side::bid, 100, 7), execute(Side::ask, 100, 7)};
        CHECK(recombine_market_orders(in).size() == 2);
    }
    SUBCASE("an intervening ADD breaks the run") {
        const std::vector<Message> in{execute(Side::bid, 100, 7), add(5, Side::bid, 10, 100, 7), execute(Side::bid, 100, 7)};
        const auto out = recombine_market_orders(in);
        CHECK(std::count_if(out.begin(), out.end(), [](const Message& m) { return m.kind == MessageKind::execute; }) == 2);
    }
}

TEST_CASE("recombine is idempotent, conserves volume and commutes with the session filter") {
    SessionConfig cfg;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed);
        const auto clean = random_stream(rng, 300, false);
        const auto once = recombine_market_orders(clean);
        CHECK(recombine_market_orders(once) == once);
        CHECK(executed_volume(once) == executed_volume(clean));
        CHECK(filter_session(recombine_market_orders(clean), cfg) == recombine_market_orders(filter_session(clean, cfg)));
    }
}
