#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lobflow {

using Timestamp = std::int64_t;  // nanoseconds since session midnight
using Ticks = std::int64_t;      // integer price in units of the tick size
using HalfTicks = std::int64_t;  // mid-prices live on the half-tick grid
using Shares = std::int64_t;
using OrderId = std::uint64_t;

inline constexpr Timestamp kNanosPerSecond = 1'000'000'000;

enum class MessageKind : std::uint8_t { add, cancel, del, modify, execute };

// BID/ASK for resting orders. For EXECUTE the side is the aggressor:
// bid = buyer lifting the ask ladder, ask = seller hitting the bid ladder.
enum class Side : std::uint8_t { bid, ask };

[[nodiscard]] constexpr Side opposite(Side s) noexcept { return s == Side::bid ? Side::ask : Side::bid; }
[[nodiscard]] constexpr std::size_t index(Side s) noexcept { return static_cast<std::size_t>(s); }

std::string_view to_string(MessageKind k) noexcept;
std::string_view to_string(Side s) noexcept;
std::optional<MessageKind> parse_kind(std::string_view s) noexcept;
std::optional<Side> parse_side(std::string_view s) noexcept;

struct Message {
    Timestamp ts = 0;
    MessageKind kind = MessageKind::add;
    OrderId order_id = 0;
    Side side = Side::bid;
    Ticks price = 0;        // 0 when not carried (CANCEL/DELETE/EXECUTE may omit it)
    Shares size = 0;        // ADD/CANCEL/EXECUTE amount; DELETE may carry 0 (= remainder)
    bool hidden = false;    // EXECUTE only
    Shares old_size = 0;    // MODIFY only
    Shares new_size = 0;    // MODIFY only

    friend bool operator==(const Message&, const Message&) = default;
};

struct SessionConfig {
    double tick_size = 0.01;
    Timestamp session_start = 10 * 3600 * kNanosPerSecond;
    Timestamp session_end = (15 * 3600 + 45 * 60) * kNanosPerSecond;
    std::string symbol = "SYN";
    Shares bucket_volume = 20000;

    // Throws Error(invalid_config) when an invariant is violated.
    void validate() const;
};

enum class StreamFormat { ndjson, csv };

struct Diagnostic {
    std::size_t line = 0;
    std::string reason;
};

struct ParseResult {
    std::vector<Message> messages;
    std::vector<Diagnostic> diagnostics;
};

// Decodes a whole stream. Lenient mode skips bad lines and records a
// diagnostic per line; strict mode throws ParseError on the first one.
ParseResult parse_stream(std::string_view bytes, StreamFormat format, bool strict = false);

// Single-record decoders, exposed for the adapters and tests.
Message parse_ndjson_line(std::string_view line, std::size_t line_no = 1);
std::vector<std::string_view> split_csv_header(std::string_view header);

void write_stream(std::ostream& out, std::span<const Message> msgs, StreamFormat format);
std::string to_ndjson(const Message& m);

// Keeps [session_start, session_end] plus the pre-session limit events
// needed to seed the opening book. Hidden executions are always dropped.
std::vector<Message> filter_session(std::span<const Message> msgs, const SessionConfig& cfg);

// Merges maximal runs of consecutive EXECUTEs with equal ts and aggressor
// side into one EXECUTE carrying the summed size and the first order_id.
std::vector<Message> recombine_market_orders(std::span<const Message> msgs);

// Stable sort by timestamp.
void sort_by_time(std::vector<Message>& msgs);

}  // namespace lobflow
