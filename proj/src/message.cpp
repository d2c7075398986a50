#include "lobflow/message.hpp"

#include "lobflow/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

namespace lobflow {

namespace {

using json = nlohmann::json;

struct RawFields {
    std::optional<std::int64_t> ts, price, size, old_size, new_size;
    std::optional<std::uint64_t> order_id;
    std::optional<std::string> kind, side;
    std::optional<bool> hidden;
};

[[noreturn]] void fail(ErrorCode code, std::size_t line, const std::string& reason) {
    throw ParseError(code, line, reason);
}

Message build_message(const RawFields& f, std::size_t line) {
    if (!f.ts) fail(ErrorCode::malformed_record, line, "missing ts");
    if (!f.kind) fail(ErrorCode::malformed_record, line, "missing kind");
    if (!f.order_id) fail(ErrorCode::malformed_record, line, "missing order_id");
    auto kind = parse_kind(*f.kind);
    if (!kind) fail(ErrorCode::unknown_kind, line, "unknown kind '" + *f.kind + "'");
    if (*f.ts < 0) fail(ErrorCode::malformed_record, line, "negative ts");

    Message m;
    m.ts = *f.ts;
    m.kind = *kind;
    m.order_id = *f.order_id;
    if (f.side) {
        auto side = parse_side(*f.side);
        if (!side) fail(ErrorCode::malformed_record, line, "bad side '" + *f.side + "'");
        m.side = *side;
    }
    if (f.price) {
        if (*f.price <= 0) fail(ErrorCode::malformed_record, line, "price must be positive");
        m.price = *f.price;
    }
    if (f.size) {
        if (*f.size <= 0) fail(ErrorCode::non_positive_size, line, "size must be positive");
        m.size = *f.size;
    }
    if (f.hidden && *f.hidden && m.kind != MessageKind::execute)
        fail(ErrorCode::malformed_record, line, "hidden is only valid on EXECUTE");

    switch (m.kind) {
        case MessageKind::add:
            if (!f.side || !f.price || !f.size)
                fail(ErrorCode::malformed_record, line, "ADD requires side, price and size");
            break;
        case MessageKind::cancel:
            if (!f.size) fail(ErrorCode::malformed_record, line, "CANCEL requires size");
            break;
        case MessageKind::del:
            break;
        case MessageKind::modify:
            if (!f.old_size || !f.new_size)
                fail(ErrorCode::malformed_record, line, "MODIFY requires old_size and new_size");
            if (*f.old_size <= 0) fail(ErrorCode::non_positive_size, line, "old_size must be positive");
            if (*f.new_size < 0) fail(ErrorCode::malformed_record, line, "new_size must be non-negative");
            m.old_size = *f.old_size;
            m.new_size = *f.new_size;
            if (!f.size) m.size = m.old_size;
            break;
        case MessageKind::execute:
            if (!f.side || !f.size)
                fail(ErrorCode::malformed_record, line, "EXECUTE requires side and size");
            m.hidden = f.hidden.value_or(false);
            break;
    }
    return m;
}

template <class T>
std::optional<T> json_int(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer())
        fail(ErrorCode::malformed_record, line, std::string("field '") + key + "' is not an integer");
    if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_unsigned()) return it->template get<T>();
        auto v = it->template get<std::int64_t>();
        if (v < 0) fail(ErrorCode::malformed_record, line, std::string("field '") + key + "' is negative");
        return static_cast<T>(v);
    } else {
        return it->template get<T>();
    }
}

std::optional<std::string> json_str(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(ErrorCode::malformed_record, line, std::string("field '") + key + "' is not a string");
    return it->get<std::string>();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
std::optional<T> csv_int(std::string_view cell, std::string_view name, std::size_t line) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    T v{};
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        fail(ErrorCode::malformed_record, line, "column '" + std::string(name) + "' is not an integer");
    return v;
}

enum class Column { ts, kind, order_id, side, price, size, hidden, old_size, new_size, ignored };

Column column_of(std::string_view name) {
    if (name == "ts") return Column::ts;
    if (name == "kind") return Column::kind;
    if (name == "order_id") return Column::order_id;
    if (name == "side") return Column::side;
    if (name == "price") return Column::price;
    if (name == "size") return Column::size;
    if (name == "hidden") return Column::hidden;
    if (name == "old_size") return Column::old_size;
    if (name == "new_size") return Column::new_size;
    return Column::ignored;
}

Message parse_csv_line(std::string_view line, std::span<const Column> columns, std::size_t line_no) {
    RawFields f;
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (col >= columns.size()) fail(ErrorCode::malformed_record, line_no, "too many columns");
        auto trimmed = trim(cell);
        switch (columns[col]) {
            case Column::ts: f.ts = csv_int<std::int64_t>(cell, "ts", line_no); break;
            case Column::kind: if (!trimmed.empty()) f.kind = std::string(trimmed); break;
            case Column::order_id: f.order_id = csv_int<std::uint64_t>(cell, "order_id", line_no); break;
            case Column::side: if (!trimmed.empty()) f.side = std::string(trimmed); break;
            case Column::price: f.price = csv_int<std::int64_t>(cell, "price", line_no); break;
            case Column::size: f.size = csv_int<std::int64_t>(cell, "size", line_no); break;
            case Column::old_size: f.old_size = csv_int<std::int64_t>(cell, "old_size", line_no); break;
            case Column::new_size: f.new_size = csv_int<std::int64_t>(cell, "new_size", line_no); break;
            case Column::hidden:
                if (trimmed == "true" || trimmed == "1") f.hidden = true;
                else if (trimmed == "false" || trimmed == "0") f.hidden = false;
                else if (!trimmed.empty()) fail(ErrorCode::malformed_record, line_no, "bad hidden flag");
                break;
            case Column::ignored: break;
        }
        ++col;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (col != columns.size()) fail(ErrorCode::malformed_record, line_no, "expected " + std::to_string(columns.size()) + " columns");
    return build_message(f, line_no);
}

}  // namespace

std::string_view to_string(MessageKind k) noexcept {
    switch (k) {
        case MessageKind::add: return "ADD";
        case MessageKind::cancel: return "CANCEL";
        case MessageKind::del: return "DELETE";
        case MessageKind::modify: return "MODIFY";
        case MessageKind::execute: return "EXECUTE";
    }
    return "?";
}

std::string_view to_string(Side s) noexcept { return s == Side::bid ? "B" : "A"; }

std::optional<MessageKind> parse_kind(std::string_view s) noexcept {
    if (s == "ADD") return MessageKind::add;
    if (s == "CANCEL") return MessageKind::cancel;
    if (s == "DELETE") return MessageKind::del;
    if (s == "MODIFY") return MessageKind::modify;
    if (s == "EXECUTE") return MessageKind::execute;
    return std::nullopt;
}

std::optional<Side> parse_side(std::string_view s) noexcept {
    if (s == "B" || s == "BID" || s == "BUY") return Side::bid;
    if (s == "A" || s == "S" || s == "ASK" || s == "SELL") return Side::ask;
    return std::nullopt;
}

void SessionConfig::validate() const {
    if (!(tick_size > 0.0)) throw Error(ErrorCode::invalid_config, "tick_size must be positive");
    if (session_start >= session_end) throw Error(ErrorCode::invalid_config, "session_start must precede session_end");
    if (bucket_volume <= 0) throw Error(ErrorCode::invalid_config, "bucket volume must be positive");
}

Message parse_ndjson_line(std::string_view line, std::size_t line_no) {
    json obj = json::parse(line.begin(), line.end(), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) fail(ErrorCode::malformed_record, line_no, "not a JSON object");

    RawFields f;
    f.ts = json_int<std::int64_t>(obj, "ts", line_no);
    f.order_id = json_int<std::uint64_t>(obj, "order_id", line_no);
    f.price = json_int<std::int64_t>(obj, "price", line_no);
    f.size = json_int<std::int64_t>(obj, "size", line_no);
    f.old_size = json_int<std::int64_t>(obj, "old_size", line_no);
    f.new_size = json_int<std::int64_t>(obj, "new_size", line_no);
    f.kind = json_str(obj, "kind", line_no);
    f.side = json_str(obj, "side", line_no);
    if (auto it = obj.find("hidden"); it != obj.end() && !it->is_null()) {
        if (!it->is_boolean()) fail(ErrorCode::malformed_record, line_no, "field 'hidden' is not a boolean");
        f.hidden = it->get<bool>();
    }
    return build_message(f, line_no);
}

std::vector<std::string_view> split_csv_header(std::string_view header) {
    std::vector<std::string_view> names;
    std::size_t start = 0;
    while (true) {
        auto comma = header.find(',', start);
        names.push_back(trim(header.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return names;
}

ParseResult parse_stream(std::string_view bytes, StreamFormat format, bool strict) {
    ParseResult out;
    std::vector<Column> columns;
    bool have_header = format == StreamFormat::ndjson;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        auto line = bytes.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? bytes.size() : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        if (format == StreamFormat::csv && line.front() == '#') continue;

        if (!have_header) {
            for (auto name : split_csv_header(trim(line))) columns.push_back(column_of(name));
            for (auto required : {Column::ts, Column::kind, Column::order_id}) {
                if (std::find(columns.begin(), columns.end(), required) == columns.end())
                    throw ParseError(ErrorCode::malformed_record, line_no, "CSV header lacks a required column");
            }
            have_header = true;
            continue;
        }
        try {
            out.messages.push_back(format == StreamFormat::ndjson ? parse_ndjson_line(line, line_no)
                                                                  : parse_csv_line(trim(line), columns, line_no));
        } catch (const ParseError& e) {
            if (strict) throw;
            out.diagnostics.push_back({e.line(), e.what()});
        }
    }
    return out;
}

std::string to_ndjson(const Message& m) {
    std::string s;
    s.reserve(96);
    s += "{\"ts\":";
    s += std::to_string(m.ts);
    s += ",\"kind\":\"";
    s += to_string(m.kind);
    s += "\",\"order_id\":";
    s += std::to_string(m.order_id);
    s += ",\"side\":\"";
    s += to_string(m.side);
    s += '"';
    if (m.price > 0) {
        s += ",\"price\":";
        s += std::to_string(m.price);
    }
    if (m.size > 0) {
        s += ",\"size\":";
        s += std::to_string(m.size);
    }
    if (m.kind == MessageKind::execute && m.hidden) s += ",\"hidden\":true";
    if (m.kind == MessageKind::modify) {
        s += ",\"old_size\":";
        s += std::to_string(m.old_size);
        s += ",\"new_size\":";
        s += std::to_string(m.new_size);
    }
    s += '}';
    return s;
}

void write_stream(std::ostream& out, std::span<const Message> msgs, StreamFormat format) {
    if (format == StreamFormat::ndjson) {
        for (const auto& m : msgs) out << to_ndjson(m) << '\n';
        return;
    }
    out << "ts,kind,order_id,side,price,size,hidden,old_size,new_size\n";
    for (const auto& m : msgs) {
        out << m.ts << ',' << to_string(m.kind) << ',' << m.order_id << ',' << to_string(m.side) << ',';
        if (m.price > 0) out << m.price;
        out << ',';
        if (m.size > 0) out << m.size;
        out << ',';
        if (m.kind == MessageKind::execute) out << (m.hidden ? "true" : "false");
        out << ',';
        if (m.kind == MessageKind::modify) out << m.old_size << ',' << m.new_size;
        else out << ',';
        out << '\n';
    }
}

std::vector<Message> filter_session(std::span<const Message> msgs, const SessionConfig& cfg) {
    std::vector<Message> out;
    out.reserve(msgs.size());
    for (const auto& m : msgs) {
        if (m.kind == MessageKind::execute && m.hidden) continue;
        if (m.ts > cfg.session_end) continue;
        // Pre-session events are kept as book-seeding state; the bucketer
        // replays them silently.
        out.push_back(m);
    }
    return out;
}

std::vector<Message> recombine_market_orders(std::span<const Message> msgs) {
    std::vector<Message> out;
    out.reserve(msgs.size());
    for (const auto& m : msgs) {
        if (m.kind == MessageKind::execute && !out.empty()) {
            auto& last = out.back();
            if (last.kind == MessageKind::execute && last.ts == m.ts && last.side == m.side && last.hidden == m.hidden) {
                last.size += m.size;
                continue;
            }
        }
        out.push_back(m);
    }
    return out;
}

void sort_by_time(std::vector<Message>& msgs) {
    std::stable_sort(msgs.begin(), msgs.end(), [](const Message& a, const Message& b) { return a.ts < b.ts; });
}

}  // namespace lobflow
