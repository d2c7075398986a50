#pragma once

#include "lobflow/book.hpp"
#include "lobflow/message.hpp"

#include <vector>

namespace lobflow::testing {

inline Message add(OrderId id, Side side, Ticks price, Shares size, Timestamp ts = 0) {
    Message m;
    m.ts = ts;
    m.kind = MessageKind::add;
    m.order_id = id;
    m.side = side;
    m.price = price;
    m.size = size;
    return m;
}

inline Message cancel(OrderId id, Shares size, Timestamp ts = 0) {
    Message m;
    m.ts = ts;
    m.kind = MessageKind::cancel;
    m.order_id = id;
    m.size = size;
    return m;
}

inline Message del(OrderId id, Timestamp ts = 0) {
    Message m;
    m.ts = ts;
    m.kind = MessageKind::del;
    m.order_id = id;
    return m;
}

inline Message modify(OrderId id, Shares old_size, Shares new_size, Timestamp ts = 0) {
    Message m;
    m.ts = ts;
    m.kind = MessageKind::modify;
    m.order_id = id;
    m.old_size = old_size;
    m.new_size = new_size;
    m.size = old_size;
    return m;
}

inline Message execute(Side aggressor, Shares size, Timestamp ts = 0, OrderId id = 0, bool hidden = false) {
    Message m;
    m.ts = ts;
    m.kind = MessageKind::execute;
    m.order_id = id;
    m.side = aggressor;
    m.size = size;
    m.hidden = hidden;
    return m;
}

// Book of the reference ladder: one-tick spread, ask queues
// 8000/10000/7000/15000 on consecutive ticks above the best bid.
inline BookState reference_book(Ticks bid = 2629) {
    BookState book;
    book.apply(add(1, Side::bid, bid, 8000));
    const Shares q[] = {8000, 10000, 7000, 15000};
    for (int i = 0; i < 4; ++i) book.apply(add(10 + i, Side::ask, bid + 1 + i, q[i]));
    return book;
}

}  // namespace lobflow::testing
