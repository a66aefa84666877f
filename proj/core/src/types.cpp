#include "mailsig/types.hpp"

#include <algorithm>

namespace mailsig {

std::span<const EmailEvent> events_in_period(std::span<const EmailEvent> events,
                                             const Period& period) {
    auto lo = std::lower_bound(events.begin(), events.end(), period.start,
                               [](const EmailEvent& e, std::int64_t t) { return e.timestamp < t; });
    auto hi = std::lower_bound(lo, events.end(), period.end,
                               [](const EmailEvent& e, std::int64_t t) { return e.timestamp < t; });
    return events.subspan(std::size_t(lo - events.begin()), std::size_t(hi - lo));
}

}  // namespace mailsig
