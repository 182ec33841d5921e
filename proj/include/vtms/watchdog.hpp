#pragma once

#include "vtms/controller.hpp"

namespace vtms {

/// External hardware watchdog. Without a heartbeat for longer than the
/// timeout it takes over the genset relay (auto bypass).
struct WatchdogState {
    milliseconds since_last_heartbeat{0};
    milliseconds timeout{2000};
    bool bypass_active = false;

    friend bool operator==(const WatchdogState&, const WatchdogState&) = default;
};

WatchdogState watchdog_step(WatchdogState wd, bool heartbeat_seen, milliseconds dt);

}  // namespace vtms
