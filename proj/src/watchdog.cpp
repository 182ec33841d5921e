#include "vtms/watchdog.hpp"

namespace vtms {

WatchdogState watchdog_step(WatchdogState wd, bool heartbeat_seen, milliseconds dt) {
    if (dt.count() <= 0) throw ContractViolation("watchdog_step: dt must be > 0");
    if (heartbeat_seen) {
        wd.since_last_heartbeat = milliseconds{0};
    } else {
        wd.since_last_heartbeat += dt;
    }
    wd.bypass_active = wd.since_last_heartbeat > wd.timeout;
    return wd;
}

}  // namespace vtms
