#pragma once

#include <cstddef>
#include <cstdint>

#include "familiar/config.hpp"
#include "familiar/session.hpp"

namespace familiar::tools {

struct ServeOptions {
  std::uint16_t port = 8765;
  std::size_t max_sessions = 1;
  SessionOptions session;
};

/// WebSocket server: one Session per connection, ticked at 10 Hz by a single
/// event loop. Blocks until the process is interrupted.
int serve_websocket(const Config& config, const ServeOptions& options);

/// Headless mode: NDJSON client messages on stdin, replies on stdout. The
/// session ticks at 10 Hz wall clock; EOF ends the process.
int serve_stdio(const Config& config, const ServeOptions& options);

}  // namespace familiar::tools
