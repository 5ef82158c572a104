#pragma once

// Minimal RFC 6455 server-side framing for the browser gateway. Only what
// the console needs: text messages, ping/pong, close. No extensions.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bactobot::ws {

/// Sec-WebSocket-Accept value for a client's Sec-WebSocket-Key.
std::string accept_key(std::string_view client_key);

enum class Opcode : std::uint8_t { kContinuation = 0, kText = 1, kBinary = 2, kClose = 8, kPing = 9, kPong = 10 };

/// Unmasked server frame with FIN set.
std::string encode_frame(Opcode op, std::string_view payload);

struct Message {
  Opcode opcode = Opcode::kText;
  std::string payload;
};

/// Incremental decoder for client frames. Client frames must be masked;
/// fragmented data messages are reassembled.
class Decoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }

  /// Next complete message, or nullopt if more bytes are needed. Throws
  /// std::runtime_error on protocol violations.
  std::optional<Message> next();

 private:
  std::string buffer_;
  std::string fragments_;
  std::optional<Opcode> fragment_opcode_;
};

}  // namespace bactobot::ws
