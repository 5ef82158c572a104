#include "websocket.hpp"

#include <stdexcept>

#include <openssl/evp.h>
#include <openssl/sha.h>

namespace bactobot::ws {

namespace {
constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxPayload = 1 << 20;
}  // namespace

std::string accept_key(std::string_view client_key) {
  std::string material(client_key);
  material.append(kGuid);
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest);
  unsigned char encoded[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(encoded, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<const char*>(encoded), static_cast<std::size_t>(n));
}

std::string encode_frame(Opcode op, std::string_view payload) {
  std::string frame;
  frame.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const std::uint64_t len = payload.size();
  if (len < 126) {
    frame.push_back(static_cast<char>(len));
  } else if (len <= 0xFFFF) {
    frame.push_back(static_cast<char>(126));
    frame.push_back(static_cast<char>((len >> 8) & 0xFF));
    frame.push_back(static_cast<char>(len & 0xFF));
  } else {
    frame.push_back(static_cast<char>(127));
    for (int shift = 56; shift >= 0; shift -= 8) frame.push_back(static_cast<char>((len >> shift) & 0xFF));
  }
  frame.append(payload);
  return frame;
}

std::optional<Message> Decoder::next() {
  while (true) {
    if (buffer_.size() < 2) return std::nullopt;
    const auto* b = reinterpret_cast<const unsigned char*>(buffer_.data());
    const bool fin = b[0] & 0x80;
    const auto op = static_cast<Opcode>(b[0] & 0x0F);
    const bool masked = b[1] & 0x80;
    std::uint64_t len = b[1] & 0x7F;
    std::size_t header = 2;
    if (len == 126) {
      if (buffer_.size() < 4) return std::nullopt;
      len = (static_cast<std::uint64_t>(b[2]) << 8) | b[3];
      header = 4;
    } else if (len == 127) {
      if (buffer_.size() < 10) return std::nullopt;
      len = 0;
      for (int i = 0; i < 8; ++i) len = (len << 8) | b[2 + i];
      header = 10;
    }
    if (!masked) throw std::runtime_error("websocket: client frame not masked");
    if (len > kMaxPayload) throw std::runtime_error("websocket: frame too large");
    if (buffer_.size() < header + 4 + len) return std::nullopt;

    const unsigned char* mask = b + header;
    std::string payload(len, '\0');
    for (std::uint64_t i = 0; i < len; ++i) {
      payload[i] = static_cast<char>(b[header + 4 + i] ^ mask[i % 4]);
    }
    buffer_.erase(0, header + 4 + len);

    switch (op) {
      case Opcode::kClose:
      case Opcode::kPing:
      case Opcode::kPong:
        return Message{op, std::move(payload)};
      case Opcode::kText:
      case Opcode::kBinary:
        if (fragment_opcode_) throw std::runtime_error("websocket: new message inside a fragmented one");
        if (fin) return Message{op, std::move(payload)};
        fragment_opcode_ = op;
        fragments_ = std::move(payload);
        break;
      case Opcode::kContinuation:
        if (!fragment_opcode_) throw std::runtime_error("websocket: stray continuation frame");
        fragments_ += payload;
        if (fragments_.size() > kMaxPayload) throw std::runtime_error("websocket: message too large");
        if (fin) {
          Message m{*fragment_opcode_, std::move(fragments_)};
          fragment_opcode_.reset();
          fragments_.clear();
          return m;
        }
        break;
      default:
        throw std::runtime_error("websocket: unknown opcode");
    }
  }
}

}  // namespace bactobot::ws
