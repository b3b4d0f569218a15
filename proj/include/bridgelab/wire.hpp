#pragma once

// Length-prefixed JSON messages: a 4-byte big-endian body length followed by
// a UTF-8 JSON object. Encoding emits no whitespace and the fixed top-level
// key order id, method, params | id, result | id, error. Decoding accepts any
// key order and whitespace.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace bridgelab {

using json = nlohmann::json;

inline constexpr std::uint32_t kMaxFrameBody = 16u * 1024u * 1024u;
inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 25333;

// Engine-service error codes carried in error responses.
enum ErrorCode : int {
  kUnknownMethod = 1,
  kBadHandle = 2,
  kNotTerminal = 3,
  kIllegalMove = 4,
  kBadParams = 5,
  kInternal = 6,
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FrameError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// An error response received from the peer.
class RemoteError : public std::runtime_error {
 public:
  RemoteError(int code, const std::string& message)
      : std::runtime_error("remote error " + std::to_string(code) + ": " + message), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

struct BridgeMessage {
  enum class Kind { request, result, error };

  Kind kind = Kind::request;
  std::uint64_t id = 0;
  std::string method;  // request
  json params = json::object();
  json result = json::object();
  int error_code = 0;
  std::string error_message;

  static BridgeMessage request(std::uint64_t id, std::string method, json params = json::object()) {
    BridgeMessage m;
    m.kind = Kind::request;
    m.id = id;
    m.method = std::move(method);
    m.params = std::move(params);
    return m;
  }
  static BridgeMessage success(std::uint64_t id, json result = json::object()) {
    BridgeMessage m;
    m.kind = Kind::result;
    m.id = id;
    m.result = std::move(result);
    return m;
  }
  static BridgeMessage failure(std::uint64_t id, int code, std::string message) {
    BridgeMessage m;
    m.kind = Kind::error;
    m.id = id;
    m.error_code = code;
    m.error_message = std::move(message);
    return m;
  }

  bool is_request() const noexcept { return kind == Kind::request; }

  friend bool operator==(const BridgeMessage& a, const BridgeMessage& b) {
    if (a.kind != b.kind || a.id != b.id) return false;
    switch (a.kind) {
      case Kind::request:
        return a.method == b.method && a.params == b.params;
      case Kind::result:
        return a.result == b.result;
      case Kind::error:
        return a.error_code == b.error_code && a.error_message == b.error_message;
    }
    return false;
  }
};

inline std::string encode_body(const BridgeMessage& m) {
  std::string body = "{\"id\":" + std::to_string(m.id);
  switch (m.kind) {
    case BridgeMessage::Kind::request:
      body += ",\"method\":" + json(m.method).dump() + ",\"params\":" + m.params.dump();
      break;
    case BridgeMessage::Kind::result:
      body += ",\"result\":" + m.result.dump();
      break;
    case BridgeMessage::Kind::error:
      body += ",\"error\":{\"code\":" + std::to_string(m.error_code) +
              ",\"message\":" + json(m.error_message).dump() + "}";
      break;
  }
  body += '}';
  return body;
}

inline void put_length_prefix(std::string& out, std::uint32_t n) {
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
}

inline std::uint32_t read_length_prefix(std::span<const std::uint8_t, 4> p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

inline std::string encode_frame(const BridgeMessage& m) {
  const auto body = encode_body(m);
  if (body.size() > kMaxFrameBody) throw FrameError("frame body exceeds 16 MiB");
  std::string frame;
  frame.reserve(body.size() + 4);
  put_length_prefix(frame, static_cast<std::uint32_t>(body.size()));
  frame += body;
  return frame;
}

inline BridgeMessage decode_body(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON body: ") + e.what());
  }
  if (!doc.is_object()) throw ProtocolError("message body is not a JSON object");
  auto id = doc.find("id");
  if (id == doc.end()) throw ProtocolError("message has no id");
  if (!id->is_number_unsigned() && !(id->is_number_integer() && id->get<std::int64_t>() >= 0)) {
    throw ProtocolError("message id is not a non-negative integer");
  }

  BridgeMessage m;
  m.id = id->get<std::uint64_t>();
  const bool has_method = doc.contains("method");
  const bool has_result = doc.contains("result");
  const bool has_error = doc.contains("error");
  if (has_method + has_result + has_error != 1) {
    throw ProtocolError("message must carry exactly one of method, result, error");
  }
  if (has_method) {
    const auto& method = doc["method"];
    if (!method.is_string()) throw ProtocolError("method is not a string");
    m.kind = BridgeMessage::Kind::request;
    m.method = method.get<std::string>();
    if (doc.contains("params")) {
      if (!doc["params"].is_object()) throw ProtocolError("params is not an object");
      m.params = doc["params"];
    }
  } else if (has_result) {
    m.kind = BridgeMessage::Kind::result;
    m.result = doc["result"];
  } else {
    const auto& err = doc["error"];
    if (!err.is_object() || !err.contains("code") || !err["code"].is_number_integer()) {
      throw ProtocolError("error object needs an integer code");
    }
    m.kind = BridgeMessage::Kind::error;
    m.error_code = err["code"].get<int>();
    if (err.contains("message")) {
      if (!err["message"].is_string()) throw ProtocolError("error message is not a string");
      m.error_message = err["message"].get<std::string>();
    }
  }
  return m;
}

// Decodes exactly one complete frame.
inline BridgeMessage decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FrameError("truncated length prefix");
  const auto n = read_length_prefix(bytes.first<4>());
  if (n > kMaxFrameBody) throw FrameError("declared body length " + std::to_string(n) + " exceeds 16 MiB");
  if (bytes.size() - 4 < n) {
    throw FrameError("truncated frame: declared " + std::to_string(n) + " body bytes, got " +
                     std::to_string(bytes.size() - 4));
  }
  if (bytes.size() - 4 > n) throw FrameError("trailing bytes after frame body");
  const auto body = bytes.subspan(4, n);
  return decode_body(std::string_view(reinterpret_cast<const char*>(body.data()), body.size()));
}

inline BridgeMessage decode_frame(std::string_view bytes) {
  return decode_frame(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace bridgelab
