#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

namespace brainnav {

struct ImageFrame {
  std::string mime_type = "image/jpeg";
  std::vector<std::uint8_t> bytes;
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string text;
  std::vector<ImageFrame> images;
};

/// Connection refused, timeout, non-2xx status or a body that is not a
/// chat-completion reply.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chat-completion style model client. `complete` returns the assistant
/// message text or throws TransportError.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

/// Read from BRAINNAV_LLM_URL / BRAINNAV_LLM_KEY (and optionally
/// BRAINNAV_LLM_MODEL).
struct RemoteModelEndpoint {
  std::string base_url;
  std::string api_key;
  std::string model = "gpt-4o";
  std::chrono::milliseconds timeout{30000};

  static std::optional<RemoteModelEndpoint> from_env();
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds backoff{500};  // doubled after every failed attempt
};

/// POSTs `{base_url}/chat/completions` with a bearer credential.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(RemoteModelEndpoint endpoint);
  std::string complete(const std::vector<ChatMessage>& messages) override;

  /// Request body for `messages`; images become base64 data URLs.
  std::string request_body(const std::vector<ChatMessage>& messages) const;

 private:
  RemoteModelEndpoint endpoint_;
  std::string origin_;
  std::string path_prefix_;
};

/// Caps the number of concurrent requests through a shared client.
class BoundedChatClient : public ChatClient {
 public:
  BoundedChatClient(ChatClient& inner, int max_in_flight = 4);
  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  ChatClient& inner_;
  std::counting_semaphore<1024> slots_;
};

/// Extracts the assistant text from a chat-completion response body. Throws
/// TransportError if the body does not have that shape.
std::string completion_text(const std::string& body);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace brainnav
