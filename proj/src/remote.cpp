#include "brainnav/remote.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

namespace brainnav {

std::optional<RemoteModelEndpoint> RemoteModelEndpoint::from_env() {
  const char* url = std::getenv("BRAINNAV_LLM_URL");
  if (url == nullptr || *url == '\0') return std::nullopt;
  RemoteModelEndpoint ep;
  ep.base_url = url;
  if (const char* key = std::getenv("BRAINNAV_LLM_KEY")) ep.api_key = key;
  if (const char* model = std::getenv("BRAINNAV_LLM_MODEL"); model != nullptr && *model != '\0') ep.model = model;
  return ep;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kTable[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kTable[(v >> 18) & 63]);
    out.push_back(kTable[(v >> 12) & 63]);
    out.push_back(kTable[(v >> 6) & 63]);
    out.push_back(kTable[v & 63]);
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    const std::uint32_t v = (bytes[i] << 16) | (rest == 2 ? bytes[i + 1] << 8 : 0);
    out.push_back(kTable[(v >> 18) & 63]);
    out.push_back(kTable[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kTable[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::string completion_text(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw TransportError("chat completion content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat completion body: ") + e.what());
  }
}

HttpChatClient::HttpChatClient(RemoteModelEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  const auto scheme_end = endpoint_.base_url.find("://");
  const auto path_start =
      endpoint_.base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  origin_ = endpoint_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : endpoint_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpChatClient::request_body(const std::vector<ChatMessage>& messages) const {
  nlohmann::ordered_json body;
  body["model"] = endpoint_.model;
  body["temperature"] = 0;
  body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    nlohmann::ordered_json msg;
    msg["role"] = m.role;
    if (m.images.empty()) {
      msg["content"] = m.text;
    } else {
      auto parts = nlohmann::ordered_json::array();
      parts.push_back({{"type", "text"}, {"text", m.text}});
      for (const auto& img : m.images) {
        parts.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + img.mime_type + ";base64," + base64_encode(img.bytes)}}}});
      }
      msg["content"] = parts;
    }
    body["messages"].push_back(std::move(msg));
  }
  return body.dump();
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs).count();
  client.set_connection_timeout(secs.count(), usecs);
  client.set_read_timeout(secs.count(), usecs);
  client.set_write_timeout(secs.count(), usecs);
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  const auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(messages), "application/json");
  if (!res) throw TransportError("request to " + origin_ + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("model endpoint returned HTTP " + std::to_string(res->status));
  }
  return completion_text(res->body);
}

BoundedChatClient::BoundedChatClient(ChatClient& inner, int max_in_flight)
    : inner_(inner), slots_(max_in_flight < 1 ? 1 : max_in_flight) {}

std::string BoundedChatClient::complete(const std::vector<ChatMessage>& messages) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_.complete(messages);
}

}  // namespace brainnav
