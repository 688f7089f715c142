#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "coex/llm_interface.hpp"

namespace coex {
namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

}  // namespace

ChatCompletionsTransport::ChatCompletionsTransport(LlmEndpointConfig ep) : ep_(std::move(ep)) {}

std::variant<std::string, PolicyFault> ChatCompletionsTransport::complete(const nlohmann::ordered_json& state) {
  const SplitUrl url = split_url(ep_.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.scheme_host_port.starts_with("https://")) {
    return PolicyFault{FaultKind::Transport, "built without TLS support; cannot reach " + url.scheme_host_port, ""};
  }
#endif

  httplib::Client client(url.scheme_host_port);
  const auto timeout = std::chrono::milliseconds(ep_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(ep_.api_key_env_var.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const std::string body = build_chat_request(ep_, state).dump();
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(url.path + "/chat/completions", headers, body, "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - started;

  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout || elapsed >= timeout;
    return PolicyFault{timed_out ? FaultKind::Timeout : FaultKind::Transport, httplib::to_string(err), ""};
  }
  if (res->status != 200) {
    return PolicyFault{FaultKind::Transport, "HTTP status " + std::to_string(res->status), res->body};
  }

  const auto envelope = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (envelope.is_discarded()) return PolicyFault{FaultKind::ParseError, "response envelope is not JSON", res->body};
  try {
    return envelope.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return PolicyFault{FaultKind::ParseError, "response has no choices[0].message.content string", res->body};
  }
}

}  // namespace coex
