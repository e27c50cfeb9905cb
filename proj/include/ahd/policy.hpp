#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace ahd {

// ----------------------------------------------------------------------------
// Chat policies. The episode driver only needs "given the conversation so
// far, produce the next assistant turn". ScriptedPolicy replays canned turns
// for deterministic fixtures; RemoteChatPolicy speaks the role-tagged
// chat-completion wire protocol over HTTP.
// ----------------------------------------------------------------------------

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

class ChatPolicy {
public:
    virtual ~ChatPolicy() = default;
    virtual std::string next_turn(const std::vector<ChatMessage>& conversation) = 0;
};

/// Replays a fixed list of turns; once exhausted it yields empty output,
/// which the episode driver treats as a malformed action.
class ScriptedPolicy : public ChatPolicy {
public:
    explicit ScriptedPolicy(std::vector<std::string> turns) : turns_(std::move(turns)) {}

    std::string next_turn(const std::vector<ChatMessage>&) override {
        if (cursor_ >= turns_.size()) return "";
        return turns_[cursor_++];
    }

    std::size_t turns_consumed() const { return cursor_; }

private:
    std::vector<std::string> turns_;
    std::size_t cursor_ = 0;
};

/// Fixture format: {"turns": ["...", ...]}.
inline ScriptedPolicy scripted_policy_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("bad scripted policy: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("turns") || !j["turns"].is_array())
        throw std::invalid_argument("scripted policy needs a turns array");
    std::vector<std::string> turns;
    for (const auto& t : j["turns"]) {
        if (!t.is_string()) throw std::invalid_argument("scripted turns must be strings");
        turns.push_back(t.get<std::string>());
    }
    return ScriptedPolicy(std::move(turns));
}

struct PolicyTransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RemoteEndpointConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "AHD_API_KEY";  // credential read from this env var
    int timeout_seconds = 60;
    int max_retries = 3;   // attempts beyond the first
    int backoff_ms = 500;  // doubles per retry
};

class RemoteChatPolicy : public ChatPolicy {
public:
    explicit RemoteChatPolicy(RemoteEndpointConfig cfg) : cfg_(std::move(cfg)) {}

    std::string next_turn(const std::vector<ChatMessage>& conversation) override {
        nlohmann::json body;
        body["model"] = cfg_.model;
        body["messages"] = nlohmann::json::array();
        for (const ChatMessage& m : conversation)
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});
        const std::string payload = body.dump();

        httplib::Headers headers;
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);

        std::string last_error = "no attempt made";
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));
            httplib::Client client(cfg_.base_url);
            client.set_connection_timeout(cfg_.timeout_seconds, 0);
            client.set_read_timeout(cfg_.timeout_seconds, 0);
            const httplib::Result res =
                client.Post(cfg_.path, headers, payload, "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "endpoint returned status " + std::to_string(res->status);
                continue;
            }
            try {
                const nlohmann::json reply = nlohmann::json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                last_error = "malformed completion payload: " + std::string(e.what());
            }
        }
        throw PolicyTransportError("chat endpoint failed after " +
                                   std::to_string(cfg_.max_retries + 1) + " attempts; last: " +
                                   last_error);
    }

private:
    RemoteEndpointConfig cfg_;
};

struct PolicyEndpoint {
    enum class Kind { scripted, remote_chat };

    Kind kind = Kind::scripted;
    std::vector<std::string> turns;  // scripted
    RemoteEndpointConfig remote;     // remote_chat
};

inline std::unique_ptr<ChatPolicy> make_policy(const PolicyEndpoint& endpoint) {
    if (endpoint.kind == PolicyEndpoint::Kind::scripted)
        return std::make_unique<ScriptedPolicy>(endpoint.turns);
    return std::make_unique<RemoteChatPolicy>(endpoint.remote);
}

}  // namespace ahd
