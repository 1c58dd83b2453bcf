#include "mirroreval/remote.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mirroreval/base64.hpp"
#include "mirroreval/png_io.hpp"

namespace mirroreval {

namespace {

using nlohmann::json;

// "http://host:port/v1" -> origin "http://host:port", prefix "/v1"
void split_base_url(const std::string& base_url, std::string& origin, std::string& prefix) {
    const std::size_t scheme = base_url.find("://");
    const std::size_t path = scheme == std::string::npos ? base_url.find('/') : base_url.find('/', scheme + 3);
    if (path == std::string::npos) {
        origin = base_url;
        prefix.clear();
    } else {
        origin = base_url.substr(0, path);
        prefix = base_url.substr(path);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

}  // namespace

struct RemoteClient::Impl {
    RemoteEndpointConfig cfg;
    std::string origin;
    std::string path_prefix;
    std::string api_key;

    std::mutex mu;
    std::condition_variable cv;
    int in_flight = 0;

    void acquire() {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return in_flight < cfg.max_in_flight; });
        ++in_flight;
    }

    void release() {
        {
            std::lock_guard lock(mu);
            --in_flight;
        }
        cv.notify_one();
    }
};

RemoteClient::RemoteClient(RemoteEndpointConfig cfg) : impl_(std::make_unique<Impl>()) {
    impl_->cfg = std::move(cfg);
    if (impl_->cfg.base_url.empty()) throw RemoteConfigError("remote backend requires a base URL");
    if (impl_->cfg.max_in_flight < 1) throw RemoteConfigError("max_in_flight must be >= 1");
    split_base_url(impl_->cfg.base_url, impl_->origin, impl_->path_prefix);
    const char* key = std::getenv(impl_->cfg.auth_env_var.c_str());
    if (!key || !*key) {
        throw RemoteConfigError("auth token not set; export " + impl_->cfg.auth_env_var);
    }
    impl_->api_key = key;
}

RemoteClient::~RemoteClient() = default;

const RemoteEndpointConfig& RemoteClient::config() const { return impl_->cfg; }

std::string RemoteClient::chat_completion(const std::string& system_text, const std::string& user_text,
                                          const Frame* frame) {
    json body;
    body["model"] = impl_->cfg.model_id;
    body["temperature"] = impl_->cfg.temperature;
    json user_content = json::array();
    user_content.push_back({{"type", "text"}, {"text", user_text}});
    if (frame) {
        const std::string b64 = base64_encode(encode_png(*frame));
        user_content.push_back(
            {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + b64}}}});
    }
    body["messages"] = json::array({
        json{{"role", "system"}, {"content", system_text}},
        json{{"role", "user"}, {"content", user_content}},
    });
    const std::string payload = body.dump();

    impl_->acquire();
    struct Release {
        Impl* impl;
        ~Release() { impl->release(); }
    } release{impl_.get()};

    std::string last_error = "no attempt made";
    const int attempts = impl_->cfg.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const int delay = impl_->cfg.backoff_ms << (attempt - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min(delay, 4000)));
        }
        httplib::Client cli(impl_->origin);
        const auto timeout = std::chrono::duration<double>(impl_->cfg.timeout_seconds);
        cli.set_connection_timeout(timeout);
        cli.set_read_timeout(timeout);
        cli.set_write_timeout(timeout);
        cli.set_bearer_token_auth(impl_->api_key);

        httplib::Result res = cli.Post(impl_->path_prefix + "/chat/completions", payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        try {
            const json reply = json::parse(res->body);
            const json& content = reply.at("choices").at(0).at("message").at("content");
            if (!content.is_string()) {
                last_error = "response content is not a string";
                continue;
            }
            return content.get<std::string>();
        } catch (const json::exception& e) {
            last_error = std::string("malformed response body: ") + e.what();
            continue;
        }
    }
    throw BackendUnavailable("backend unavailable after " + std::to_string(attempts) + " attempts (" + last_error +
                             ")");
}

}  // namespace mirroreval
