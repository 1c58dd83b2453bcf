#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "mirroreval/agents.hpp"
#include "mirroreval/render.hpp"

namespace mirroreval {

// Raised after max_retries + 1 failed attempts; the episode engine aborts the
// episode and reports it as an infrastructure failure, excluded from metrics.
class BackendUnavailable : public std::runtime_error {
public:
    explicit BackendUnavailable(const std::string& what) : std::runtime_error(what) {}
};

class RemoteConfigError : public std::runtime_error {
public:
    explicit RemoteConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Chat-completions client over HTTP with a PNG image part. One instance is
// shared by all parallel episodes; it bounds concurrent in-flight requests.
class RemoteClient {
public:
    explicit RemoteClient(RemoteEndpointConfig cfg);
    ~RemoteClient();

    RemoteClient(const RemoteClient&) = delete;
    RemoteClient& operator=(const RemoteClient&) = delete;

    // Returns the raw model text (parsing is the protocol module's job).
    std::string chat_completion(const std::string& system_text, const std::string& user_text, const Frame* frame);

    const RemoteEndpointConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mirroreval
