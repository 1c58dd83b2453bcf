#pragma once

#include <memory>
#include <string>
#include <vector>

namespace mirroreval {

// Local chat-completions stand-in speaking the same wire shape as the remote
// client. Used by the test suites and available as a standalone tool.
class StubServer {
public:
    struct Options {
        // Per-request content, indexed by request order; the last entry
        // repeats once the list is exhausted.
        std::vector<std::string> responses;
        int fail_first_n = 0;   // respond with fail_status to the first N requests
        int fail_status = 503;
        int delay_ms = 0;       // handler sleep; exercises concurrency bounds
    };

    explicit StubServer(Options opt);
    ~StubServer();

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    void start();
    void stop();

    int port() const;
    std::string base_url() const;  // http://127.0.0.1:<port>/v1

    int total_requests() const;
    int peak_concurrency() const;
    std::string last_request_body() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mirroreval
