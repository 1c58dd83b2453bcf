#include "mirroreval/stub_server.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace mirroreval {

struct StubServer::Impl {
    Options opt;
    httplib::Server svr;
    std::thread thread;
    int port = 0;

    mutable std::mutex mu;
    int total = 0;
    int concurrent = 0;
    int peak = 0;
    std::string last_body;
};

StubServer::StubServer(Options opt) : impl_(std::make_unique<Impl>()) {
    impl_->opt = std::move(opt);
    if (impl_->opt.responses.empty()) impl_->opt.responses.push_back("{}");
}

StubServer::~StubServer() { stop(); }

void StubServer::start() {
    Impl* im = impl_.get();
    im->svr.new_task_queue = [] { return new httplib::ThreadPool(16); };
    im->svr.Post("/v1/chat/completions", [im](const httplib::Request& req, httplib::Response& res) {
        int index;
        {
            std::lock_guard lock(im->mu);
            index = im->total++;
            im->concurrent++;
            im->peak = std::max(im->peak, im->concurrent);
            im->last_body = req.body;
        }
        if (im->opt.delay_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(im->opt.delay_ms));
        }
        if (index < im->opt.fail_first_n) {
            res.status = im->opt.fail_status;
            res.set_content("injected failure", "text/plain");
        } else {
            const auto& responses = im->opt.responses;
            const std::string& content =
                responses[std::min<std::size_t>(index, responses.size() - 1)];
            nlohmann::json reply = {{"choices", {{{"message", {{"content", content}}}}}}};
            res.set_content(reply.dump(), "application/json");
        }
        {
            std::lock_guard lock(im->mu);
            im->concurrent--;
        }
    });
    im->port = im->svr.bind_to_any_port("127.0.0.1");
    if (im->port <= 0) throw std::runtime_error("stub server failed to bind");
    im->thread = std::thread([im] { im->svr.listen_after_bind(); });
    im->svr.wait_until_ready();
}

void StubServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->svr.stop();
        impl_->thread.join();
    }
}

int StubServer::port() const { return impl_->port; }

std::string StubServer::base_url() const { return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1"; }

int StubServer::total_requests() const {
    std::lock_guard lock(impl_->mu);
    return impl_->total;
}

int StubServer::peak_concurrency() const {
    std::lock_guard lock(impl_->mu);
    return impl_->peak;
}

std::string StubServer::last_request_body() const {
    std::lock_guard lock(impl_->mu);
    return impl_->last_body;
}

}  // namespace mirroreval
