// Standalone chat-completions stub for manual runs against the remote backend.
#include <csignal>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mirroreval/stub_server.hpp"

using namespace mirroreval;

int main(int argc, char** argv) {
    StubServer::Options opt;
    std::string response =
        R"({"view-description": "", "reasoning": "", "action": "done", "summary": "stub", )"
        R"("selected_cube": "red", "identification": "red"})";
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::strcmp(argv[i], "--response-file") == 0) {
            std::ifstream in(argv[i + 1]);
            std::stringstream ss;
            ss << in.rdbuf();
            response = ss.str();
        }
        if (std::strcmp(argv[i], "--fail-first") == 0) opt.fail_first_n = std::atoi(argv[i + 1]);
        if (std::strcmp(argv[i], "--delay-ms") == 0) opt.delay_ms = std::atoi(argv[i + 1]);
    }
    opt.responses = {response};

    StubServer server(std::move(opt));
    server.start();
    std::cout << "stub chat-completions server listening at " << server.base_url() << "\n"
              << "POST " << server.base_url() << "/chat/completions\n";
    // Runs until interrupted.
    for (;;) pause();
}
