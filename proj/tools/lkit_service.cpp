#include <cstdlib>
#include <iostream>
#include <string>

#include "lkit/http.hpp"

int main(int argc, char** argv) {
    int port = 8080;
    if (const char* env = std::getenv("LKIT_PORT")) port = std::atoi(env);
    if (argc > 1) port = std::atoi(argv[1]);
    if (port <= 0 || port > 65535) {
        std::cerr << "error: invalid port\n";
        return 1;
    }

    lkit::Service service;
    httplib::Server server;
    lkit::bind_routes(server, service);
    std::cerr << "lkit service listening on http://0.0.0.0:" << port << "\n";
    if (!server.listen("0.0.0.0", port)) {
        std::cerr << "error: cannot listen on port " << port << "\n";
        return 1;
    }
    return 0;
}
