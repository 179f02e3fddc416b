#pragma once

// Binds a Service to a cpp-httplib server. httplib pulls in <resolv.h>, whose
// `_res` macro breaks Eigen, so the library headers come first.

#include "lkit/service.hpp"

#include <httplib.h>

namespace lkit {

inline void bind_routes(httplib::Server& server, Service& service) {
    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        const auto r = service.route(req.method, req.path, req.params, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get(R"(/api/.*)", forward);
    server.Post(R"(/api/.*)", forward);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

} // namespace lkit
