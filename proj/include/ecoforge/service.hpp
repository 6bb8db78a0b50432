#pragma once

#include "ecoforge/traits.hpp"

#include <memory>
#include <string>

namespace ecoforge::service {

struct ServiceOptions {
    // Directory for model persistence; empty keeps models in memory only.
    std::string data_dir;
    // Trait backend spec (fixtures:<dir> | live:<url>); empty uses ECOFORGE_TRAIT_BACKEND or the bundled fixtures.
    std::string trait_backend;
    // Streamed frames per second of wall clock.
    double frames_per_second = 20;
    // Frames a session may compute ahead of its slowest subscriber.
    std::size_t buffer_frames = 256;
    // Value of Access-Control-Allow-Origin.
    std::string cors_origin = "*";
    // Optional directory of static files served at / (the built web UI).
    std::string static_dir;
};

// HTTP/1.1 JSON API under /api/v1.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Blocks until stop().
    bool listen(const std::string& host, int port);
    // Binds to an ephemeral port and returns it; serve with listen_after_bind().
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Port from ECOFORGE_PORT, else 8080.
int port_from_env();

} // namespace ecoforge::service
