#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace dupviper {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;                 // 0 picks a free port
    std::string corpus_dir;          // must exist; state lives in <corpus_dir>/.dupviper
    std::size_t max_upload = 10u << 20;
    std::chrono::milliseconds async_threshold{2000};
    std::size_t search_workers = 0;  // per search; 0: hardware concurrency
};

// FNV-1a 64-bit, hex encoded; names uploaded documents.
std::string content_hash(std::string_view bytes);

/**
 * HTTP/JSON API over documents, heat maps, searches and editable result
 * sessions. Sessions are journaled as JSON lines under
 * <corpus_dir>/.dupviper/sessions and restored on construction.
 */
class Service {
public:
    // Throws ParameterError when the corpus directory is missing or unusable.
    explicit Service(ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds the listening socket; returns the bound port, or -1 when the address is unavailable.
    int bind();

    // Serves until stop(); call after a successful bind().
    void listen();

    void stop();

    std::size_t document_count() const;
    std::size_t session_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace dupviper
