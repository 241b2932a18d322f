#ifndef PHT_HTTP_API_HPP_
#define PHT_HTTP_API_HPP_

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "pht/session.hpp"

namespace httplib {
class Server;
}

namespace pht {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::string input_hash;  // sent as the X-Input-Hash header
};

using QueryParams = std::multimap<std::string, std::string>;

// Request handling independent of any socket. Safe to call from many threads at once.
class ApiService {
 public:
  explicit ApiService(Dataset dataset);

  ApiResponse handle(const std::string& method, const std::string& path, const QueryParams& params,
                     const std::string& body = {});

  std::string input_hash() const;
  std::size_t cache_entries() const;

 private:
  ApiResponse dispatch_get(const Dataset& dataset, const std::string& path, const QueryParams& params);
  ApiResponse switch_dataset(const std::string& body);

  mutable std::shared_mutex mutex_;
  std::shared_ptr<const Dataset> dataset_;
  std::unordered_map<std::string, ApiResponse> cache_;
};

// Thin httplib front end over an ApiService.
class HttpServer {
 public:
  explicit HttpServer(ApiService& service);
  ~HttpServer();

  // Returns false if the address cannot be bound (for example, port in use).
  bool bind(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  // Blocks until stop() is called.
  bool listen();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace pht

#endif  // PHT_HTTP_API_HPP_
