#pragma once

#include <memory>
#include <string>
#include <vector>

#include "orchestra/gplvm.hpp"
#include "orchestra/image.hpp"

namespace orchestra {

struct ServerOptions {
  std::string models_dir;
  std::string images_dir;
  int preview_max_dim = 256;
  int sim_iters = 50;
  std::uint64_t seed = 0;
};

/// HTTP front end over a fixed set of GPLVM models. Models and registered images are
/// immutable once the server is listening; only the recolor cache changes.
class Server {
 public:
  explicit Server(ServerOptions opts = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Loads *.json models (GPLVM only) and *.png images from the configured directories.
  void load_directories();
  void add_model(const std::string& name, const GplvmModel& model);
  /// Returns the image id (content hash).
  std::string add_image(const Image& image);
  void add_image(const std::string& id, const Image& image);

  const std::vector<std::string>& warnings() const;
  std::vector<std::string> model_names() const;

  /// Binds to host:port (0 picks a free port) and serves on a background thread.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  /// Cache statistics, for tests.
  std::size_t cache_hits() const;
  std::size_t cache_misses() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace orchestra
