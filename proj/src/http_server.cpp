#include <httplib.h>

#include <iostream>

#include "flowguard/errors.hpp"
#include "flowguard/service.hpp"

namespace flowguard {

namespace {

void dispatch(Service& service, const httplib::Request& req, httplib::Response& res) {
  HttpRequest r;
  r.method = req.method;
  r.path = req.path;
  r.body = req.body;
  for (const auto& [k, v] : req.params) r.query[k] = v;
  for (const auto& [k, v] : req.headers) r.headers[k] = v;
  const auto out = service.handle(r);
  res.status = out.status;
  res.set_content(out.body, out.content_type);
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, const std::filesystem::path& static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    dispatch(service, req, res);
  };
  auto& server = impl_->server;
  server.Get(R"(/api/.*)", handler);
  server.Post(R"(/api/.*)", handler);
  server.Put(R"(/api/.*)", handler);
  server.Delete(R"(/api/.*)", handler);
  if (!static_dir.empty()) {
    if (!server.set_mount_point("/", static_dir.string())) {
      throw NotFoundError("static directory " + static_dir.string() + " does not exist");
    }
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot listen on " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void serve_http(Service& service, const std::string& host, int port,
                const std::filesystem::path& static_dir) {
  HttpServer server(service, static_dir);
  const int bound = server.bind(host, port);
  std::cerr << "flowguard: listening on " << host << ":" << bound << '\n';
  server.listen();
}

}  // namespace flowguard
