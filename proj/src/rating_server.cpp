#include "scanres/rating_server.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <random>

#include <httplib.h>

#include "scanres/image_io.hpp"
#include "scanres/raster.hpp"
#include "scanres/seed.hpp"

namespace scanres {
namespace {

std::string make_task_id(const std::string& region_id, Dpi dpi) { return region_id + "@" + std::to_string(value(dpi)); }

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>scanres rating</title></head>
<body><p>No UI assets were configured (start serve with --static-dir). The JSON API is available under /api.</p></body></html>
)";

}  // namespace

nlohmann::json to_json(const RatingTask& task, bool with_reference) {
  nlohmann::json j = {{"task_id", task.task_id},
                      {"region_id", task.region_id},
                      {"dpi", value(task.dpi)},
                      {"stimulus", "/api/stimulus/" + task.task_id},
                      {"sequence_index", task.sequence_index}};
  if (with_reference) j["reference"] = "/api/reference/" + task.task_id;
  return j;
}

RatingSession::RatingSession(std::vector<CorpusRegion> regions, std::filesystem::path ledger, std::uint64_t seed,
                             bool show_reference)
    : regions_(std::move(regions)), ledger_(std::move(ledger)), seed_(seed), show_reference_(show_reference) {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    for (Dpi dpi : kAllDpis) {
      const std::string id = make_task_id(regions_[i].id, dpi);
      if (!tasks_.emplace(id, TaskInfo{regions_[i].id, i, dpi}).second) {
        fail(ErrorCode::InvalidParameter, "duplicate region id '" + regions_[i].id + "'");
      }
      task_ids_.push_back(id);
    }
  }
  if (std::filesystem::exists(ledger_)) {
    for (const auto& r : load_ratings(ledger_)) {
      const std::string id = make_task_id(r.region_id, r.dpi);
      if (tasks_.count(id)) done_[r.rater_id].insert(id);
    }
  }
}

std::vector<std::string> RatingSession::presentation_order(const std::string& rater) const {
  std::vector<std::string> order = task_ids_;
  std::mt19937_64 rng(derive_seed(seed_, {fnv1a(rater)}));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<std::string>& RatingSession::order_for(const std::string& rater) {
  auto it = orders_.find(rater);
  if (it == orders_.end()) it = orders_.emplace(rater, presentation_order(rater)).first;
  return it->second;
}

std::optional<RatingTask> RatingSession::next(const std::string& rater) {
  std::lock_guard lock(mutex_);
  const auto& order = order_for(rater);
  const auto& done = done_[rater];
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (done.count(order[i])) continue;
    const TaskInfo& info = tasks_.at(order[i]);
    return RatingTask{order[i], info.region_id, info.dpi, i};
  }
  return std::nullopt;
}

Progress RatingSession::progress(const std::string& rater) {
  std::lock_guard lock(mutex_);
  return {done_[rater].size(), tasks_.size()};
}

void RatingSession::append_to_ledger(const RatingRecord& record) {
  const std::string line = rating_line(record) + "\n";
  if (ledger_.has_parent_path()) std::filesystem::create_directories(ledger_.parent_path());
  const int fd = ::open(ledger_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::IoError, "cannot open ledger " + ledger_.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fail(ErrorCode::IoError, "ledger write failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  const int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) fail(ErrorCode::IoError, "ledger fsync failed");
}

SubmitResult RatingSession::submit(const std::string& task_id, const std::string& rater_id, const std::string& score) {
  SubmitResult result;
  if (rater_id.empty()) {
    result.message = "rater_id is required";
    return result;
  }
  Score parsed;
  try {
    parsed = parse_score(score);
  } catch (const Error& e) {
    result.message = e.what();
    return result;
  }
  std::lock_guard lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) {
    result.status = SubmitStatus::NotFound;
    result.message = "unknown task '" + task_id + "'";
    return result;
  }
  auto& done = done_[rater_id];
  if (done.count(task_id)) {
    result.status = SubmitStatus::Conflict;
    result.message = "task already rated by " + rater_id;
    return result;
  }
  RatingRecord record{it->second.region_id, it->second.dpi, rater_id, parsed, utc_now()};
  append_to_ledger(record);
  done.insert(task_id);
  result.status = SubmitStatus::Created;
  result.record = std::move(record);
  return result;
}

SubmitResult RatingSession::submit_json(const std::string& body) {
  SubmitResult bad;
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    bad.message = "body must be a JSON object";
    return bad;
  }
  for (const char* field : {"task_id", "rater_id", "score"}) {
    if (!j.contains(field) || !j[field].is_string()) {
      bad.message = std::string("missing string field '") + field + "'";
      return bad;
    }
  }
  return submit(j["task_id"].get<std::string>(), j["rater_id"].get<std::string>(), j["score"].get<std::string>());
}

std::optional<std::string> RatingSession::stimulus_png(const std::string& task_id) {
  std::lock_guard lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return std::nullopt;
  auto cached = png_cache_.find(task_id);
  if (cached != png_cache_.end()) return cached->second;
  const auto& region = regions_[it->second.region_index].image;
  std::string png = encode_png(emulate_dpi(region, it->second.dpi).at_base);
  return png_cache_.emplace(task_id, std::move(png)).first->second;
}

std::optional<std::string> RatingSession::reference_png(const std::string& task_id) {
  std::lock_guard lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return std::nullopt;
  return encode_png(regions_[it->second.region_index].image);
}

struct RatingServer::Impl {
  explicit Impl(RatingSession& s) : session(s) {}
  RatingSession& session;
  httplib::Server server;
};

RatingServer::RatingServer(RatingSession& session, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(session)) {
  auto& srv = impl_->server;
  RatingSession* s = &session;

  srv.Get(R"(/api/session/([^/]+)/next)", [s](const httplib::Request& req, httplib::Response& res) {
    auto task = s->next(req.matches[1]);
    if (!task) {
      res.status = 204;
      return;
    }
    res.set_content(to_json(*task, s->show_reference()).dump(), "application/json");
  });

  srv.Post("/api/ratings", [s](const httplib::Request& req, httplib::Response& res) {
    SubmitResult r;
    try {
      r = s->submit_json(req.body);
    } catch (const Error& e) {
      res.status = 500;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    switch (r.status) {
      case SubmitStatus::Created:
        res.status = 201;
        res.set_content(to_json(*r.record).dump(), "application/json");
        return;
      case SubmitStatus::BadRequest: res.status = 400; break;
      case SubmitStatus::NotFound: res.status = 404; break;
      case SubmitStatus::Conflict: res.status = 409; break;
    }
    res.set_content(nlohmann::json{{"error", r.message}}.dump(), "application/json");
  });

  srv.Get(R"(/api/progress/([^/]+))", [s](const httplib::Request& req, httplib::Response& res) {
    const Progress p = s->progress(req.matches[1]);
    res.set_content(nlohmann::json{{"done", p.done}, {"total", p.total}}.dump(), "application/json");
  });

  auto png_route = [](auto getter) {
    return [getter](const httplib::Request& req, httplib::Response& res) {
      auto png = getter(req.matches[1].str());
      if (!png) {
        res.status = 404;
        res.set_content(nlohmann::json{{"error", "unknown task"}}.dump(), "application/json");
        return;
      }
      res.set_header("Cache-Control", "no-store");
      res.set_content(*png, "image/png");
    };
  };
  srv.Get(R"(/api/stimulus/([^/]+))", png_route([s](const std::string& id) { return s->stimulus_png(id); }));
  srv.Get(R"(/api/reference/([^/]+))", png_route([s](const std::string& id) { return s->reference_png(id); }));

  srv.Get("/api/config", [s](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"reference", s->show_reference()}, {"total", s->task_count()}}.dump(),
                    "application/json");
  });

  if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
    srv.set_mount_point("/", static_dir.string());
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kFallbackPage, "text/html"); });
  }
}

RatingServer::~RatingServer() { stop(); }

int RatingServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool RatingServer::listen() { return impl_->server.listen_after_bind(); }

void RatingServer::stop() {
  if (impl_) impl_->server.stop();
}

void RatingServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace scanres
