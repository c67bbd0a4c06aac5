#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "scanres/corpus.hpp"

namespace scanres {

struct RatingTask {
  std::string task_id;  // "<region_id>@<dpi>"
  std::string region_id;
  Dpi dpi = kBaseDpi;
  std::size_t sequence_index = 0;
};

nlohmann::json to_json(const RatingTask& task, bool with_reference = false);

struct Progress {
  std::size_t done = 0;
  std::size_t total = 0;
};

enum class SubmitStatus { Created, BadRequest, NotFound, Conflict };

struct SubmitResult {
  SubmitStatus status = SubmitStatus::BadRequest;
  std::string message;
  std::optional<RatingRecord> record;
};

// Rating-session state shared by all raters. Every (region, dpi) pair is one
// task; each rater sees all tasks once, in a permutation seeded by the session
// seed and the rater id. Accepted ratings are appended and fsync'ed to the
// ledger before submit() returns. An existing ledger is replayed on startup.
class RatingSession {
 public:
  RatingSession(std::vector<CorpusRegion> regions, std::filesystem::path ledger, std::uint64_t seed,
                bool show_reference = false);

  std::optional<RatingTask> next(const std::string& rater);
  Progress progress(const std::string& rater);
  SubmitResult submit(const std::string& task_id, const std::string& rater_id, const std::string& score);
  SubmitResult submit_json(const std::string& body);

  // Emulated stimulus (at base size) and the 300 dpi reference, as PNG.
  std::optional<std::string> stimulus_png(const std::string& task_id);
  std::optional<std::string> reference_png(const std::string& task_id);

  std::vector<std::string> presentation_order(const std::string& rater) const;
  std::size_t task_count() const { return tasks_.size(); }
  bool show_reference() const { return show_reference_; }

 private:
  struct TaskInfo {
    std::string region_id;
    std::size_t region_index = 0;
    Dpi dpi = kBaseDpi;
  };

  std::vector<std::string>& order_for(const std::string& rater);  // requires mutex_
  void append_to_ledger(const RatingRecord& record);

  std::vector<CorpusRegion> regions_;
  std::filesystem::path ledger_;
  std::uint64_t seed_;
  bool show_reference_;
  std::vector<std::string> task_ids_;
  std::map<std::string, TaskInfo> tasks_;

  std::mutex mutex_;
  std::map<std::string, std::vector<std::string>> orders_;
  std::map<std::string, std::set<std::string>> done_;
  std::map<std::string, std::string> png_cache_;
};

// HTTP front end:
//   GET  /api/session/{rater}/next   -> RatingTask JSON, or 204 when exhausted
//   POST /api/ratings                 {task_id, rater_id, score} -> 201 / 400 / 404 / 409
//   GET  /api/progress/{rater}        -> {done, total}
//   GET  /api/stimulus/{task_id}      -> PNG
//   GET  /api/reference/{task_id}     -> PNG of the 300 dpi region
//   GET  /api/config                  -> {reference, total}
//   GET  /                            -> static UI from static_dir
class RatingServer {
 public:
  RatingServer(RatingSession& session, std::filesystem::path static_dir = {});
  ~RatingServer();

  // Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scanres
