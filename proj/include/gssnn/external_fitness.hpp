/* Copyright 2026 The gssnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// File-based fitness backend. For each job the engine writes
// <jobs_dir>/<id>/job.json and waits for the trainer to write fitness.json
// (or error.json) next to it.

#pragma once

#include <chrono>
#include <filesystem>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gssnn/evolution.hpp"
#include "gssnn/io.hpp"

namespace gssnn {

class ExternalFitness final : public FitnessBackend {
 public:
  ExternalFitness(fs::path jobs_dir, double timeout_secs, double poll_secs = 0.2)
      : jobs_dir_(std::move(jobs_dir)), timeout_secs_(timeout_secs), poll_secs_(poll_secs) {}

  std::vector<FitnessRecord> evaluate(std::span<const FitnessJob> jobs) override {
    for (const auto& job : jobs) submit(job);

    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_secs_);
    std::vector<std::optional<FitnessRecord>> results(jobs.size());
    std::size_t pending = jobs.size();
    for (;;) {
      for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (results[k]) continue;
        const auto dir = jobs_dir_ / jobs[k].id;
        if (fs::exists(dir / "error.json")) {
          throw FitnessUnavailable("job " + jobs[k].id + " failed: " +
                                   read_json_file(dir / "error.json").dump());
        }
        if (!fs::exists(dir / "fitness.json")) continue;
        try {
          results[k] = fitness_from_json(read_json_file(dir / "fitness.json"));
          --pending;
        } catch (const Error&) {
          // Partially written; retry on the next poll.
        }
      }
      if (pending == 0) break;
      if (Clock::now() >= deadline) {
        throw FitnessUnavailable("timed out waiting for " + std::to_string(pending) +
                                 " fitness result(s) in " + jobs_dir_.string());
      }
      std::this_thread::sleep_for(std::chrono::duration<double>(poll_secs_));
    }
    std::vector<FitnessRecord> out;
    out.reserve(results.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
  }

 private:
  void submit(const FitnessJob& job) {
    const auto dir = jobs_dir_ / job.id;
    try {
      fs::create_directories(dir);
      fs::remove(dir / "fitness.json");
      fs::remove(dir / "error.json");
      const auto staging = dir / "job.json.tmp";
      write_json_file(staging, job_to_json(job));
      fs::rename(staging, dir / "job.json");
    } catch (const std::exception& e) {
      throw FitnessUnavailable(std::string("cannot submit job ") + job.id + ": " + e.what());
    }
  }

  fs::path jobs_dir_;
  double timeout_secs_;
  double poll_secs_;
};

}  // namespace gssnn
