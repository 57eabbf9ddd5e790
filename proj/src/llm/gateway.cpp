// Copyright 2026 The Taskbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fmt/format.h>

#include <thread>

#include "taskbench/llm.hpp"

namespace taskbench::llm {

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayOptions opts, std::shared_ptr<Journal> journal)
    : provider_(std::move(provider)),
      opts_(std::move(opts)),
      journal_(std::move(journal)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (!provider_) throw ConfigError("gateway needs a provider");
  if (opts_.max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
}

void Gateway::pace() {
  if (opts_.min_interval.count() <= 0) return;
  std::chrono::milliseconds wait{0};
  {
    std::lock_guard lock(mu_);
    auto now = std::chrono::steady_clock::now();
    auto earliest = last_start_ + opts_.min_interval;
    if (last_start_.time_since_epoch().count() != 0 && earliest > now) {
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(earliest - now);
      last_start_ = earliest;
    } else {
      last_start_ = now;
    }
  }
  if (wait.count() > 0) sleeper_(wait);
}

CompletionResult Gateway::complete(const CompletionRequest& req) {
  if (req.prompt.empty()) throw LlmError(LlmErrorKind::InvalidRequest, "empty prompt");
  req.params.validate();
  RequestLogEntry entry{req.tag, request_key(req), 0, false};

  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < opts_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard lock(g->mu_);
        --g->in_flight_;
      }
      g->cv_.notify_one();
    }
  } release{this};

  auto finish = [&](bool ok) {
    entry.ok = ok;
    std::lock_guard lock(mu_);
    log_.push_back(entry);
  };

  const auto& backoff = opts_.retry.backoff;
  for (std::size_t attempt = 0;; ++attempt) {
    pace();
    ++entry.calls;
    try {
      auto res = provider_->complete(req);
      if (journal_) journal_->record(req, res);
      finish(true);
      return res;
    } catch (const LlmError& e) {
      if (!e.transient()) {
        if (journal_) journal_->record_error(req, e);
        finish(false);
        throw;
      }
      if (attempt >= backoff.size()) {
        if (journal_) journal_->record_error(req, e);
        finish(false);
        throw ProviderExhausted(e.kind(), fmt::format("{} after {} calls", e.what(), entry.calls), entry.calls);
      }
      sleeper_(backoff[attempt]);
    }
  }
}

std::vector<RequestLogEntry> Gateway::request_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::map<std::string, std::size_t> Gateway::requests_by_tag() const {
  std::map<std::string, std::size_t> out;
  std::lock_guard lock(mu_);
  for (const auto& e : log_) ++out[e.tag];
  return out;
}

}  // namespace taskbench::llm
