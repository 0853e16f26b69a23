// Copyright 2026 The eswapsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eswap/errors.hpp"

#include <array>
#include <atomic>
#include <cstdio>
#include <mutex>

namespace eswap::warnings {

namespace {
std::mutex g_mutex;
Handler g_handler;
std::array<std::atomic<long>, 1> g_counts{};
}  // namespace

void set_handler(Handler h) {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_handler = std::move(h);
}

void emit(Kind kind, const std::string& message) {
  g_counts[static_cast<size_t>(kind)].fetch_add(1, std::memory_order_relaxed);
  Handler h;
  {
    std::lock_guard<std::mutex> lock(g_mutex);
    h = g_handler;
  }
  if (h) {
    h(kind, message);
  } else {
    std::fprintf(stderr, "warning: %s\n", message.c_str());
  }
}

long count(Kind kind) { return g_counts[static_cast<size_t>(kind)].load(); }

void reset() {
  for (auto& c : g_counts) c.store(0);
}

}  // namespace eswap::warnings
