/*
 Copyright 2026 The FastDOC Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <functional>

namespace fastdoc {

/// Worker count from the FASTDOC_THREADS environment variable, falling back
/// to the hardware concurrency (at least 1). Values below 1 are clamped.
int worker_count();

/// Runs fn(i) for i in [0, count) on up to `threads` workers over contiguous
/// index ranges. Results must be written to per-index slots so the outcome is
/// independent of the worker count. Exceptions from workers are rethrown on
/// the calling thread (the first one by index order).
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace fastdoc
