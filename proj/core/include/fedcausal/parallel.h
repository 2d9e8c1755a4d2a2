/*
* Copyright 2026 The fedcausal Authors.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     https://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
* ============================================================================
*/
// Minimal index-parallel loop over a fixed pool of std::threads.

#ifndef FEDCAUSAL_PARALLEL_H_
#define FEDCAUSAL_PARALLEL_H_

#include <functional>

namespace fedcausal {

// Thread count from FEDCAUSAL_THREADS when set to a positive integer,
// otherwise std::thread::hardware_concurrency() (at least 1).
int DefaultThreadCount();

// Calls body(i) for i in [0, n) on up to 'threads' workers (<= 0 selects
// DefaultThreadCount()). Indices are handed out in increasing order. The
// first exception thrown by body is rethrown after all workers stop.
void ParallelFor(int n, const std::function<void(int)>& body, int threads = 0);

}  // namespace fedcausal

#endif  // FEDCAUSAL_PARALLEL_H_
