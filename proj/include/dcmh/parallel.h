// Copyright 2026 The DCMH Authors.
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

#ifndef DCMH_PARALLEL_H_
#define DCMH_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace dcmh {

// Worker cap: DCMH_THREADS when set to a positive integer, otherwise the
// number of hardware threads (at least 1).
std::size_t WorkerThreads();

// Runs fn(i) for i in [0, n) on up to WorkerThreads() threads, each thread
// owning one contiguous chunk. fn must only write state owned by index i.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dcmh

#endif  // DCMH_PARALLEL_H_
