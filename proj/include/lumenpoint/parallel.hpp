/*
 * Copyright (C) 2026 The Lumenpoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <span>

namespace lumenpoint {

// Sets the OpenMP worker count used by every parallel kernel. Zero means
// "use the runtime default". Results never depend on this value.
void set_thread_count(int threads);
int thread_count();

// Keeps large freed blocks in the heap instead of returning them to the OS.
// Training allocates and frees multi-megabyte tensors every step; without
// this each step pays for fresh zeroed pages. No-op off glibc.
void keep_freed_memory();

// Tree reduction with a fixed shape determined only by the input length.
double pairwise_sum(std::span<const double> values);

// Sums `count` interleaved accumulators: values[i * stride + j] for each j.
// out[j] receives the pairwise sum over i.
void pairwise_sum_strided(std::span<const double> values, std::size_t stride,
                          std::span<double> out);

}  // namespace lumenpoint
