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

#include "lumenpoint/parallel.hpp"

#include <omp.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <vector>

namespace lumenpoint {

namespace {
constexpr std::size_t kLeaf = 8;
}

void set_thread_count(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

void keep_freed_memory() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 32 << 20);  // glibc caps the threshold at 32 MiB
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void pairwise_sum_strided(std::span<const double> values, std::size_t stride,
                          std::span<double> out) {
    const std::size_t rows = stride == 0 ? 0 : values.size() / stride;
    std::vector<double> column(rows);
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (std::size_t i = 0; i < rows; ++i) column[i] = values[i * stride + j];
        out[j] = pairwise_sum(column);
    }
}

}  // namespace lumenpoint
