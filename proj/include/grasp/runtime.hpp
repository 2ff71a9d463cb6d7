// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Process-level tuning for executables. Not called by the library itself.

#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace grasp {

/// Keeps glibc from returning large activation buffers to the kernel after
/// every step. Without this, per-step mmap/munmap churn costs a third of the
/// training time on big graphs.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace grasp
