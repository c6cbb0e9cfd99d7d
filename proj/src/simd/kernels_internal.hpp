#pragma once

#include "dicomrouter/simd/kernels.hpp"

namespace dicomrouter::simd::detail {

extern const KernelTable kScalarTable;

#if DICOMROUTER_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

}  // namespace dicomrouter::simd::detail
