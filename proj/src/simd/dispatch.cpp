#include "dicomrouter/simd/kernels.hpp"
#include "kernels_internal.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dicomrouter::simd {

namespace {

const KernelTable* initial_table() {
    const KernelTable* best = avx2_kernels() ? avx2_kernels() : &scalar_kernels();
    if (const char* env = std::getenv("DICOMROUTER_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_kernels();
        if (want == "avx2" && avx2_kernels()) return avx2_kernels();
    }
    return best;
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{initial_table()};
    return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return has;
#else
    return false;
#endif
}

const KernelTable* avx2_kernels() {
#if DICOMROUTER_HAVE_AVX2
    return cpu_has_avx2() ? &detail::kAvx2Table : nullptr;
#else
    return nullptr;
#endif
}

Isa best_available_isa() { return avx2_kernels() ? Isa::avx2 : Isa::scalar; }

const KernelTable& active_kernels() {
    return *active_slot().load(std::memory_order_relaxed);
}

void select_isa(Isa isa) {
    const KernelTable* table = isa == Isa::avx2 ? avx2_kernels() : &scalar_kernels();
    if (table == nullptr) {
        throw std::runtime_error("SIMD variant '" + std::string(to_string(isa)) +
                                 "' is not available on this CPU/build");
    }
    active_slot().store(table, std::memory_order_relaxed);
}

}  // namespace dicomrouter::simd
