#include <atomic>
#include <cstdlib>
#include <string_view>

#include "cmalab/errors.hpp"
#include "cmalab/simd/kernels.hpp"
#include "kernels_impl.hpp"

namespace cmalab::simd {
namespace {

const KernelTable kScalar{Isa::scalar,           scalar::stencil_interior, scalar::ma_reduced,
                          scalar::residual_combine, scalar::linearization,  scalar::weighted_dot,
                          scalar::max_abs};

#if defined(CMALAB_HAVE_AVX2)
const KernelTable kAvx2{Isa::avx2,             avx2::stencil_interior, avx2::ma_reduced,
                        avx2::residual_combine, avx2::linearization,    avx2::weighted_dot,
                        avx2::max_abs};
#endif

bool cpu_has_avx2() noexcept {
#if defined(CMALAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() noexcept {
    const char* env = std::getenv("CMALAB_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &kScalar;
    if (const KernelTable* t = avx2_kernels()) return t;
    return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

const KernelTable* avx2_kernels() noexcept {
#if defined(CMALAB_HAVE_AVX2)
    static const bool ok = cpu_has_avx2();
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

bool isa_available(Isa isa) noexcept { return isa == Isa::scalar || avx2_kernels() != nullptr; }

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void select(Isa isa) {
    if (isa == Isa::scalar) {
        current().store(&kScalar, std::memory_order_release);
        return;
    }
    const KernelTable* t = avx2_kernels();
    if (t == nullptr) throw ConfigurationError("AVX2 kernels are not available on this machine");
    current().store(t, std::memory_order_release);
}

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace cmalab::simd
