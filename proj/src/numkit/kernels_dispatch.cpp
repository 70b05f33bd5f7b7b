#include <cstdlib>
#include <string_view>

#include "bbarena/numkit/kernels.hpp"

namespace bbarena::kernels {

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("BBARENA_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace bbarena::kernels
