// Runtime kernel selection. The AVX2 path requires both AVX2 and FMA; the
// DMXM_KERNELS environment variable ("scalar" or "avx2") overrides detection.

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "dmx/kernels.hpp"

namespace dmx::kernels {

#if DMX_HAVE_AVX2_SOURCES
const Ops* avx2_ops_impl();
#endif

const Ops* avx2_ops() {
#if DMX_HAVE_AVX2_SOURCES
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return avx2_ops_impl();
#endif
  return nullptr;
}

namespace {

const Ops& select() {
  if (const char* env = std::getenv("DMXM_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return scalar_ops();
    if (want == "avx2") {
      if (const Ops* v = avx2_ops()) return *v;
      throw std::runtime_error(
          "DMXM_KERNELS=avx2 requested but AVX2+FMA is unavailable");
    }
    if (!want.empty())
      throw std::runtime_error("DMXM_KERNELS: unknown kernel set '" + want +
                               "'");
  }
  if (const Ops* v = avx2_ops()) return *v;
  return scalar_ops();
}

}  // namespace

const Ops& ops() {
  static const Ops& chosen = select();
  return chosen;
}

}  // namespace dmx::kernels
