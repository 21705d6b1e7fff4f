#include <algorithm>
#include <cmath>

#include "qtime/kernels.hpp"

namespace qtime::kernels::omp {

#define QTIME_FOR _Pragma("omp parallel for schedule(static)")
#include "kernels_body.inc"
#undef QTIME_FOR

}  // namespace qtime::kernels::omp
