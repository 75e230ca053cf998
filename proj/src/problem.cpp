#include "ppinn/problem.hpp"

namespace ppinn {

ad::Rev Problem::boundary_penalty(ad::GradContext& ctx, int, int,
                                  const Dataset&, int, uint64_t) const {
  return ctx.leaf(0.0);
}

}  // namespace ppinn
