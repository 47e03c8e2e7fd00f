#include "gp2s/lp.hpp"

namespace gp2s {

template struct LpProblem<double>;
template LpResult<double> solve_lp<double>(const LpProblem<double>&, const LpSettings&);

}  // namespace gp2s
