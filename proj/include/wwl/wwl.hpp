#ifndef WWL_WWL_HPP
#define WWL_WWL_HPP

#include "wwl/graph.hpp"
#include "wwl/harness.hpp"
#include "wwl/io.hpp"
#include "wwl/kernels.hpp"
#include "wwl/learning.hpp"
#include "wwl/parallel.hpp"
#include "wwl/stats.hpp"
#include "wwl/svm.hpp"
#include "wwl/synthetic.hpp"
#include "wwl/transport.hpp"
#include "wwl/wl.hpp"

#endif  // WWL_WWL_HPP
