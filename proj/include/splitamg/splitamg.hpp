#ifndef SPLITAMG_SPLITAMG_HPP
#define SPLITAMG_SPLITAMG_HPP

#include "error.hpp"
#include "sparse.hpp"
#include "ilu0.hpp"
#include "krylov.hpp"
#include "spectral.hpp"
#include "model_problems.hpp"
#include "smoothers.hpp"
#include "amg/coarsening.hpp"
#include "amg/interpolation.hpp"
#include "amg/hierarchy.hpp"
#include "gpr/kernels.hpp"
#include "gpr/optimizer.hpp"
#include "gpr/gpr.hpp"
#include "gpr/multitask.hpp"
#include "gpr/serialization.hpp"
#include "harness/sweep.hpp"
#include "harness/dataset.hpp"
#include "harness/pipeline.hpp"
#include "harness/csv.hpp"

#endif
