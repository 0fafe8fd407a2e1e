#pragma once

#include "rankcorr/copula.hpp"
#include "rankcorr/eigen.hpp"
#include "rankcorr/error.hpp"
#include "rankcorr/harness.hpp"
#include "rankcorr/kernels.hpp"
#include "rankcorr/linalg.hpp"
#include "rankcorr/matrix.hpp"
#include "rankcorr/parallel.hpp"
#include "rankcorr/random.hpp"
#include "rankcorr/rank_estimators.hpp"
#include "rankcorr/regularize.hpp"
#include "rankcorr/subsets.hpp"
