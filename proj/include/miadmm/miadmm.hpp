#pragma once

#include "miadmm/diagnostics.hpp"
#include "miadmm/engine.hpp"
#include "miadmm/errors.hpp"
#include "miadmm/numerics.hpp"
#include "miadmm/problem.hpp"
#include "miadmm/problems/bcd.hpp"
#include "miadmm/problems/dictlearn.hpp"
#include "miadmm/problems/metrics.hpp"
#include "miadmm/problems/nmf.hpp"
#include "miadmm/problems/sign_network.hpp"
#include "miadmm/problems/synthetic.hpp"
#include "miadmm/subsolvers.hpp"
