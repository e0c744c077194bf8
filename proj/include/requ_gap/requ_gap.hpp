#pragma once

#include "requ_gap/adversarial.hpp"
#include "requ_gap/bump.hpp"
#include "requ_gap/errors.hpp"
#include "requ_gap/growth_policy.hpp"
#include "requ_gap/hat_network.hpp"
#include "requ_gap/membership.hpp"
#include "requ_gap/network.hpp"
#include "requ_gap/network_io.hpp"
#include "requ_gap/network_ops.hpp"
#include "requ_gap/parallel.hpp"
#include "requ_gap/rates.hpp"
#include "requ_gap/sampling.hpp"
#include "requ_gap/sparse_matrix.hpp"
#include "requ_gap/unit_ball.hpp"
#include "requ_gap/upper_bound.hpp"
#include "requ_gap/wide_real.hpp"
