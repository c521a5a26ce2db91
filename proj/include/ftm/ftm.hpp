#pragma once

#include "ftm/channel.hpp"
#include "ftm/core.hpp"
#include "ftm/correction.hpp"
#include "ftm/energy.hpp"
#include "ftm/errors.hpp"
#include "ftm/eval.hpp"
#include "ftm/io.hpp"
#include "ftm/ml/compact.hpp"
#include "ftm/ml/cross_validation.hpp"
#include "ftm/ml/gp.hpp"
#include "ftm/ml/kernels.hpp"
#include "ftm/ml/model.hpp"
#include "ftm/ml/nn.hpp"
#include "ftm/ml/normalizer.hpp"
#include "ftm/ml/split.hpp"
#include "ftm/ml/svr.hpp"
#include "ftm/ml/tree.hpp"
#include "ftm/protocol.hpp"
#include "ftm/rng.hpp"
