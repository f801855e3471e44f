#pragma once

#include "carol/adaptation.hpp"
#include "carol/baselines.hpp"
#include "carol/context.hpp"
#include "carol/envs.hpp"
#include "carol/error.hpp"
#include "carol/knowledge.hpp"
#include "carol/nn.hpp"
#include "carol/rng.hpp"
#include "carol/rollout.hpp"
#include "carol/source_training.hpp"
#include "carol/task.hpp"
