// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef TWIG_TWIG_HPP_
#define TWIG_TWIG_HPP_

#include "twig/bands.hpp"
#include "twig/bench.hpp"
#include "twig/engine.hpp"
#include "twig/grpo.hpp"
#include "twig/policy.hpp"
#include "twig/remote.hpp"
#include "twig/replay.hpp"
#include "twig/rewards.hpp"
#include "twig/scene.hpp"
#include "twig/schedule.hpp"
#include "twig/sequence.hpp"
#include "twig/sft.hpp"
#include "twig/toy_bridge.hpp"
#include "twig/toysim.hpp"
#include "twig/trace.hpp"

#endif  // TWIG_TWIG_HPP_
