// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include "contrast/core.hpp"
#include "contrast/decode.hpp"
#include "contrast/divergence.hpp"
#include "contrast/error.hpp"
#include "contrast/metrics.hpp"
#include "contrast/ngram.hpp"
#include "contrast/prompt.hpp"
#include "contrast/provider.hpp"
#include "contrast/rng.hpp"
#include "contrast/strategies.hpp"
#include "contrast/trace.hpp"
#include "contrast/wire.hpp"
