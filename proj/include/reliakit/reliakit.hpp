// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Everything except the HTTP client (reliakit/http_gateway.hpp), which pulls
// in cpp-httplib and OpenSSL.

#include "reliakit/calibration.hpp"
#include "reliakit/config.hpp"
#include "reliakit/error.hpp"
#include "reliakit/evaluator.hpp"
#include "reliakit/gateway.hpp"
#include "reliakit/grpo.hpp"
#include "reliakit/labeler.hpp"
#include "reliakit/metrics.hpp"
#include "reliakit/parallel.hpp"
#include "reliakit/prompts.hpp"
#include "reliakit/qa_data.hpp"
#include "reliakit/sft_builder.hpp"
#include "reliakit/text.hpp"
#include "reliakit/version.hpp"
