// Copyright 2026 The Athena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "athena/adapter.hpp"
#include "athena/charrnn.hpp"
#include "athena/ecsim.hpp"
#include "athena/errors.hpp"
#include "athena/injector.hpp"
#include "athena/metrics.hpp"
#include "athena/ngram.hpp"
#include "athena/parallel.hpp"
#include "athena/perplexity_report.hpp"
#include "athena/rng.hpp"
#include "athena/segmenter.hpp"
#include "athena/seqio.hpp"
#include "athena/tuner.hpp"
