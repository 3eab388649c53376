/*
 * Copyright 2026 The hdseize authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header pulling in the whole library.

#pragma once

#include "hdseize/dataio.hpp"
#include "hdseize/encoders.hpp"
#include "hdseize/error.hpp"
#include "hdseize/features.hpp"
#include "hdseize/hypervector.hpp"
#include "hdseize/item_memory.hpp"
#include "hdseize/metrics.hpp"
#include "hdseize/pipeline.hpp"
#include "hdseize/postproc.hpp"
#include "hdseize/profiler.hpp"
#include "hdseize/report.hpp"
#include "hdseize/seeds.hpp"
#include "hdseize/spectrum.hpp"
#include "hdseize/version.hpp"
