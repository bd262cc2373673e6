// Copyright 2026 The MSASB Vocoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "msasb/envelope_reconstruction.hpp"
#include "msasb/error.hpp"
#include "msasb/metrics.hpp"
#include "msasb/msasb_analysis.hpp"
#include "msasb/pitch_tracking.hpp"
#include "msasb/signal_io.hpp"
#include "msasb/synthesis.hpp"
#include "msasb/types.hpp"
