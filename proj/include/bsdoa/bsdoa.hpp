// SPDX-License-Identifier: Apache-2.0
//
// bsdoa: covariance-guided DFT-beamspace ESPRIT for hybrid receivers
// Copyright (C) 2026 The bsdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#pragma once

#include "bsdoa/array_model.hpp"
#include "bsdoa/beam_selection.hpp"
#include "bsdoa/coarse_esprit.hpp"
#include "bsdoa/core.hpp"
#include "bsdoa/covariance_fit.hpp"
#include "bsdoa/fine_esprit.hpp"
#include "bsdoa/hybrid_combiner.hpp"
#include "bsdoa/metrics.hpp"
#include "bsdoa/nnls.hpp"
#include "bsdoa/rng.hpp"
