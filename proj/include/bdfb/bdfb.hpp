// SPDX-License-Identifier: Apache-2.0
//
// bdfeedback: block diagonalization and limited-feedback MIMO broadcast simulation
// Copyright (C) 2026 The bdfeedback authors
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

#ifndef BDFB_BDFB_HPP
#define BDFB_BDFB_HPP

#include "channel.hpp"
#include "common.hpp"
#include "precoding.hpp"
#include "rates.hpp"
#include "rng.hpp"
#include "scalar_quant.hpp"
#include "scaling.hpp"
#include "sim/config.hpp"
#include "sim/gap.hpp"
#include "sim/records.hpp"
#include "sim/run.hpp"
#include "subspace.hpp"

#endif
