// Copyright 2026 The r2plan Authors.
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

#include "r2plan/bench.hpp"
#include "r2plan/csv.hpp"
#include "r2plan/environments.hpp"
#include "r2plan/error.hpp"
#include "r2plan/mdp.hpp"
#include "r2plan/norms.hpp"
#include "r2plan/planners.hpp"
#include "r2plan/policy_gradient.hpp"
#include "r2plan/r2_operators.hpp"
#include "r2plan/regularizers.hpp"
#include "r2plan/robust_oracle.hpp"
#include "r2plan/uncertainty.hpp"
