// Copyright 2026 The QRST Authors
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

// Umbrella header.

#include "qrst/dynamics.hpp"
#include "qrst/error.hpp"
#include "qrst/harness/aggregate.hpp"
#include "qrst/harness/artifacts.hpp"
#include "qrst/harness/config.hpp"
#include "qrst/harness/parallel.hpp"
#include "qrst/harness/scenario.hpp"
#include "qrst/linalg.hpp"
#include "qrst/noise.hpp"
#include "qrst/qops.hpp"
#include "qrst/reservoir.hpp"
#include "qrst/rng.hpp"
#include "qrst/states.hpp"
#include "qrst/tomography.hpp"
#include "qrst/training.hpp"
#include "qrst/version.hpp"
#include "qrst/wigner.hpp"
