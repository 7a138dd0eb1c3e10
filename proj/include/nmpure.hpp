// Copyright 2026 The nmpure Authors
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

#include "nmpure/analytics.hpp"
#include "nmpure/channels.hpp"
#include "nmpure/errors.hpp"
#include "nmpure/noise.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/purification.hpp"
#include "nmpure/random.hpp"
#include "nmpure/tensor.hpp"
#include "nmpure/tomography.hpp"
#include "nmpure/twirling.hpp"
