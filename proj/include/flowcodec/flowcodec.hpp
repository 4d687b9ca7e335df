// Copyright 2026 The flowcodec Authors
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

#include "flowcodec/bitio.hpp"
#include "flowcodec/block_match.hpp"
#include "flowcodec/codec.hpp"
#include "flowcodec/core.hpp"
#include "flowcodec/flow_adapt.hpp"
#include "flowcodec/flow_provider.hpp"
#include "flowcodec/media_io.hpp"
#include "flowcodec/metrics.hpp"
#include "flowcodec/transform.hpp"
