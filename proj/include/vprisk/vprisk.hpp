//
// Copyright 2026 The vprisk Authors
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
//

#ifndef VPRISK_VPRISK_HPP_
#define VPRISK_VPRISK_HPP_

#include "vprisk/attack.hpp"
#include "vprisk/channel.hpp"
#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/ingest.hpp"
#include "vprisk/metrics.hpp"
#include "vprisk/partition.hpp"
#include "vprisk/profile_build.hpp"
#include "vprisk/random.hpp"
#include "vprisk/report.hpp"
#include "vprisk/schema.hpp"

#endif  // VPRISK_VPRISK_HPP_
