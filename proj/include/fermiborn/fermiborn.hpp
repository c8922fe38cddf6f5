// Copyright 2026 The fermiborn Authors
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

#include "fermiborn/baselines.hpp"
#include "fermiborn/circuit.hpp"
#include "fermiborn/datagen.hpp"
#include "fermiborn/dataset.hpp"
#include "fermiborn/engine.hpp"
#include "fermiborn/error.hpp"
#include "fermiborn/flo.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/loss.hpp"
#include "fermiborn/magic.hpp"
#include "fermiborn/model.hpp"
#include "fermiborn/oracle.hpp"
#include "fermiborn/parallel.hpp"
#include "fermiborn/persist.hpp"
#include "fermiborn/skewlin.hpp"
#include "fermiborn/trainer.hpp"
