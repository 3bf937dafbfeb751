// Copyright 2026 The VQAG Authors.
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

#include "vqag/answer_extract.hpp"
#include "vqag/conllu.hpp"
#include "vqag/error.hpp"
#include "vqag/jsonl.hpp"
#include "vqag/metrics.hpp"
#include "vqag/question_gen.hpp"
#include "vqag/report.hpp"
#include "vqag/tree.hpp"
#include "vqag/types.hpp"
