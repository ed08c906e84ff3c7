/* Copyright 2026 The gssnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header.

#pragma once

#include "gssnn/compression.hpp"
#include "gssnn/dsl.hpp"
#include "gssnn/embedding.hpp"
#include "gssnn/evolution.hpp"
#include "gssnn/external_fitness.hpp"
#include "gssnn/graph.hpp"
#include "gssnn/hash.hpp"
#include "gssnn/io.hpp"
#include "gssnn/isomorphism.hpp"
#include "gssnn/search.hpp"
