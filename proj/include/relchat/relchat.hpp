// Copyright 2026 The relchat Authors
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

// Everything except the network gateway (relchat/server.hpp), which pulls in
// Boost.Beast.

#include "relchat/acts.hpp"
#include "relchat/discourse.hpp"
#include "relchat/engine.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/metrics.hpp"
#include "relchat/nlg.hpp"
#include "relchat/policy.hpp"
#include "relchat/ranker.hpp"
#include "relchat/relations.hpp"
#include "relchat/search.hpp"
#include "relchat/text.hpp"
