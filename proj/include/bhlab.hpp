/*
   Copyright 2026 The bhlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

/** @file bhlab.hpp
    @brief Umbrella header.
*/

#pragma once

#include "bhlab/block_hankel.hpp"
#include "bhlab/config.hpp"
#include "bhlab/det_equiv.hpp"
#include "bhlab/harness.hpp"
#include "bhlab/helffer_sjostrand.hpp"
#include "bhlab/invariants.hpp"
#include "bhlab/mp_law.hpp"
#include "bhlab/report.hpp"
#include "bhlab/second_order.hpp"
#include "bhlab/spectral.hpp"
#include "bhlab/stats.hpp"
#include "bhlab/toeplitz.hpp"
