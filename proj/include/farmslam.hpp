// Copyright (c) 2026 The farmslam Authors
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

/**
 * @file farmslam.hpp
 * @brief Everything in one include.
 */

#pragma once

#include "farmslam/association.hpp"
#include "farmslam/config.hpp"
#include "farmslam/core_types.hpp"
#include "farmslam/dataset_io.hpp"
#include "farmslam/errors.hpp"
#include "farmslam/evaluation.hpp"
#include "farmslam/factor_graph.hpp"
#include "farmslam/motion_model.hpp"
#include "farmslam/simulator.hpp"
#include "farmslam/slam_runner.hpp"
#include "farmslam/sss_geometry.hpp"
#include "farmslam/survey.hpp"
#include "farmslam/svg.hpp"
