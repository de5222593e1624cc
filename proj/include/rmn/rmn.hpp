/*
Copyright 2026 The RMN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Umbrella header.

#ifndef RMN_RMN_HPP
#define RMN_RMN_HPP

#include "rmn/core.hpp"
#include "rmn/radial_basis.hpp"
#include "rmn/angular.hpp"
#include "rmn/model.hpp"
#include "rmn/param_grad.hpp"
#include "rmn/optim.hpp"
#include "rmn/sampling.hpp"
#include "rmn/targets.hpp"
#include "rmn/pinn_poisson.hpp"
#include "rmn/io.hpp"
#include "rmn/harness.hpp"

#endif  // RMN_RMN_HPP
