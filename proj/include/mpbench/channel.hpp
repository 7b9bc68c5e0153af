// Copyright 2026 The mpbench Authors. All Rights Reserved.
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

namespace mpbench {

/// Hockney-style cost parameters for the simulated channel.
struct ChannelModel {
  double alpha = 1.0;   ///< microseconds per message
  double beta = 0.001;  ///< microseconds per payload byte
  double sigma = 0.01;  ///< microseconds per byte, charged at encode and again at decode

  bool operator==(const ChannelModel&) const = default;
};

/// Throws ConfigError unless every parameter is finite and nonnegative.
void validate(const ChannelModel& channel);

}  // namespace mpbench
