// Copyright 2026 The CityPulse Authors.
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

#ifndef CITYPULSE_BUNDLED_DATA_HPP_
#define CITYPULSE_BUNDLED_DATA_HPP_

#include <string_view>
#include <vector>

namespace citypulse {

/// Contents of a file from the repository's data/ directory, compiled into
/// the library. Throws Error(IoError) for unknown names.
std::string_view bundled_data(std::string_view name);
std::vector<std::string_view> bundled_data_names();

}  // namespace citypulse

#endif  // CITYPULSE_BUNDLED_DATA_HPP_
