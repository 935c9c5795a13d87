// Copyright 2026 The crfner Authors. All Rights Reserved.
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

#include <string>

namespace crfner {

// Throws DataError when the file cannot be read.
std::string read_file(const std::string& path);

// Writes to "<path>.tmp" and renames over `path`, so readers never observe a
// partially written file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace crfner
