// Copyright 2026 The sidrec Authors.
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

#include "sidrec/common/error.hpp"

namespace sidrec {

std::string_view error_class(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config_error";
    case ErrorKind::kData: return "data_error";
    case ErrorKind::kDimension: return "dimension_error";
    case ErrorKind::kIndex: return "index_error";
    case ErrorKind::kNumeric: return "numeric_error";
    case ErrorKind::kContract: return "contract_error";
    case ErrorKind::kIo: return "io_error";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return 2;
    case ErrorKind::kData:
    case ErrorKind::kDimension:
    case ErrorKind::kIndex:
    case ErrorKind::kIo: return 3;
    case ErrorKind::kNumeric: return 4;
    case ErrorKind::kContract: return 1;
  }
  return 1;
}

}  // namespace sidrec
