// Copyright 2026 The capcheck Authors. All Rights Reserved.
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

#ifndef CAPCHECK_ERROR_HPP_
#define CAPCHECK_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace capcheck {

// Root of every error thrown by the library. Subclasses name the failure
// family so callers can route them (e.g. per-sample code failures vs. run
// aborting infrastructure problems).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CAPCHECK_DEFINE_ERROR(Name)     \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

CAPCHECK_DEFINE_ERROR(ParseError);
CAPCHECK_DEFINE_ERROR(ValidationError);
CAPCHECK_DEFINE_ERROR(IoError);
CAPCHECK_DEFINE_ERROR(DecodeError);
CAPCHECK_DEFINE_ERROR(ContractError);
CAPCHECK_DEFINE_ERROR(DomainError);
CAPCHECK_DEFINE_ERROR(DataError);
CAPCHECK_DEFINE_ERROR(ConflictError);
CAPCHECK_DEFINE_ERROR(UndefinedAggregate);
CAPCHECK_DEFINE_ERROR(BackendUnavailable);
CAPCHECK_DEFINE_ERROR(GenerationError);
CAPCHECK_DEFINE_ERROR(InfrastructureError);
CAPCHECK_DEFINE_ERROR(ConfigError);

// Retryable: the text-generation transport could not complete a request.
CAPCHECK_DEFINE_ERROR(TransportError);

#undef CAPCHECK_DEFINE_ERROR

}  // namespace capcheck

#endif  // CAPCHECK_ERROR_HPP_
