/*
 * Copyright 2026 The corrcache Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "corrcache/errors.hpp"

namespace corrcache {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::NonStochasticMatrix:
      return "NonStochasticMatrix";
    case Errc::NotIrreducible:
      return "NotIrreducible";
    case Errc::BadSojournParameters:
      return "BadSojournParameters";
    case Errc::PopularityLengthMismatch:
      return "PopularityLengthMismatch";
    case Errc::ZeroMarginalPopularity:
      return "ZeroMarginalPopularity";
    case Errc::SingularSolve:
      return "SingularSolve";
    case Errc::CycleCapExceeded:
      return "CycleCapExceeded";
    case Errc::MissingContext:
      return "MissingContext";
    case Errc::SetTooLarge:
      return "SetTooLarge";
    case Errc::BudgetExceedsUniverse:
      return "BudgetExceedsUniverse";
    case Errc::CostOutOfRange:
      return "CostOutOfRange";
    case Errc::InstanceTooLarge:
      return "InstanceTooLarge";
    case Errc::StreamTooShort:
      return "StreamTooShort";
    case Errc::TooFewCycles:
      return "TooFewCycles";
    case Errc::ConfigParse:
      return "ConfigParse";
    case Errc::ConfigInvalid:
      return "ConfigInvalid";
    case Errc::IoFailure:
      return "IoFailure";
  }
  return "UnknownError";
}

}  // namespace corrcache
