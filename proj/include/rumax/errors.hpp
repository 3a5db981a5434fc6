// Copyright 2026 The Rumax Authors
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

#include <stdexcept>
#include <string>

namespace rumax {

// Base class for all library errors. Specific conditions get their own
// type so callers can catch exactly what they expect.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define RUMAX_DEFINE_ERROR(NAME)                                   \
  class NAME : public Error {                                      \
   public:                                                         \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
  }

// Tree construction / measure validation.
RUMAX_DEFINE_ERROR(NonUniformDepth);
RUMAX_DEFINE_ERROR(ProbabilitySumViolation);
RUMAX_DEFINE_ERROR(NonPositiveProbability);
RUMAX_DEFINE_ERROR(SizeMismatch);
RUMAX_DEFINE_ERROR(DepthOutOfRange);

// Market / supports.
RUMAX_DEFINE_ERROR(AffineSupportNotLinear);
RUMAX_DEFINE_ERROR(UnknownModel);

// Arbitrage certificates.
RUMAX_DEFINE_ERROR(ArbitrageAtNode);
RUMAX_DEFINE_ERROR(DegenerateSupport);
RUMAX_DEFINE_ERROR(ArbitrageInModel);

// Martingale measures.
RUMAX_DEFINE_ERROR(DriftDominatesVolatility);
RUMAX_DEFINE_ERROR(BaseNotFullSupport);

// Utilities.
RUMAX_DEFINE_ERROR(OutsideDomain);
RUMAX_DEFINE_ERROR(PointsOutsideDomain);
RUMAX_DEFINE_ERROR(BadUtilitySpec);

// Optimizer.
RUMAX_DEFINE_ERROR(Infeasible);
RUMAX_DEFINE_ERROR(Unbounded);
RUMAX_DEFINE_ERROR(NumericFailure);
RUMAX_DEFINE_ERROR(TooManyDimensions);
RUMAX_DEFINE_ERROR(DomainViolationAtStart);

// Generators / scenario I/O.
RUMAX_DEFINE_ERROR(BadParameters);
RUMAX_DEFINE_ERROR(UnsupportedHorizon);
RUMAX_DEFINE_ERROR(NoConsistentPricingMeasure);
RUMAX_DEFINE_ERROR(ArbitrageInStockModel);
RUMAX_DEFINE_ERROR(SchemaError);
RUMAX_DEFINE_ERROR(IOError);

#undef RUMAX_DEFINE_ERROR

}  // namespace rumax
