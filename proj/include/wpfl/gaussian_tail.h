//
// Copyright 2026 The WPFL Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef WPFL_GAUSSIAN_TAIL_H_
#define WPFL_GAUSSIAN_TAIL_H_

namespace wpfl {

// Q(x) = P[N(0,1) > x]. Uses erfc for |x| <= 8 and the asymptotic Mills-ratio
// expansion beyond, truncated at its smallest term. Throws DomainError for
// non-finite x.
double GaussianTail(double x);

// Standard normal density.
double GaussianPdf(double x);

}  // namespace wpfl

#endif  // WPFL_GAUSSIAN_TAIL_H_
