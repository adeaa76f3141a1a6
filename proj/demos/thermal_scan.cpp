// Copyright 2026 The spinchain Authors
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

// Nearest-neighbour steady-state concurrence of a dissipative closed Ising
// chain as the bath warms up, for both rate conventions.

#include <iomanip>
#include <iostream>

#include "spinchain/evolution.hpp"
#include "spinchain/entanglement.hpp"
#include "spinchain/spin_operators.hpp"

int main() {
  using namespace spinchain;

  ChainParams chain;
  chain.n_sites = 4;
  std::cout << "   nbar   C12 literal      C12 sqrt\n";
  for (double nbar : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1}) {
    std::cout << std::setw(7) << nbar;
    for (RateConvention conv : {RateConvention::Literal, RateConvention::SqrtRate}) {
      EnvParams env;
      env.nbar = nbar;
      env.rate_convention = conv;
      const Liouvillian gen =
          assemble_liouvillian(build_hamiltonian(chain), build_lindblad_ops(chain, env));
      const DensityMatrix rho = steady_state(gen);
      std::cout << std::setw(14) << std::scientific << std::setprecision(4)
                << concurrence(partial_trace(rho, {1, 2})) << std::defaultfloat;
    }
    std::cout << "\n";
  }
  return 0;
}
