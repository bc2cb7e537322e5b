// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cffd/cf_fd_link.hpp"
#include "cffd/scenario.hpp"

namespace cffd {

/// Randomized tiny network (M <= 4, Nt = Nr <= 2, K, L <= 2, tau_p = K + L) with
/// theta_si drawn in [-50, -10] dB; instance `index` of the family seeded by `seed`.
ScenarioConfig tiny_scenario_config(std::uint64_t seed, int index);

/// Closed-form terms under the full-budget equal allocation against their Monte
/// Carlo estimates. `flip_ul_si` negates the closed-form UL inter-AP column
/// before comparing (mutation probe).
TermComparison oracle_check(const Scenario& scenario, std::int64_t n_blocks, std::uint64_t seed,
                            double n_se = 3.0, bool flip_ul_si = false);

struct SelfTestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct SelfTestReport {
    std::vector<SelfTestCheck> checks;
    bool passed() const;
};

/// Fast subset of the acceptance suite: estimator identities, oracle equivalence
/// on tiny networks, mutation detection, bisection convergence, LSFD optimality.
SelfTestReport run_self_test(std::uint64_t seed = 1);

void print_report(std::ostream& os, const SelfTestReport& r);

}  // namespace cffd
